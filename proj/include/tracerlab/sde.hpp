#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "tracerlab/band.hpp"
#include "tracerlab/field.hpp"
#include "tracerlab/vec.hpp"

namespace trl {

// Ensemble of dX = eps*b(X) dt + sqrt(2) dW over n_fields independent field
// realizations times n_paths Brownian paths each.
struct SimConfig {
    double epsilon2 = 0.5;
    SpectralBand band{};
    double dt = 0.02;
    double t_max = 10.0;
    int n_paths = 4096;
    int n_fields = 16;
    std::uint64_t seed = 1;
    std::vector<double> record_times;
    Vec2 xi{1.0, 0.0};
    int modes_per_octave = 2048;
    SamplingScheme scheme = SamplingScheme::stratified_annulus;
    double abort_radius = 1e8;
    double max_abort_fraction = 1e-3;

    // Throws std::invalid_argument; dt <= 0.1 because the UV correlation
    // length is 1 and the drift must be resolved.
    void validate() const;
    // Record times snapped to the step grid (nearest multiple of dt).
    std::vector<double> snapped_times() const;
    std::vector<std::int64_t> record_steps() const;
    int total_modes() const;
    nlohmann::json to_json() const;
};

struct EnsembleResult {
    std::vector<double> times;
    std::vector<double> msd_dir_mean;   // mean of (xi . X_t)^2
    std::vector<double> msd_dir_se;
    std::vector<double> msd_total_mean; // mean of |X_t|^2
    std::vector<double> msd_total_se;
    // Per-field path means; fields are the independent units, so standard
    // errors and bootstrap resampling act on these rows.
    std::vector<std::vector<double>> field_msd_dir;
    std::vector<std::vector<double>> field_msd_total;
    std::int64_t effective_samples = 0;
    std::int64_t aborted_paths = 0;
    nlohmann::json manifest;
};

// Euler-Maruyama; each (field, path) owns an independent RNG substream keyed
// by (seed, field, path), so results are bit-reproducible for a given config.
// Throws std::runtime_error if more than max_abort_fraction of the paths
// leave |X| <= abort_radius or go non-finite.
EnsembleResult simulate_ensemble(const SimConfig& config);

struct FitWindow {
    double t1 = 0.0;
    double t2 = 0.0;
    // Guard t2 <= L^2 / (safety * lambda_hat): beyond that horizon the IR
    // cutoff shows and the slope no longer estimates the band's diffusivity.
    double safety = 10.0;
    int bootstrap = 200;
};

struct DiffusivityEstimate {
    double L = 1.0;
    double lambda_hat = 1.0;
    double ci_half_width = 0.0; // 1.96 * bootstrap sd over field resamples
    double t1 = 0.0;
    double t2 = 0.0;
    int points = 0;
};

// Least-squares affine fit of MSD_dir(t)/2 over the window; slope is
// lambda_hat. Requires n_fields >= 2 (fields are the bootstrap unit).
// Throws std::invalid_argument when the fitted slope violates the window
// guard.
DiffusivityEstimate estimate_lambda(const EnsembleResult& ens, const SimConfig& config,
                                    const FitWindow& window);
DiffusivityEstimate estimate_lambda(const SimConfig& config, const FitWindow& window);

struct SuperdiffusionRow {
    double t = 0.0;
    double msd = 0.0;
    double se = 0.0;
    double ratio = 0.0;       // msd / (2t sqrt(1 + eps2/2 ln t))
    double ratio_se = 0.0;
    double wrong_ratio = 0.0; // msd / (2t (1 + eps2/2 ln t)), no square root
};

struct SuperdiffusionReport {
    std::vector<SuperdiffusionRow> rows;
    double flatness = 1.0;    // max/min of ratio over the grid
    double wrong_drift = 0.0; // |wrong_ratio(end)/wrong_ratio(begin) - 1|
    EnsembleResult ensemble;
};

// Rejects bands with L < band_safety * sqrt(t_max * expected lambda): the IR
// cutoff must stay invisible over the horizon.
SuperdiffusionReport superdiffusion_experiment(const SimConfig& config, double band_safety = 10.0);

} // namespace trl
