#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "tracerlab/periodic_slice.hpp"
#include "tracerlab/vec.hpp"

namespace trl {

// v(t, x) on the slice with v(0) = 0, advanced by a pseudo-spectral
// semi-implicit scheme: diffusion implicit (unconditionally stable),
// advection -eps b . (xi + grad v) explicit with spectral derivatives. The
// q = 0 mode is pinned to zero (the continuum invariant: b is
// divergence-free, so the spatial mean of v never moves).
struct ParabolicSolution {
    double T = 0.0, dt = 0.0, epsilon = 0.0;
    Vec2 xi{1.0, 0.0};
    int steps = 0;
    std::vector<double> v;      // final grid values, grid_n^2
    double mean_v2 = 0.0;       // spatial mean of v(T)^2
    double grad_integral = 0.0; // trapezoidal integral of mean |grad v|^2 over [0, T]

    // Energy ledger sampled along the run (index 0 is t = 0).
    std::vector<double> times, ledger_v2, ledger_grad_integral;

    // Energy side of the displacement identity at time T: the martingale
    // computation of (xi . X_T)^2 fixes the weights at
    //   T + mean(v(T)^2)/2 + integral_0^T mean|grad v|^2 dt.
    double energy_rhs() const { return T + 0.5 * mean_v2 + grad_integral; }
};

// Pre: spacing <= 1/4 (the UV scale must be resolved) and dt within the
// advective stability limit. Blow-up (non-finite or exploding energy) is
// reported as std::runtime_error.
ParabolicSolution solve_parabolic(const PeriodicFieldSlice& slice, double epsilon, Vec2 xi,
                                  double dt, double T, int ledger_stride = 1);

struct RepCheckConfig {
    double epsilon2 = 0.5;
    double L = 4.0;
    double T = 16.0;
    int grid_n = 512;
    double box_mult = 4.0; // box = box_mult * 2 pi L
    double dt = 0.02;
    int n_fields = 8;
    int n_paths = 4096;
    std::uint64_t seed = 1;
    int refine = 4;          // drift upsampling for the particle ensemble
    int ledger_points = 8;   // intermediate times for the monotonicity ledger
    nlohmann::json to_json() const;
};

struct RepCheckReport {
    RepCheckConfig config;
    // Headline numbers at T: lhs = mean over fields of (xi.(X_T - X_0))^2 / 2,
    // rhs = T + mean(v(T)^2)/2 + int mean|grad v|^2. SEs cluster over fields.
    double lhs = 0.0, lhs_se = 0.0;
    double rhs = 0.0, rhs_se = 0.0;
    double ratio = 0.0, ratio_se = 0.0;
    struct FieldRow {
        double lhs = 0.0, rhs = 0.0;
    };
    std::vector<FieldRow> fields;
    // Ledger at intermediate times (monotonicity of both sides).
    std::vector<double> times, lhs_t, rhs_t;
    nlohmann::json to_json() const;
};

// Quenched comparison: the SAME periodized field drives the PDE and the
// particle ensemble (drift -eps b, initial positions uniform on the torus),
// then both sides are averaged over field realizations.
RepCheckReport representation_identity_check(const RepCheckConfig& cfg);

} // namespace trl
