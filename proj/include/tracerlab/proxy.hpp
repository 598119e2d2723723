#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "tracerlab/corrector.hpp"
#include "tracerlab/vec.hpp"

namespace trl {

// State of the proxy hierarchy at one point and one level: the corrector
// pair for both Cartesian directions, their gradients, and the accumulated
// field psi over all bands below this scale. An arbitrary direction xi is a
// linear combination of the two carried directions, so one sweep up the
// levels serves every xi at once; the naive per-direction recursion would
// fan out 2^level evaluations.
struct ProxyLevelState {
    int level = 0;
    double L = 1.0;      // M^level
    double lambda = 1.0; // ladder value at this scale
    double phi[2] = {0.0, 0.0};
    double sigma[2] = {0.0, 0.0};
    Vec2 grad_phi[2]{};
    Vec2 grad_sigma[2]{};
    double psi = 0.0; // sum of the increment fields up to this scale

    double phi_dir(Vec2 xi) const { return xi.x * phi[0] + xi.y * phi[1]; }
    double sigma_dir(Vec2 xi) const { return xi.x * sigma[0] + xi.y * sigma[1]; }
    Vec2 grad_phi_dir(Vec2 xi) const { return grad_phi[0] * xi.x + grad_phi[1] * xi.y; }
    Vec2 grad_sigma_dir(Vec2 xi) const { return grad_sigma[0] * xi.x + grad_sigma[1] * xi.y; }
};

// Corrector-equation defect f = a(xi + grad phi) - lambda xi - J grad sigma
// with a(w) = w + eps * psi * Jw, split into its three summands.
struct ErrorBreakdown {
    Vec2 flux;        // a(xi + grad phi)
    Vec2 lambda_term; // lambda * xi
    Vec2 sigma_term;  // J grad sigma
    Vec2 f;           // flux - lambda_term - sigma_term
};

// The full multiscale proxy: one spectral increment per level j over
// [M^-(j+1), M^-j] (independent RNG streams per level), the deterministic
// lambda ladder, and the recursion
//   phi+[d]  = phi[d]  + eps (phi'[d] + phi[i] d_i phi'[d])
//   sigma+[d]= sigma[d]+ eps (sigma'[d] + phi[i] psi' (delta_id + eps d_i phi'[d])
//                             + sigma[i] d_i phi'[d])
// with the matching chain-rule gradients. Immutable after construction;
// evaluation is pure.
class ProxyNode {
  public:
    int level() const { return level_; }
    double epsilon() const { return epsilon_; }
    double epsilon2() const { return epsilon_ * epsilon_; }
    double M() const { return M_; }
    std::uint64_t seed() const { return seed_; }
    int modes_per_octave() const { return modes_per_octave_; }
    std::uint32_t realization() const { return realization_; }
    // lambda at L = M^j for j = 0..level.
    const std::vector<double>& ladder() const { return ladder_; }
    // Increment j lives on [1/M^(j+1), 1/M^j]; 0 <= j < level.
    const IncrementalCorrector& increment(int j) const { return (*increments_)[j]; }
    // The sub-hierarchy one level down (shared increments, not a copy). Both
    // Cartesian directions of the recursion read the same child state.
    ProxyNode child() const;

    // States for levels 0..level at x; [0] is the zero base case.
    std::vector<ProxyLevelState> eval_levels(Vec2 x) const;
    ProxyLevelState eval(Vec2 x) const { return eval_levels(x).back(); }

    ErrorBreakdown error_field(Vec2 x, Vec2 xi) const;
    // Defect of the level-j state (uses the level-j lambda and psi).
    static ErrorBreakdown error_from_state(const ProxyLevelState& s, Vec2 xi, double epsilon);

    friend ProxyNode build_proxy(int level, double epsilon, double M, std::uint64_t seed,
                                 int modes_per_octave, std::uint32_t realization, int budget);

  private:
    int level_ = 0;
    double epsilon_ = 0.0, M_ = 2.0;
    std::uint64_t seed_ = 0;
    int modes_per_octave_ = 256;
    std::uint32_t realization_ = 0;
    std::vector<double> ladder_;
    std::shared_ptr<const std::vector<IncrementalCorrector>> increments_;
};

// Builds the hierarchy bottom-up. The level budget (default 7) bounds the
// per-point cost contract; exceeding it throws std::invalid_argument with a
// cost estimate rather than silently running long.
ProxyNode build_proxy(int level, double epsilon, double M, std::uint64_t seed,
                      int modes_per_octave = 256, std::uint32_t realization = 0, int budget = 7);

struct ProxyMomentRow {
    int level = 0;
    double L = 1.0;
    double lambda = 1.0;
    double phi_mean = 0.0, phi_mean_se = 0.0;     // centering, direction e1
    double sigma_mean = 0.0, sigma_mean_se = 0.0; // centering
    double phi2_norm = 0.0, phi2_norm_se = 0.0;   // lambda^2 E phi^2 / (eps^2 L^2)
    double phi4_norm = 0.0, phi4_norm_se = 0.0;   // lambda^4 E phi^4 / (eps^4 L^4)
    double joint2_norm = 0.0, joint2_norm_se = 0.0; // (lambda^2 E phi^2 + E sigma^2)/(eps^2 L^2)
    double stationarity_z = 0.0; // paired z of phi^2 between two fixed points
    bool pass = false;
};

struct ProxyMomentReport {
    std::vector<ProxyMomentRow> rows; // levels 1..n
    // Martingale orthogonality: z-scores of E[phi_j * (phi_k - phi_j)] for
    // j < k (increments above a scale are mean-free given that scale).
    struct OrthoRow {
        int level_lo = 0, level_hi = 0;
        double z = 0.0;
        bool pass = false;
    };
    std::vector<OrthoRow> orthogonality;
    // One constant per bound family, fitted on the smallest levels; rows
    // must not grow past it.
    double c_phi2 = 0.0, c_phi4 = 0.0, c_joint2 = 0.0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Monte Carlo moment checks over independent realizations of the hierarchy
// `node` was built from: centering, cross-scale orthogonality, normalized
// second/fourth moment boundedness, and stationarity (point independence).
ProxyMomentReport verify_proxy_moments(const ProxyNode& node, int mc_samples);

struct ErrorFieldRow {
    int level = 0;
    double L = 1.0;
    double lambda = 1.0;
    double fx_mean = 0.0, fx_se = 0.0; // E f (components) -> 0
    double fy_mean = 0.0, fy_se = 0.0;
    double f2_mean = 0.0, f2_se = 0.0; // E |f|^2
    double shape = 0.0;                // (eps^2 lnM)(1 + eps^2 lnM) lambda
    double normalized = 0.0;           // f2_mean / shape
    bool pass = false;
};

struct ErrorFieldReport {
    std::vector<ErrorFieldRow> rows; // levels 0..n
    double fitted_constant = 0.0;    // from the smallest nonzero levels
    bool pass = false;
    nlohmann::json to_json() const;
};

// Statistics of the corrector-equation defect f at every level: component
// means (centering) and E|f|^2 against the product shape above with a
// fitted constant that must not grow across levels.
ErrorFieldReport sample_error_field(const ProxyNode& node, Vec2 xi, int n_points, int mc_samples);

enum class TestRotation { identity, quarter, half };
Vec2 apply_rotation(TestRotation r, Vec2 v);
std::string to_string(TestRotation r);

struct IsotropyRow {
    std::string quantity;
    double base_mean = 0.0, base_se = 0.0; // statistic of the unrotated object
    double diff_mean = 0.0, diff_se = 0.0; // paired difference vs rotated
    double z = 0.0;
    bool pass = false;
};

struct IsotropyReport {
    std::string target; // "incremental" or "proxy"
    TestRotation rotation = TestRotation::identity;
    std::vector<IsotropyRow> rows;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Distributional-symmetry check: statistics of the direction-xi object at x
// are compared, realization-paired, against the direction-R*xi object at
// R*x. Exact equality for the identity; 3-sigma agreement for quarter and
// half turns (the sampling grid is invariant under both). The half-turn
// variant also checks the mixed moments E[d_i phi' d_j psi'] = 0.
IsotropyReport isotropy_transform_check(const IncrementalCorrector& c, TestRotation r,
                                        int mc_samples = 256, int n_points = 8);
IsotropyReport isotropy_transform_check(const ProxyNode& node, TestRotation r,
                                        int mc_samples = 128, int n_points = 8);

} // namespace trl
