#pragma once

#include <vector>

#include "json.hpp"

namespace trl {

// Deterministic ladder lambda(L) over L = M^0, M^1, ..., M^n from the
// one-step update lambda_+ = lambda * (1 + eps2 lnM / (2 lambda^2)),
// lambda(1) = 1. The squared iterate gains exactly (eps2 lnM / (2 lambda))^2
// per rung on top of eps2 lnM, which is what certify_bounds exploits.
struct RenormState {
    double epsilon2 = 0.0;
    double M = 2.0;
    int steps = 0;

    struct Rung {
        double L = 1.0;
        double lambda_tilde = 1.0;
    };
    std::vector<Rung> ladder; // steps + 1 entries, ladder[j].L = M^j

    nlohmann::json to_json() const;
};

RenormState iterate_lambda(double epsilon2, double M, int n);

// Same update driven by measured variance increments instead of the closed
// form lnM per rung (diagnostic for the continuum-vs-discrete gap; the two
// ladders coincide when the increments equal lnM).
RenormState iterate_lambda_with_increments(double epsilon2, double M,
                                           const std::vector<double>& variance_increments);

struct BoundCertificate {
    double L = 1.0;
    // lambda^2 - (1 + eps2 ln L); non-negative at every rung.
    double lower_gap = 0.0;
    // S = sum_{j<n} eps2 lnM / (1 + j eps2 lnM) and its integral majorant
    // I = eps2 lnM + ln(1 + eps2 ln L); S <= I always.
    double sum_comparison = 0.0;
    double integral_comparison = 0.0;
    // Gap bounds: lower_gap <= upper_sum = eps2 lnM * S <= upper_integral =
    // eps2 lnM * I. upper_integral is the headline envelope.
    double upper_sum = 0.0;
    double upper_integral = 0.0;
    // | (lambda_+^2 - eps2 lnL_+) - (lambda^2 - eps2 lnL) - (eps2 lnM/(2 lambda))^2 |
    // for the step ending at this rung; pure rounding, ~1e-15 * lambda^2.
    double step_identity_defect = 0.0;
};

// Validates the certificate chain at every rung; a violation is an
// implementation bug, reported as std::logic_error.
std::vector<BoundCertificate> certify_bounds(const RenormState& state);

struct LadderComparisonRow {
    double L = 1.0;
    double lambda_hat = 1.0;    // simulated
    double lambda_tilde = 1.0;  // recursion rung
    double closed_form = 1.0;   // sqrt(1 + eps2 ln L)
    double hat_over_tilde = 1.0;
    double hat_over_closed = 1.0;
};

struct DiffusivityEstimate; // sde.hpp

// Table of simulated vs recursed vs closed-form diffusivity at matching L.
std::vector<LadderComparisonRow> compare_recursion_vs_simulation(
    const RenormState& state, const std::vector<DiffusivityEstimate>& estimates);

} // namespace trl
