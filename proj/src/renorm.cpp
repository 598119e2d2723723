#include "tracerlab/renorm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tracerlab/sde.hpp"

namespace trl {

nlohmann::json RenormState::to_json() const {
    nlohmann::json rungs = nlohmann::json::array();
    for (const auto& r : ladder) rungs.push_back({{"L", r.L}, {"lambda_tilde", r.lambda_tilde}});
    return nlohmann::json{{"epsilon2", epsilon2}, {"M", M}, {"steps", steps}, {"ladder", rungs}};
}

RenormState iterate_lambda_with_increments(double epsilon2, double M,
                                           const std::vector<double>& variance_increments) {
    if (!(M > 1.0)) throw std::invalid_argument("scale factor M must be > 1");
    if (!(epsilon2 >= 0.0)) throw std::invalid_argument("epsilon2 must be >= 0");
    RenormState st;
    st.epsilon2 = epsilon2;
    st.M = M;
    st.steps = static_cast<int>(variance_increments.size());
    double lambda = 1.0;
    double L = 1.0;
    st.ladder.push_back({L, lambda});
    for (double inc : variance_increments) {
        lambda = lambda * (1.0 + epsilon2 * inc / (2.0 * lambda * lambda));
        L *= M;
        st.ladder.push_back({L, lambda});
    }
    return st;
}

RenormState iterate_lambda(double epsilon2, double M, int n) {
    if (n < 0) throw std::invalid_argument("step count must be >= 0");
    if (!(M > 1.0)) throw std::invalid_argument("scale factor M must be > 1");
    return iterate_lambda_with_increments(epsilon2, M,
                                          std::vector<double>(static_cast<std::size_t>(n), std::log(M)));
}

std::vector<BoundCertificate> certify_bounds(const RenormState& st) {
    const double lnM = std::log(st.M);
    const double g = st.epsilon2 * lnM; // per-rung variance gain
    std::vector<BoundCertificate> out;
    double sum = 0.0; // S after j rungs
    for (std::size_t j = 0; j < st.ladder.size(); ++j) {
        const auto& rung = st.ladder[j];
        const double lnL = static_cast<double>(j) * lnM;
        BoundCertificate c;
        c.L = rung.L;
        const double l2 = rung.lambda_tilde * rung.lambda_tilde;
        c.lower_gap = l2 - (1.0 + st.epsilon2 * lnL);
        c.sum_comparison = sum;
        c.integral_comparison = g + std::log1p(st.epsilon2 * lnL);
        c.upper_sum = g * c.sum_comparison;
        c.upper_integral = g * c.integral_comparison;

        if (j > 0) {
            const auto& prev = st.ladder[j - 1];
            const double p2 = prev.lambda_tilde * prev.lambda_tilde;
            const double step = g / (2.0 * prev.lambda_tilde);
            // The squared iterate minus the accumulated variance is an exact
            // telescoping quantity; any defect here is rounding.
            c.step_identity_defect = std::abs((l2 - st.epsilon2 * lnL) -
                                              (p2 - st.epsilon2 * (lnL - lnM)) - step * step);
        }

        const double tol = 1e-12 * std::max(1.0, l2);
        if (c.lower_gap < -tol)
            throw std::logic_error("lambda ladder fell below its variance floor at L=" +
                                   std::to_string(rung.L));
        if (c.lower_gap > c.upper_sum + tol)
            throw std::logic_error("gap exceeds its sum-form envelope at L=" +
                                   std::to_string(rung.L));
        if (c.sum_comparison > c.integral_comparison + tol)
            throw std::logic_error("sum exceeds its integral majorant at L=" +
                                   std::to_string(rung.L));
        if (c.step_identity_defect > tol)
            throw std::logic_error("one-step identity defect beyond rounding at L=" +
                                   std::to_string(rung.L));
        out.push_back(c);

        sum += g / (1.0 + static_cast<double>(j) * g);
    }
    return out;
}

std::vector<LadderComparisonRow> compare_recursion_vs_simulation(
    const RenormState& st, const std::vector<DiffusivityEstimate>& estimates) {
    std::vector<LadderComparisonRow> rows;
    for (const auto& est : estimates) {
        const RenormState::Rung* match = nullptr;
        for (const auto& r : st.ladder)
            if (std::abs(std::log(r.L) - std::log(est.L)) < 1e-9) {
                match = &r;
                break;
            }
        if (!match)
            throw std::invalid_argument("no ladder rung at L=" + std::to_string(est.L) +
                                        "; grids must overlap");
        LadderComparisonRow row;
        row.L = est.L;
        row.lambda_hat = est.lambda_hat;
        row.lambda_tilde = match->lambda_tilde;
        row.closed_form = std::sqrt(1.0 + st.epsilon2 * std::log(est.L));
        row.hat_over_tilde = row.lambda_hat / row.lambda_tilde;
        row.hat_over_closed = row.lambda_hat / row.closed_form;
        rows.push_back(row);
    }
    return rows;
}

} // namespace trl
