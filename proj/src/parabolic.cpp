#include "tracerlab/parabolic.hpp"

#include <cmath>
#include <stdexcept>

#include "tracerlab/fft_grid.hpp"
#include "tracerlab/rng.hpp"
#include "tracerlab/sum.hpp"

namespace trl {

namespace {

struct SpectralOps {
    int n;
    double dq;
    std::size_t cols;

    // Parseval reductions on the half layout: columns 0 and n/2 appear once,
    // interior columns stand for a conjugate pair.
    double mult(std::size_t c) const { return (c == 0 || c == static_cast<std::size_t>(n) / 2) ? 1.0 : 2.0; }

    double q1(std::size_t c) const { return dq * static_cast<double>(c); }
    double q2(std::size_t row) const {
        auto r = static_cast<int>(row);
        return dq * static_cast<double>(r <= n / 2 ? r : r - n);
    }

    double mean_square(const std::vector<std::complex<double>>& spec) const {
        Ksum s;
        for (std::size_t row = 0; row < static_cast<std::size_t>(n); ++row)
            for (std::size_t c = 0; c < cols; ++c)
                s.add(mult(c) * std::norm(spec[row * cols + c]));
        return s.value();
    }

    double mean_grad_square(const std::vector<std::complex<double>>& spec) const {
        Ksum s;
        for (std::size_t row = 0; row < static_cast<std::size_t>(n); ++row) {
            double qy = q2(row);
            for (std::size_t c = 0; c < cols; ++c) {
                double qx = q1(c);
                s.add(mult(c) * (qx * qx + qy * qy) * std::norm(spec[row * cols + c]));
            }
        }
        return s.value();
    }
};

} // namespace

ParabolicSolution solve_parabolic(const PeriodicFieldSlice& slice, double epsilon, Vec2 xi,
                                  double dt, double T, int ledger_stride) {
    if (!(slice.spacing() <= 0.25 + 1e-12))
        throw std::invalid_argument("solve_parabolic: grid spacing " +
                                    std::to_string(slice.spacing()) +
                                    " does not resolve the unit correlation scale (need <= 1/4)");
    if (!(dt > 0.0) || !(T >= dt)) throw std::invalid_argument("solve_parabolic: need 0 < dt <= T");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("solve_parabolic: epsilon >= 0");
    if (std::abs(xi.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("solve_parabolic: xi must be a unit vector");
    if (ledger_stride < 1) ledger_stride = 1;

    const int n = slice.grid_n;
    const int steps = static_cast<int>(std::ceil(T / dt - 1e-9));
    const double dt_eff = T / steps; // snap so the run ends exactly at T

    GridFft fft(n);
    SpectralOps ops{n, 2.0 * M_PI / slice.box, static_cast<std::size_t>(n / 2 + 1)};
    const std::size_t nspec = fft.spec_size(), nreal = fft.real_size();

    std::vector<std::complex<double>> vhat(nspec), work(nspec);
    std::vector<double> gx(nreal), gy(nreal), w(nreal);

    ParabolicSolution sol;
    sol.T = T;
    sol.dt = dt_eff;
    sol.epsilon = epsilon;
    sol.xi = xi;
    sol.steps = steps;

    Ksum grad_integral;
    double g_prev = 0.0; // mean |grad v|^2 at the previous step (zero state)
    sol.times.push_back(0.0);
    sol.ledger_v2.push_back(0.0);
    sol.ledger_grad_integral.push_back(0.0);

    for (int s = 0; s < steps; ++s) {
        // grad v of the current state, spectral derivatives.
        for (std::size_t row = 0; row < static_cast<std::size_t>(n); ++row)
            for (std::size_t c = 0; c < ops.cols; ++c)
                work[row * ops.cols + c] =
                    std::complex<double>(0.0, ops.q1(c)) * vhat[row * ops.cols + c];
        fft.backward(work.data(), gx.data());
        for (std::size_t row = 0; row < static_cast<std::size_t>(n); ++row)
            for (std::size_t c = 0; c < ops.cols; ++c)
                work[row * ops.cols + c] =
                    std::complex<double>(0.0, ops.q2(row)) * vhat[row * ops.cols + c];
        fft.backward(work.data(), gy.data());

        // advection -eps b . (xi + grad v), evaluated pointwise.
        for (std::size_t i = 0; i < nreal; ++i)
            w[i] = -epsilon * (slice.bx[i] * (xi.x + gx[i]) + slice.by[i] * (xi.y + gy[i]));
        fft.forward(w.data(), work.data());

        // implicit diffusion: (1 + dt q^2) v+ = v + dt N.
        for (std::size_t row = 0; row < static_cast<std::size_t>(n); ++row) {
            double qy = ops.q2(row);
            for (std::size_t c = 0; c < ops.cols; ++c) {
                double qx = ops.q1(c);
                std::size_t i = row * ops.cols + c;
                vhat[i] = (vhat[i] + dt_eff * work[i]) / (1.0 + dt_eff * (qx * qx + qy * qy));
            }
        }
        vhat[0] = 0.0; // pin the mean: div b = 0 conserves it at zero

        double g_new = ops.mean_grad_square(vhat);
        grad_integral.add(0.5 * dt_eff * (g_prev + g_new));
        g_prev = g_new;

        double v2 = ops.mean_square(vhat);
        if (!std::isfinite(v2) || v2 > 1e12)
            throw std::runtime_error("solve_parabolic: energy blow-up at t = " +
                                     std::to_string((s + 1) * dt_eff) +
                                     " (advective stability violated; reduce dt)");
        if ((s + 1) % ledger_stride == 0 || s + 1 == steps) {
            sol.times.push_back((s + 1) * dt_eff);
            sol.ledger_v2.push_back(v2);
            sol.ledger_grad_integral.push_back(grad_integral.value());
        }
    }

    sol.mean_v2 = sol.ledger_v2.back();
    sol.grad_integral = grad_integral.value();
    sol.v.resize(nreal);
    fft.backward(vhat.data(), sol.v.data());
    return sol;
}

nlohmann::json RepCheckConfig::to_json() const {
    return {{"epsilon2", epsilon2}, {"L", L},
            {"T", T},               {"grid_n", grid_n},
            {"box_mult", box_mult}, {"dt", dt},
            {"n_fields", n_fields}, {"n_paths", n_paths},
            {"seed", seed},         {"refine", refine},
            {"ledger_points", ledger_points}};
}

nlohmann::json RepCheckReport::to_json() const {
    nlohmann::json field_rows = nlohmann::json::array();
    for (const auto& f : fields) field_rows.push_back({{"lhs", f.lhs}, {"rhs", f.rhs}});
    return {{"config", config.to_json()},
            {"lhs", lhs},
            {"lhs_se", lhs_se},
            {"rhs", rhs},
            {"rhs_se", rhs_se},
            {"ratio", ratio},
            {"ratio_se", ratio_se},
            {"fields", field_rows},
            {"times", times},
            {"lhs_t", lhs_t},
            {"rhs_t", rhs_t}};
}

RepCheckReport representation_identity_check(const RepCheckConfig& cfg) {
    if (cfg.n_fields < 1 || cfg.n_paths < 2)
        throw std::invalid_argument("representation_identity_check: need >= 1 field, >= 2 paths");
    const double epsilon = std::sqrt(cfg.epsilon2);
    const Vec2 xi{1.0, 0.0};

    RepCheckReport rep;
    rep.config = cfg;

    std::vector<double> lhs_fields, rhs_fields;
    std::vector<std::vector<double>> lhs_t_fields, rhs_t_fields;
    std::vector<double> path_d2; // single-field fallback for SEs
    std::vector<double> times;

    for (int f = 0; f < cfg.n_fields; ++f) {
        PeriodicFieldSlice slice = PeriodicFieldSlice::sample(cfg.L, cfg.box_mult, cfg.grid_n,
                                                              cfg.seed,
                                                              static_cast<std::uint32_t>(f));
        int steps = static_cast<int>(std::ceil(cfg.T / cfg.dt - 1e-9));
        int stride = std::max(1, steps / std::max(1, cfg.ledger_points));
        ParabolicSolution sol = solve_parabolic(slice, epsilon, xi, cfg.dt, cfg.T, stride);
        rhs_fields.push_back(sol.energy_rhs());
        std::vector<double> rhs_t(sol.times.size());
        for (std::size_t i = 0; i < sol.times.size(); ++i)
            rhs_t[i] = sol.times[i] + 0.5 * sol.ledger_v2[i] + sol.ledger_grad_integral[i];
        rhs_t_fields.push_back(rhs_t);
        if (f == 0) times = sol.times;

        // Particle ensemble on the same field: drift -eps b pairs with the
        // advection sign of the PDE.
        SliceDriftSampler drift(slice, cfg.refine);
        const double dt_eff = sol.dt;
        const double root2dt = std::sqrt(2.0 * dt_eff);
        // Match displacement records to the PDE ledger times.
        std::vector<int> record_steps;
        for (double t : sol.times)
            record_steps.push_back(static_cast<int>(std::llround(t / dt_eff)));
        std::vector<Ksum> d2_at(record_steps.size());
        for (int p = 0; p < cfg.n_paths; ++p) {
            Rng noise(cfg.seed, stream_path(StreamTag::path_noise, static_cast<std::uint32_t>(f),
                                            static_cast<std::uint64_t>(p)));
            Rng pos(cfg.seed, stream_path(StreamTag::init_pos, static_cast<std::uint32_t>(f),
                                          static_cast<std::uint64_t>(p)));
            Vec2 x0{pos.u01() * slice.box, pos.u01() * slice.box};
            Vec2 x = x0;
            std::size_t rec = 0;
            if (record_steps[0] == 0) {
                d2_at[0].add(0.0);
                rec = 1;
            }
            for (int s = 0; s < steps; ++s) {
                Vec2 bv = drift.b(x);
                x += bv * (-epsilon * dt_eff);
                x += Vec2{noise.gaussian(), noise.gaussian()} * root2dt;
                if (rec < record_steps.size() && s + 1 == record_steps[rec]) {
                    double d = xi.dot(x - x0);
                    d2_at[rec].add(d * d);
                    if (cfg.n_fields == 1 && rec == record_steps.size() - 1)
                        path_d2.push_back(0.5 * d * d);
                    ++rec;
                }
            }
        }
        std::vector<double> lhs_t(record_steps.size());
        for (std::size_t i = 0; i < lhs_t.size(); ++i)
            lhs_t[i] = 0.5 * d2_at[i].value() / cfg.n_paths;
        lhs_t_fields.push_back(lhs_t);
        lhs_fields.push_back(lhs_t.back());
        rep.fields.push_back({lhs_fields.back(), rhs_fields.back()});
    }

    rep.lhs = mean_of(lhs_fields);
    rep.rhs = mean_of(rhs_fields);
    if (cfg.n_fields >= 2) {
        rep.lhs_se = stderr_of(lhs_fields);
        rep.rhs_se = stderr_of(rhs_fields);
    } else {
        rep.lhs_se = stderr_of(path_d2);
        rep.rhs_se = 0.0;
    }
    rep.ratio = rep.lhs / rep.rhs;
    if (cfg.n_fields >= 2) {
        // Linearized ratio error from the per-field pairs: residuals of
        // lhs_f - ratio * rhs_f capture the correlated (quenched) part.
        Ksum acc;
        for (int f = 0; f < cfg.n_fields; ++f) {
            double d = lhs_fields[static_cast<std::size_t>(f)] -
                       rep.ratio * rhs_fields[static_cast<std::size_t>(f)];
            acc.add(d * d);
        }
        double var = acc.value() / (cfg.n_fields * (cfg.n_fields - 1.0));
        rep.ratio_se = std::sqrt(var) / rep.rhs;
    } else {
        rep.ratio_se = rep.lhs_se / rep.rhs;
    }

    rep.times = times;
    rep.lhs_t.assign(times.size(), 0.0);
    rep.rhs_t.assign(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
        Ksum l, r;
        for (int f = 0; f < cfg.n_fields; ++f) {
            l.add(lhs_t_fields[static_cast<std::size_t>(f)][i]);
            r.add(rhs_t_fields[static_cast<std::size_t>(f)][i]);
        }
        rep.lhs_t[i] = l.value() / cfg.n_fields;
        rep.rhs_t[i] = r.value() / cfg.n_fields;
    }
    return rep;
}

} // namespace trl
