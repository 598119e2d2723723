#include "tracerlab/proxy.hpp"

#include <cmath>
#include <stdexcept>

#include "tracerlab/renorm.hpp"
#include "tracerlab/rng.hpp"
#include "tracerlab/sum.hpp"

namespace trl {

namespace {

double comp(Vec2 v, int i) { return i == 0 ? v.x : v.y; }
Vec2 hess_row(const Sym2& h, int i) { return i == 0 ? Vec2{h.xx, h.xy} : Vec2{h.xy, h.yy}; }

} // namespace

ProxyNode build_proxy(int level, double epsilon, double M, std::uint64_t seed,
                      int modes_per_octave, std::uint32_t realization, int budget) {
    if (level < 0) throw std::invalid_argument("build_proxy: level must be >= 0");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("build_proxy: epsilon must be >= 0");
    if (!(M > 1.0)) throw std::invalid_argument("build_proxy: M must be > 1");
    if (level > budget) {
        auto modes = static_cast<long long>(
            std::max<long long>(1, std::llround(modes_per_octave * std::log(M) / std::log(2.0))));
        long long per_point = static_cast<long long>(level) * modes;
        throw std::invalid_argument(
            "build_proxy: level " + std::to_string(level) + " exceeds the budget " +
            std::to_string(budget) + "; one evaluation point costs ~" + std::to_string(per_point) +
            " weighted mode terms (~" + std::to_string(per_point * 10000) +
            " for a 1e4-sample moment run). Pass a larger budget to proceed.");
    }

    ProxyNode node;
    node.level_ = level;
    node.epsilon_ = epsilon;
    node.M_ = M;
    node.seed_ = seed;
    node.modes_per_octave_ = modes_per_octave;
    node.realization_ = realization;

    RenormState ladder = iterate_lambda(epsilon * epsilon, M, level);
    node.ladder_.reserve(ladder.ladder.size());
    for (const auto& rung : ladder.ladder) node.ladder_.push_back(rung.lambda_tilde);

    auto incs = std::make_shared<std::vector<IncrementalCorrector>>();
    incs->reserve(static_cast<std::size_t>(level));
    for (int j = 0; j < level; ++j) {
        double Lj = std::pow(M, j);
        incs->push_back(build_incremental(Lj, M, node.ladder_[static_cast<std::size_t>(j)],
                                          {1.0, 0.0}, seed, modes_per_octave, realization, j));
    }
    node.increments_ = std::move(incs);
    return node;
}

ProxyNode ProxyNode::child() const {
    if (level_ == 0) throw std::logic_error("ProxyNode::child: level-0 node has no child");
    ProxyNode c = *this;
    c.level_ = level_ - 1;
    c.ladder_.resize(static_cast<std::size_t>(level_));
    return c;
}

std::vector<ProxyLevelState> ProxyNode::eval_levels(Vec2 x) const {
    std::vector<ProxyLevelState> states(static_cast<std::size_t>(level_) + 1);
    states[0].level = 0;
    states[0].L = 1.0;
    states[0].lambda = ladder_.empty() ? 1.0 : ladder_[0];

    const double eps = epsilon_;
    for (int j = 0; j < level_; ++j) {
        const ProxyLevelState& s = states[static_cast<std::size_t>(j)];
        ProxyLevelState& n = states[static_cast<std::size_t>(j) + 1];
        IncrementalCorrector::Eval e = (*increments_)[static_cast<std::size_t>(j)].eval(x);

        for (int d = 0; d < 2; ++d) {
            double dphi = e.phi[d];
            Vec2 dgrad = e.grad_phi[d];
            double dsig = e.sigma[d];
            Vec2 dgsig = e.grad_sigma[d];
            for (int i = 0; i < 2; ++i) {
                double di_phi = comp(e.grad_phi[d], i); // d_i phi'[d]
                Vec2 di_grad = hess_row(e.hess_phi[d], i);
                double delta = (i == d) ? 1.0 : 0.0;
                double gate = delta + eps * di_phi; // d_i of (x_d + eps phi'[d])

                dphi += s.phi[i] * di_phi;
                dgrad += s.grad_phi[i] * di_phi + s.phi[i] * di_grad;
                dsig += s.phi[i] * e.psi * gate + s.sigma[i] * di_phi;
                dgsig += (s.grad_phi[i] * e.psi + s.phi[i] * e.grad_psi) * gate +
                         s.phi[i] * e.psi * eps * di_grad + s.grad_sigma[i] * di_phi +
                         s.sigma[i] * di_grad;
            }
            n.phi[d] = s.phi[d] + eps * dphi;
            n.grad_phi[d] = s.grad_phi[d] + eps * dgrad;
            n.sigma[d] = s.sigma[d] + eps * dsig;
            n.grad_sigma[d] = s.grad_sigma[d] + eps * dgsig;
        }
        n.level = j + 1;
        n.L = std::pow(M_, j + 1);
        n.lambda = ladder_[static_cast<std::size_t>(j) + 1];
        n.psi = s.psi + e.psi;
    }
    return states;
}

ErrorBreakdown ProxyNode::error_from_state(const ProxyLevelState& s, Vec2 xi, double epsilon) {
    ErrorBreakdown b;
    Vec2 w = xi + s.grad_phi_dir(xi);
    b.flux = w + epsilon * s.psi * rot90(w);
    b.lambda_term = s.lambda * xi;
    b.sigma_term = rot90(s.grad_sigma_dir(xi));
    b.f = b.flux - b.lambda_term - b.sigma_term;
    return b;
}

ErrorBreakdown ProxyNode::error_field(Vec2 x, Vec2 xi) const {
    return error_from_state(eval(x), xi, epsilon_);
}

namespace {

ProxyNode sibling(const ProxyNode& node, std::uint32_t realization) {
    return build_proxy(node.level(), node.epsilon(), node.M(), node.seed(),
                       node.modes_per_octave(), realization, node.level());
}

} // namespace

nlohmann::json ProxyMomentReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"level", r.level},
                             {"L", r.L},
                             {"lambda", r.lambda},
                             {"phi_mean", r.phi_mean},
                             {"phi_mean_se", r.phi_mean_se},
                             {"sigma_mean", r.sigma_mean},
                             {"sigma_mean_se", r.sigma_mean_se},
                             {"phi2_norm", r.phi2_norm},
                             {"phi2_norm_se", r.phi2_norm_se},
                             {"phi4_norm", r.phi4_norm},
                             {"phi4_norm_se", r.phi4_norm_se},
                             {"joint2_norm", r.joint2_norm},
                             {"joint2_norm_se", r.joint2_norm_se},
                             {"stationarity_z", r.stationarity_z},
                             {"pass", r.pass}});
    }
    nlohmann::json ortho_json = nlohmann::json::array();
    for (const auto& o : orthogonality)
        ortho_json.push_back(
            {{"level_lo", o.level_lo}, {"level_hi", o.level_hi}, {"z", o.z}, {"pass", o.pass}});
    return {{"rows", rows_json},
            {"orthogonality", ortho_json},
            {"c_phi2", c_phi2},
            {"c_phi4", c_phi4},
            {"c_joint2", c_joint2},
            {"pass", pass}};
}

ProxyMomentReport verify_proxy_moments(const ProxyNode& node, int mc_samples) {
    if (mc_samples < 16) throw std::invalid_argument("verify_proxy_moments: mc_samples >= 16");
    const int n = node.level();
    const double eps2 = node.epsilon2();

    // Two fixed evaluation points; stationarity says their statistics agree.
    const double Ln = std::pow(node.M(), n);
    const Vec2 x0{0.0, 0.0};
    const Vec2 x1{0.37 * Ln, -0.81 * Ln};

    std::vector<RunningStats> phi_mean(n + 1), sigma_mean(n + 1), phi2(n + 1), phi4(n + 1),
        joint2(n + 1), point_diff(n + 1);
    // ortho[j][k]: E phi_j * (phi_k - phi_j), j < k.
    std::vector<std::vector<RunningStats>> ortho(n + 1, std::vector<RunningStats>(n + 1));

    for (int r = 0; r < mc_samples; ++r) {
        ProxyNode sib = sibling(node, static_cast<std::uint32_t>(r));
        auto st0 = sib.eval_levels(x0);
        auto st1 = sib.eval_levels(x1);
        for (int j = 1; j <= n; ++j) {
            const auto& s = st0[static_cast<std::size_t>(j)];
            double lam2 = s.lambda * s.lambda;
            double den2 = std::max(eps2 * s.L * s.L, 1e-300);
            double p2 = lam2 * s.phi[0] * s.phi[0];
            phi_mean[j].add(s.phi[0]);
            sigma_mean[j].add(s.sigma[0]);
            phi2[j].add(p2 / den2);
            phi4[j].add(lam2 * lam2 * s.phi[0] * s.phi[0] * s.phi[0] * s.phi[0] /
                        std::max(den2 * den2, 1e-300));
            joint2[j].add((p2 + s.sigma[0] * s.sigma[0]) / den2);
            const auto& t = st1[static_cast<std::size_t>(j)];
            point_diff[j].add((p2 - lam2 * t.phi[0] * t.phi[0]) / den2);
            for (int k = j + 1; k <= n; ++k)
                ortho[j][k].add(s.phi[0] * (st0[static_cast<std::size_t>(k)].phi[0] - s.phi[0]));
        }
    }

    ProxyMomentReport rep;
    rep.pass = true;

    // Fit each bound constant on the smallest levels, then require no growth.
    int jref = std::min(2, n);
    for (int j = 1; j <= jref; ++j) {
        rep.c_phi2 = std::max(rep.c_phi2, phi2[j].mean() + 3.0 * phi2[j].stderr_mean());
        rep.c_phi4 = std::max(rep.c_phi4, phi4[j].mean() + 3.0 * phi4[j].stderr_mean());
        rep.c_joint2 = std::max(rep.c_joint2, joint2[j].mean() + 3.0 * joint2[j].stderr_mean());
    }

    for (int j = 1; j <= n; ++j) {
        ProxyMomentRow row;
        row.level = j;
        row.L = std::pow(node.M(), j);
        row.lambda = node.ladder()[static_cast<std::size_t>(j)];
        row.phi_mean = phi_mean[j].mean();
        row.phi_mean_se = phi_mean[j].stderr_mean();
        row.sigma_mean = sigma_mean[j].mean();
        row.sigma_mean_se = sigma_mean[j].stderr_mean();
        row.phi2_norm = phi2[j].mean();
        row.phi2_norm_se = phi2[j].stderr_mean();
        row.phi4_norm = phi4[j].mean();
        row.phi4_norm_se = phi4[j].stderr_mean();
        row.joint2_norm = joint2[j].mean();
        row.joint2_norm_se = joint2[j].stderr_mean();
        row.stationarity_z = std::abs(point_diff[j].mean()) /
                             std::max(point_diff[j].stderr_mean(), 1e-300);

        bool centered = std::abs(row.phi_mean) <= 3.0 * row.phi_mean_se + 1e-12 &&
                        std::abs(row.sigma_mean) <= 3.0 * row.sigma_mean_se + 1e-12;
        bool bounded = row.phi2_norm - 3.0 * row.phi2_norm_se <= rep.c_phi2 &&
                       row.phi4_norm - 3.0 * row.phi4_norm_se <= rep.c_phi4 &&
                       row.joint2_norm - 3.0 * row.joint2_norm_se <= rep.c_joint2;
        bool stationary = row.stationarity_z <= 3.0 || point_diff[j].stderr_mean() == 0.0;
        row.pass = centered && bounded && stationary;
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }

    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) {
            ProxyMomentReport::OrthoRow o;
            o.level_lo = j;
            o.level_hi = k;
            o.z = std::abs(ortho[j][k].mean()) / std::max(ortho[j][k].stderr_mean(), 1e-300);
            o.pass = o.z <= 3.0 || ortho[j][k].stderr_mean() == 0.0;
            rep.pass = rep.pass && o.pass;
            rep.orthogonality.push_back(o);
        }
    return rep;
}

nlohmann::json ErrorFieldReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"level", r.level},
                             {"L", r.L},
                             {"lambda", r.lambda},
                             {"fx_mean", r.fx_mean},
                             {"fx_se", r.fx_se},
                             {"fy_mean", r.fy_mean},
                             {"fy_se", r.fy_se},
                             {"f2_mean", r.f2_mean},
                             {"f2_se", r.f2_se},
                             {"shape", r.shape},
                             {"normalized", r.normalized},
                             {"pass", r.pass}});
    }
    return {{"rows", rows_json}, {"fitted_constant", fitted_constant}, {"pass", pass}};
}

ErrorFieldReport sample_error_field(const ProxyNode& node, Vec2 xi, int n_points, int mc_samples) {
    if (mc_samples < 16) throw std::invalid_argument("sample_error_field: mc_samples >= 16");
    if (n_points < 1) throw std::invalid_argument("sample_error_field: n_points >= 1");
    if (std::abs(xi.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("sample_error_field: xi must be a unit vector");

    const int n = node.level();
    const double eps2 = node.epsilon2();
    const double lnM = std::log(node.M());
    const double g = eps2 * lnM;

    // Fixed point set shared by all realizations (stationarity).
    std::vector<Vec2> pts(static_cast<std::size_t>(n_points));
    Rng prng(node.seed(), stream_index(StreamTag::scratch, 0xE22F1Eu));
    double Ln = std::pow(node.M(), n);
    for (auto& p : pts) p = {(prng.u01() * 2.0 - 1.0) * Ln, (prng.u01() * 2.0 - 1.0) * Ln};

    std::vector<RunningStats> fx(n + 1), fy(n + 1), f2(n + 1);
    for (int r = 0; r < mc_samples; ++r) {
        ProxyNode sib = sibling(node, static_cast<std::uint32_t>(r));
        std::vector<Ksum> sx(n + 1), sy(n + 1), s2(n + 1);
        for (const Vec2& p : pts) {
            auto states = sib.eval_levels(p);
            for (int j = 0; j <= n; ++j) {
                ErrorBreakdown b =
                    ProxyNode::error_from_state(states[static_cast<std::size_t>(j)], xi,
                                                node.epsilon());
                sx[j].add(b.f.x);
                sy[j].add(b.f.y);
                s2[j].add(b.f.norm2());
            }
        }
        // Cluster by realization: points inside one field are correlated.
        for (int j = 0; j <= n; ++j) {
            fx[j].add(sx[j].value() / n_points);
            fy[j].add(sy[j].value() / n_points);
            f2[j].add(s2[j].value() / n_points);
        }
    }

    ErrorFieldReport rep;
    rep.pass = true;
    std::vector<double> shape(n + 1), normalized(n + 1);
    for (int j = 0; j <= n; ++j) {
        double lambda = node.ladder()[static_cast<std::size_t>(j)];
        shape[j] = g * (1.0 + g) * lambda;
        normalized[j] = shape[j] > 0.0 ? f2[j].mean() / shape[j] : f2[j].mean();
    }
    int jref = std::min(2, std::max(1, n));
    for (int j = 1; j <= jref && j <= n; ++j)
        rep.fitted_constant =
            std::max(rep.fitted_constant,
                     normalized[j] + (shape[j] > 0.0 ? 3.0 * f2[j].stderr_mean() / shape[j] : 0.0));

    for (int j = 0; j <= n; ++j) {
        ErrorFieldRow row;
        row.level = j;
        row.L = std::pow(node.M(), j);
        row.lambda = node.ladder()[static_cast<std::size_t>(j)];
        row.fx_mean = fx[j].mean();
        row.fx_se = fx[j].stderr_mean();
        row.fy_mean = fy[j].mean();
        row.fy_se = fy[j].stderr_mean();
        row.f2_mean = f2[j].mean();
        row.f2_se = f2[j].stderr_mean();
        row.shape = shape[j];
        row.normalized = normalized[j];

        if (j == 0 || eps2 == 0.0) {
            // Exact zero cases: level 0 and epsilon = 0.
            row.pass = row.f2_mean == 0.0 && row.fx_mean == 0.0 && row.fy_mean == 0.0;
        } else {
            // The mean-zero property of f holds up to higher-order
            // remainders; allow a small fraction of the fluctuation scale on
            // top of 3 sigma.
            double slack = 0.01 * std::sqrt(std::max(row.f2_mean, 0.0));
            bool centered = std::abs(row.fx_mean) <= 3.0 * row.fx_se + slack &&
                            std::abs(row.fy_mean) <= 3.0 * row.fy_se + slack;
            bool bounded = row.normalized - (row.shape > 0.0 ? 3.0 * row.f2_se / row.shape : 0.0) <=
                           rep.fitted_constant;
            row.pass = centered && bounded;
        }
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }
    return rep;
}

Vec2 apply_rotation(TestRotation r, Vec2 v) {
    switch (r) {
    case TestRotation::identity: return v;
    case TestRotation::quarter: return rot90(v);
    case TestRotation::half: return -v;
    }
    return v;
}

std::string to_string(TestRotation r) {
    switch (r) {
    case TestRotation::identity: return "identity";
    case TestRotation::quarter: return "quarter";
    case TestRotation::half: return "half";
    }
    return "?";
}

nlohmann::json IsotropyReport::to_json() const {
    nlohmann::json rows_json = nlohmann::json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"quantity", r.quantity},
                             {"base_mean", r.base_mean},
                             {"base_se", r.base_se},
                             {"diff_mean", r.diff_mean},
                             {"diff_se", r.diff_se},
                             {"z", r.z},
                             {"pass", r.pass}});
    }
    return {{"target", target}, {"rotation", to_string(rotation)}, {"rows", rows_json},
            {"pass", pass}};
}

namespace {

// Shared paired-statistics machinery: per realization, quantities evaluated
// with direction xi0 at points x are matched against direction R*xi0 at R*x.
// The quantity list is a fixed set of first/second moments.
struct PairedAccum {
    std::vector<std::string> names;
    std::vector<RunningStats> base, diff;

    explicit PairedAccum(std::vector<std::string> n)
        : names(std::move(n)), base(names.size()), diff(names.size()) {}

    void add(const std::vector<double>& a, const std::vector<double>& b) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            base[i].add(a[i]);
            diff[i].add(a[i] - b[i]);
        }
    }

    IsotropyReport finish(const std::string& target, TestRotation rot,
                          const std::vector<bool>& zero_mean_row) const {
        IsotropyReport rep;
        rep.target = target;
        rep.rotation = rot;
        rep.pass = true;
        for (std::size_t i = 0; i < names.size(); ++i) {
            IsotropyRow row;
            row.quantity = names[i];
            row.base_mean = base[i].mean();
            row.base_se = base[i].stderr_mean();
            row.diff_mean = diff[i].mean();
            row.diff_se = diff[i].stderr_mean();
            row.z = std::abs(row.diff_mean) / std::max(row.diff_se, 1e-300);
            row.pass = row.diff_se == 0.0 ? row.diff_mean == 0.0 : row.z <= 3.0;
            if (zero_mean_row[i])
                row.pass = row.pass &&
                           std::abs(row.base_mean) <= 3.0 * row.base_se + 1e-12;
            rep.pass = rep.pass && row.pass;
            rep.rows.push_back(row);
        }
        return rep;
    }
};

std::vector<Vec2> isotropy_points(std::uint64_t seed, int n_points, double scale) {
    std::vector<Vec2> pts(static_cast<std::size_t>(n_points));
    Rng rng(seed, stream_index(StreamTag::scratch, 0x150D0Du));
    for (auto& p : pts)
        p = {(rng.u01() * 2.0 - 1.0) * scale, (rng.u01() * 2.0 - 1.0) * scale};
    return pts;
}

} // namespace

IsotropyReport isotropy_transform_check(const IncrementalCorrector& c, TestRotation rot,
                                        int mc_samples, int n_points) {
    const Vec2 xi0{1.0, 0.0};
    const Vec2 xi_r = apply_rotation(rot, xi0);
    auto pts = isotropy_points(c.seed(), n_points, 2.0 * c.M() * c.L());

    std::vector<std::string> names = {"phi_first",  "sigma_first", "phi_second",
                                      "sigma_second", "grad_phi_energy", "psi_second"};
    std::vector<bool> zero_mean = {true, true, false, false, false, false};
    if (rot == TestRotation::half) {
        // Mixed moments E[d_i phi' d_j psi']; the half-turn sign structure
        // forces all four to vanish.
        for (const char* nm : {"mixed_xx", "mixed_xy", "mixed_yx", "mixed_yy"}) names.push_back(nm);
        for (int i = 0; i < 4; ++i) zero_mean.push_back(true);
    }
    PairedAccum acc(names);

    std::vector<double> a(names.size()), b(names.size());
    for (int r = 0; r < mc_samples; ++r) {
        IncrementalCorrector sib = build_incremental(c.L(), c.M(), c.lambda_tilde(), xi0, c.seed(),
                                                     c.modes_per_octave(),
                                                     static_cast<std::uint32_t>(r), c.level());
        std::vector<Ksum> sa(names.size()), sb(names.size());
        for (const Vec2& p : pts) {
            auto ea = sib.eval(p);
            auto eb = sib.eval(apply_rotation(rot, p));
            double vals_a[6] = {ea.phi_dir(xi0),
                                ea.sigma_dir(xi0),
                                ea.phi_dir(xi0) * ea.phi_dir(xi0),
                                ea.sigma_dir(xi0) * ea.sigma_dir(xi0),
                                ea.grad_phi_dir(xi0).norm2(),
                                ea.psi * ea.psi};
            double vals_b[6] = {eb.phi_dir(xi_r),
                                eb.sigma_dir(xi_r),
                                eb.phi_dir(xi_r) * eb.phi_dir(xi_r),
                                eb.sigma_dir(xi_r) * eb.sigma_dir(xi_r),
                                eb.grad_phi_dir(xi_r).norm2(),
                                eb.psi * eb.psi};
            for (int i = 0; i < 6; ++i) {
                sa[static_cast<std::size_t>(i)].add(vals_a[i]);
                sb[static_cast<std::size_t>(i)].add(vals_b[i]);
            }
            if (rot == TestRotation::half) {
                Vec2 gp = ea.grad_phi_dir(xi0), gs = ea.grad_psi;
                double mixed[4] = {gp.x * gs.x, gp.x * gs.y, gp.y * gs.x, gp.y * gs.y};
                for (int i = 0; i < 4; ++i) {
                    sa[static_cast<std::size_t>(6 + i)].add(mixed[i]);
                    sb[static_cast<std::size_t>(6 + i)].add(0.0);
                }
            }
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            a[i] = sa[i].value() / n_points;
            b[i] = sb[i].value() / n_points;
        }
        acc.add(a, b);
    }
    return acc.finish("incremental", rot, zero_mean);
}

IsotropyReport isotropy_transform_check(const ProxyNode& node, TestRotation rot, int mc_samples,
                                        int n_points) {
    const Vec2 xi0{1.0, 0.0};
    const Vec2 xi_r = apply_rotation(rot, xi0);
    auto pts = isotropy_points(node.seed(), n_points, 2.0 * std::pow(node.M(), node.level()));

    std::vector<std::string> names = {"phi_first", "sigma_first", "phi_second", "sigma_second",
                                      "grad_phi_energy"};
    std::vector<bool> zero_mean = {true, true, false, false, false};
    PairedAccum acc(names);

    std::vector<double> a(names.size()), b(names.size());
    for (int r = 0; r < mc_samples; ++r) {
        ProxyNode sib = sibling(node, static_cast<std::uint32_t>(r));
        std::vector<Ksum> sa(names.size()), sb(names.size());
        for (const Vec2& p : pts) {
            auto ea = sib.eval(p);
            auto eb = sib.eval(apply_rotation(rot, p));
            double vals_a[5] = {ea.phi_dir(xi0), ea.sigma_dir(xi0),
                                ea.phi_dir(xi0) * ea.phi_dir(xi0),
                                ea.sigma_dir(xi0) * ea.sigma_dir(xi0),
                                ea.grad_phi_dir(xi0).norm2()};
            double vals_b[5] = {eb.phi_dir(xi_r), eb.sigma_dir(xi_r),
                                eb.phi_dir(xi_r) * eb.phi_dir(xi_r),
                                eb.sigma_dir(xi_r) * eb.sigma_dir(xi_r),
                                eb.grad_phi_dir(xi_r).norm2()};
            for (int i = 0; i < 5; ++i) {
                sa[static_cast<std::size_t>(i)].add(vals_a[i]);
                sb[static_cast<std::size_t>(i)].add(vals_b[i]);
            }
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            a[i] = sa[i].value() / n_points;
            b[i] = sb[i].value() / n_points;
        }
        acc.add(a, b);
    }
    return acc.finish("proxy", rot, zero_mean);
}

} // namespace trl
