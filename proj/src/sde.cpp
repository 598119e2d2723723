#include "tracerlab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tracerlab/kernels.hpp"
#include "tracerlab/rng.hpp"
#include "tracerlab/sum.hpp"

namespace trl {

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}
} // namespace

void SimConfig::validate() const {
    if (!(epsilon2 >= 0.0)) throw std::invalid_argument("epsilon2 must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (dt > 0.1 + 1e-12)
        throw std::invalid_argument("dt must be <= 0.1: the UV correlation length is 1 and the "
                                    "drift field must be resolved (got dt=" +
                                    fmt(dt) + ")");
    if (n_paths < 1 || n_fields < 1)
        throw std::invalid_argument("n_paths and n_fields must be >= 1");
    if (record_times.empty()) throw std::invalid_argument("record_times must be non-empty");
    for (std::size_t i = 0; i < record_times.size(); ++i) {
        if (!(record_times[i] > 0.0))
            throw std::invalid_argument("record_times must be strictly positive");
        if (i > 0 && !(record_times[i] > record_times[i - 1]))
            throw std::invalid_argument("record_times must be strictly increasing");
    }
    if (record_times.back() > t_max + 1e-9)
        throw std::invalid_argument("t_max must cover the last record time (t_max=" + fmt(t_max) +
                                    ", last=" + fmt(record_times.back()) + ")");
    if (std::abs(xi.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("xi must be a unit vector");
    if (modes_per_octave < 1) throw std::invalid_argument("modes_per_octave must be >= 1");
    if (!(abort_radius > 0.0)) throw std::invalid_argument("abort_radius must be > 0");
}

std::vector<std::int64_t> SimConfig::record_steps() const {
    std::vector<std::int64_t> steps;
    steps.reserve(record_times.size());
    for (double t : record_times) {
        auto s = static_cast<std::int64_t>(std::llround(t / dt));
        if (s < 1)
            throw std::invalid_argument("record time " + fmt(t) + " is below one step at dt=" +
                                        fmt(dt));
        if (!steps.empty() && s <= steps.back())
            throw std::invalid_argument("record times " + fmt(record_times[steps.size() - 1]) +
                                        " and " + fmt(t) + " coincide on the dt=" + fmt(dt) +
                                        " step grid");
        steps.push_back(s);
    }
    return steps;
}

std::vector<double> SimConfig::snapped_times() const {
    std::vector<double> out;
    for (std::int64_t s : record_steps()) out.push_back(static_cast<double>(s) * dt);
    return out;
}

int SimConfig::total_modes() const {
    double octaves = band.log_width() / kLn2;
    return std::max(1, static_cast<int>(std::lround(modes_per_octave * octaves)));
}

nlohmann::json SimConfig::to_json() const {
    return nlohmann::json{
        {"epsilon2", epsilon2},
        {"band", {{"k_min", band.k_min}, {"k_max", band.k_max}, {"L", band.L()}}},
        {"dt", dt},
        {"t_max", t_max},
        {"n_paths", n_paths},
        {"n_fields", n_fields},
        {"seed", seed},
        {"record_times", record_times},
        {"xi", {xi.x, xi.y}},
        {"modes_per_octave", modes_per_octave},
        {"scheme", to_string(scheme)},
        {"abort_radius", abort_radius},
        {"max_abort_fraction", max_abort_fraction},
    };
}

EnsembleResult simulate_ensemble(const SimConfig& cfg) {
    cfg.validate();
    const auto rec_steps = cfg.record_steps();
    const std::size_t n_times = rec_steps.size();
    const std::int64_t n_steps = rec_steps.back();
    const double eps = std::sqrt(cfg.epsilon2);
    const double noise = std::sqrt(2.0 * cfg.dt);
    const double abort_r2 = cfg.abort_radius * cfg.abort_radius;
    const bool have_drift = cfg.epsilon2 > 0.0 && !cfg.band.empty();

    EnsembleResult out;
    out.times = cfg.snapped_times();
    out.field_msd_dir.assign(cfg.n_fields, std::vector<double>(n_times, 0.0));
    out.field_msd_total.assign(cfg.n_fields, std::vector<double>(n_times, 0.0));

    // Per-path stats within the current field; fields are processed in
    // order, so one scratch row suffices.
    std::vector<RunningStats> dir_stats(n_times), tot_stats(n_times);
    std::vector<double> path_dir(n_times), path_tot(n_times);
    std::vector<std::size_t> retained(cfg.n_fields, 0);
    // Pooled per-path spread, used for the standard error when there is only
    // one field (no cluster structure to exploit).
    std::vector<RunningStats> pooled_dir(n_times), pooled_tot(n_times);
    std::vector<double> realized_mass;

    std::int64_t aborted = 0;
    for (int f = 0; f < cfg.n_fields; ++f) {
        FieldRealization field;
        if (have_drift) {
            field = FieldRealization::sample(cfg.band, static_cast<std::size_t>(cfg.total_modes()),
                                             cfg.seed, cfg.scheme, static_cast<std::uint32_t>(f));
            realized_mass.push_back(field.manifest()["amplitude"]["realized_mass"].get<double>());
        }
        for (auto& s : dir_stats) s = RunningStats();
        for (auto& s : tot_stats) s = RunningStats();

        for (int p = 0; p < cfg.n_paths; ++p) {
            Rng rng(cfg.seed, stream_path(StreamTag::path_noise, static_cast<std::uint32_t>(f),
                                          static_cast<std::uint64_t>(p)));
            Vec2 X{0.0, 0.0};
            bool ok = true;
            std::size_t ri = 0;
            for (std::int64_t s = 1; s <= n_steps; ++s) {
                if (have_drift) {
                    Vec2 b = field.b(X);
                    X.x += eps * b.x * cfg.dt;
                    X.y += eps * b.y * cfg.dt;
                }
                X.x += noise * rng.gaussian();
                X.y += noise * rng.gaussian();
                double r2 = X.norm2();
                if (!std::isfinite(r2) || r2 > abort_r2) {
                    ok = false;
                    break;
                }
                if (ri < n_times && s == rec_steps[ri]) {
                    double d = cfg.xi.dot(X);
                    path_dir[ri] = d * d;
                    path_tot[ri] = r2;
                    ++ri;
                }
            }
            if (!ok) {
                ++aborted;
                continue;
            }
            ++retained[f];
            for (std::size_t i = 0; i < n_times; ++i) {
                dir_stats[i].add(path_dir[i]);
                tot_stats[i].add(path_tot[i]);
                pooled_dir[i].add(path_dir[i]);
                pooled_tot[i].add(path_tot[i]);
            }
        }
        for (std::size_t i = 0; i < n_times; ++i) {
            out.field_msd_dir[f][i] = dir_stats[i].mean();
            out.field_msd_total[f][i] = tot_stats[i].mean();
        }
    }

    const auto total_paths = static_cast<std::int64_t>(cfg.n_fields) * cfg.n_paths;
    out.aborted_paths = aborted;
    out.effective_samples = total_paths - aborted;
    if (static_cast<double>(aborted) > cfg.max_abort_fraction * static_cast<double>(total_paths))
        throw std::runtime_error("aborted path fraction " +
                                 fmt(static_cast<double>(aborted) / static_cast<double>(total_paths)) +
                                 " exceeds " + fmt(cfg.max_abort_fraction) +
                                 "; check dt against the drift amplitude");
    for (int f = 0; f < cfg.n_fields; ++f)
        if (retained[f] == 0)
            throw std::runtime_error("field " + std::to_string(f) + " retained no paths");

    out.msd_dir_mean.resize(n_times);
    out.msd_dir_se.resize(n_times);
    out.msd_total_mean.resize(n_times);
    out.msd_total_se.resize(n_times);
    for (std::size_t i = 0; i < n_times; ++i) {
        std::vector<double> col_dir(cfg.n_fields), col_tot(cfg.n_fields);
        for (int f = 0; f < cfg.n_fields; ++f) {
            col_dir[f] = out.field_msd_dir[f][i];
            col_tot[f] = out.field_msd_total[f][i];
        }
        out.msd_dir_mean[i] = mean_of(col_dir);
        out.msd_total_mean[i] = mean_of(col_tot);
        if (cfg.n_fields >= 2) {
            // Paths sharing a field are correlated through it; the field is
            // the independent unit, so the SE comes from field-level means.
            out.msd_dir_se[i] = stderr_of(col_dir);
            out.msd_total_se[i] = stderr_of(col_tot);
        } else {
            out.msd_dir_se[i] = pooled_dir[i].stderr_mean();
            out.msd_total_se[i] = pooled_tot[i].stderr_mean();
        }
    }

    out.manifest = nlohmann::json{
        {"config", cfg.to_json()},
        {"kernel", kernels::backend().name},
        {"workers", 1},
        {"steps", n_steps},
        {"aborted_paths", out.aborted_paths},
        {"effective_samples", out.effective_samples},
        {"field_realized_mass", realized_mass},
    };
    return out;
}

namespace {

double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
    const auto n = static_cast<double>(t.size());
    double mt = mean_of(t), my = mean_of(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxx += (t[i] - mt) * (t[i] - mt);
        sxy += (t[i] - mt) * (y[i] - my);
    }
    if (!(sxx > 0.0) || n < 2.0) throw std::invalid_argument("fit needs >= 2 distinct times");
    return sxy / sxx;
}

} // namespace

DiffusivityEstimate estimate_lambda(const EnsembleResult& ens, const SimConfig& cfg,
                                    const FitWindow& window) {
    if (!(window.t2 > window.t1))
        throw std::invalid_argument("fit window must have t2 > t1");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ens.times.size(); ++i)
        if (ens.times[i] >= window.t1 - 1e-9 && ens.times[i] <= window.t2 + 1e-9) idx.push_back(i);
    if (idx.size() < 2)
        throw std::invalid_argument("fit window [" + fmt(window.t1) + ", " + fmt(window.t2) +
                                    "] covers fewer than 2 record times");
    const auto n_fields = ens.field_msd_dir.size();
    if (n_fields < 2)
        throw std::invalid_argument("estimate_lambda needs >= 2 fields for the bootstrap");

    std::vector<double> t(idx.size()), y(idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        t[j] = ens.times[idx[j]];
        y[j] = ens.msd_dir_mean[idx[j]] / 2.0;
    }
    DiffusivityEstimate est;
    est.L = cfg.band.L();
    est.lambda_hat = fit_slope(t, y);
    est.t1 = t.front();
    est.t2 = t.back();
    est.points = static_cast<int>(idx.size());

    // Bootstrap over fields: paths within a field share its realization, so
    // the field is the resampling unit.
    int B = std::max(window.bootstrap, 16);
    Rng rng(cfg.seed, stream_index(StreamTag::mc_sample, 0xB0075u));
    RunningStats slopes;
    std::vector<double> yb(idx.size());
    for (int rep = 0; rep < B; ++rep) {
        std::fill(yb.begin(), yb.end(), 0.0);
        for (std::size_t f = 0; f < n_fields; ++f) {
            auto pick = static_cast<std::size_t>(rng.u01() * static_cast<double>(n_fields));
            if (pick >= n_fields) pick = n_fields - 1;
            for (std::size_t j = 0; j < idx.size(); ++j)
                yb[j] += ens.field_msd_dir[pick][idx[j]];
        }
        for (std::size_t j = 0; j < idx.size(); ++j)
            yb[j] /= 2.0 * static_cast<double>(n_fields);
        slopes.add(fit_slope(t, yb));
    }
    est.ci_half_width = 1.96 * std::sqrt(slopes.variance());

    double guard = est.L * est.L / (window.safety * std::max(est.lambda_hat, 1e-12));
    if (est.t2 > guard * (1.0 + 1e-9))
        throw std::invalid_argument(
            "fit window violates lambda*t << L^2: t2=" + fmt(est.t2) + " exceeds L^2/(safety*lambda_hat)=" +
            fmt(guard) + " (L=" + fmt(est.L) + ", lambda_hat=" + fmt(est.lambda_hat) +
            ", safety=" + fmt(window.safety) + ")");
    return est;
}

DiffusivityEstimate estimate_lambda(const SimConfig& cfg, const FitWindow& window) {
    return estimate_lambda(simulate_ensemble(cfg), cfg, window);
}

SuperdiffusionReport superdiffusion_experiment(const SimConfig& cfg, double band_safety) {
    cfg.validate();
    if (cfg.epsilon2 > 0.0) {
        // IR cutoff must be invisible over the horizon: L >> sqrt(lambda * t).
        double lam = std::sqrt(1.0 + 0.5 * cfg.epsilon2 * std::log(std::max(cfg.t_max, 1.0)));
        double need = band_safety * std::sqrt(cfg.t_max * lam);
        if (cfg.band.L() < need)
            throw std::invalid_argument("band too small for horizon: need L >= " + fmt(need) +
                                        " = safety*sqrt(t_max*lambda), got L=" + fmt(cfg.band.L()));
    }

    SuperdiffusionReport rep;
    rep.ensemble = simulate_ensemble(cfg);
    const auto& ens = rep.ensemble;
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < ens.times.size(); ++i) {
        SuperdiffusionRow row;
        row.t = ens.times[i];
        row.msd = ens.msd_dir_mean[i];
        row.se = ens.msd_dir_se[i];
        double lt = std::log(row.t);
        double denom = 2.0 * row.t * std::sqrt(1.0 + 0.5 * cfg.epsilon2 * lt);
        double denom_wrong = 2.0 * row.t * (1.0 + 0.5 * cfg.epsilon2 * lt);
        row.ratio = row.msd / denom;
        row.ratio_se = row.se / denom;
        row.wrong_ratio = row.msd / denom_wrong;
        if (i == 0 || row.ratio < lo) lo = row.ratio;
        if (i == 0 || row.ratio > hi) hi = row.ratio;
        rep.rows.push_back(row);
    }
    rep.flatness = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (rep.rows.size() >= 2 && rep.rows.front().wrong_ratio != 0.0)
        rep.wrong_drift = std::abs(rep.rows.back().wrong_ratio / rep.rows.front().wrong_ratio - 1.0);
    return rep;
}

} // namespace trl
