// tracerlab: spectral tracer-diffusion laboratory.
//
// Exit codes: 0 success, 1 failed acceptance checks (or unexpected runtime
// error, reported), 2 configuration or schema violation, 3 I/O failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tracerlab/band.hpp"
#include "tracerlab/config.hpp"
#include "tracerlab/corrector.hpp"
#include "tracerlab/manifest.hpp"
#include "tracerlab/parabolic.hpp"
#include "tracerlab/proxy.hpp"
#include "tracerlab/quadrature.hpp"
#include "tracerlab/renorm.hpp"
#include "tracerlab/rg_ode.hpp"
#include "tracerlab/sde.hpp"
#include "tracerlab/suites.hpp"
#include "tracerlab/svg.hpp"

namespace fs = std::filesystem;
using namespace trl;

namespace {

std::string default_out_root() {
    const char* env = std::getenv("TRACERLAB_OUT");
    return (env && *env) ? env : "out";
}

std::vector<double> log_spaced(double a, double b, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(a * std::pow(b / a, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
    return out;
}

struct SimulateArgs {
    double epsilon2 = 0.5, scale_L = 100.0, dt = 0.05, t_max = 50.0, t_min = 0.0;
    int paths = 1024, fields = 4, n_times = 16, modes_per_octave = 128;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
    SimConfig sc;
    sc.epsilon2 = a.epsilon2;
    sc.band = SpectralBand::from_L(a.scale_L);
    sc.dt = a.dt;
    sc.t_max = a.t_max;
    sc.n_paths = a.paths;
    sc.n_fields = a.fields;
    sc.seed = a.seed;
    sc.modes_per_octave = a.modes_per_octave;
    double t_min = a.t_min > 0 ? a.t_min : std::max(a.t_max / 50.0, 2.0 * a.dt);
    sc.record_times = log_spaced(t_min, a.t_max, a.n_times);
    sc.validate();

    EnsembleResult ens = simulate_ensemble(sc);

    RunManifest man;
    man.suite = "simulate";
    man.preset = "cli";
    man.master_seed = a.seed;
    ConfigFile echo;
    echo.set("meta", "schema_version", std::int64_t{1});
    echo.set("meta", "suite", "simulate");
    echo.set("meta", "seed", a.seed);
    echo.set("params", "epsilon2", a.epsilon2);
    echo.set("params", "scale_L", a.scale_L);
    echo.set("params", "dt", a.dt);
    echo.set("params", "t_max", a.t_max);
    echo.set("params", "paths", std::int64_t{a.paths});
    echo.set("params", "fields", std::int64_t{a.fields});
    echo.set("params", "modes_per_octave", std::int64_t{a.modes_per_octave});
    man.config_echo = echo.serialize();

    std::vector<std::vector<double>> msd_rows, ratio_rows;
    bool all_ratio = true;
    for (std::size_t i = 0; i < ens.times.size(); ++i) {
        double t = ens.times[i];
        double arg = 1.0 + 0.5 * sc.epsilon2 * std::log(t);
        double ratio = 0.0, ratio_se = 0.0, wrong = 0.0;
        if (t > 0 && arg > 0) {
            ratio = ens.msd_dir_mean[i] / (2.0 * t * std::sqrt(arg));
            ratio_se = ens.msd_dir_se[i] / (2.0 * t * std::sqrt(arg));
            wrong = ens.msd_dir_mean[i] / (2.0 * t * arg);
        } else {
            all_ratio = false;
        }
        msd_rows.push_back(
            {t, ens.msd_dir_mean[i], ens.msd_dir_se[i], ens.msd_total_mean[i], ratio, ratio_se});
        ratio_rows.push_back({t, ratio, ratio_se, wrong});
    }
    nlohmann::json msd_table = make_table(
        {"t", "msd_dir_mean", "msd_dir_se", "msd_total_mean", "ratio", "ratio_se"}, msd_rows);
    man.tables["msd"] = msd_table;
    if (all_ratio)
        man.tables["msd_ratio"] = make_table({"t", "ratio", "ratio_se", "wrong_ratio"}, ratio_rows);
    man.metrics["epsilon2"] = sc.epsilon2;
    man.metrics["L"] = sc.band.L();
    man.metrics["field"] = ens.manifest;
    man.metrics["effective_samples"] = ens.effective_samples;
    man.metrics["aborted_paths"] = ens.aborted_paths;

    man.outputs.push_back(write_output(a.out, "msd.csv", csv_from_table(msd_table)));
    auto plots = emit_plots(man, a.out);
    man.outputs.insert(man.outputs.end(), plots.begin(), plots.end());
    save_manifest(man, a.out, a.out);
    std::cout << "wrote " << (fs::path(a.out) / "msd.csv").string() << " and manifest.json\n";
    return 0;
}

int cmd_renorm(double epsilon2, double M, int steps, const std::string& out) {
    RenormState st = iterate_lambda(epsilon2, M, steps);
    auto certs = certify_bounds(st);
    std::string csv = "j,L,lambda_tilde,lambda2,one_plus_eps2_lnL,lower_gap,upper_integral\n";
    for (std::size_t j = 0; j < st.ladder.size(); ++j) {
        double L = st.ladder[j].L, lt = st.ladder[j].lambda_tilde;
        double x = 1.0 + epsilon2 * std::log(L);
        double gap = j > 0 ? certs[j - 1].lower_gap : 0.0;
        double env = j > 0 ? certs[j - 1].upper_integral : 0.0;
        csv += std::to_string(j) + "," + format_double(L) + "," + format_double(lt) + "," +
               format_double(lt * lt) + "," + format_double(x) + "," + format_double(gap) + "," +
               format_double(env) + "\n";
    }
    write_text_atomic(out, csv);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_rg_ode(double z0, double span, const std::string& out) {
    RgTrajectory traj = rg_ode_integrate(z0, span);
    std::string csv = "s,z,z_closed,ln_msd,ln_msd_closed\n";
    for (const auto& p : traj.points)
        csv += format_double(p.log_time) + "," + format_double(p.z) + "," +
               format_double(rg_closed_z(z0, p.log_time)) + "," + format_double(p.ln_msd) + "," +
               format_double(rg_closed_ln_msd(z0, p.log_time)) + "\n";
    write_text_atomic(out, csv);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_verify_prime(double L, double M, double epsilon2, int samples, int mpo,
                     std::uint64_t seed) {
    double j = std::log(L) / std::log(M);
    double lambda_tilde = std::sqrt(1.0 + epsilon2 * std::log(L));
    if (std::abs(j - std::round(j)) < 1e-9)
        lambda_tilde =
            iterate_lambda(epsilon2, M, static_cast<int>(std::round(j))).ladder.back().lambda_tilde;
    SpectralQuadrature quad;
    LemmaPrimeReport rep = verify_lemma_prime(L, M, lambda_tilde, quad, samples, seed, mpo);
    std::cout << rep.to_json().dump(2) << "\n";
    return rep.pass ? 0 : 1;
}

int cmd_proxy(int levels, double epsilon2, double M, int samples, int mpo, std::uint64_t seed) {
    ProxyNode node = build_proxy(levels, std::sqrt(epsilon2), M, seed, mpo, 0, std::max(7, levels));
    ProxyMomentReport moments = verify_proxy_moments(node, samples);
    ErrorFieldReport error = sample_error_field(node, Vec2{1.0, 0.0}, 8, std::max(16, samples / 4));
    nlohmann::json j = {{"moments", moments.to_json()}, {"error_field", error.to_json()}};
    std::cout << j.dump(2) << "\n";
    return (moments.pass && error.pass) ? 0 : 1;
}

int cmd_rep_check(const RepCheckConfig& rc) {
    RepCheckReport rep = representation_identity_check(rc);
    std::cout << rep.to_json().dump(2) << "\n";
    return 0;
}

int cmd_run(const std::string& suite, const std::string& preset, const std::string& config_path,
            const std::string& out_root, std::optional<std::uint64_t> seed) {
    std::optional<ConfigFile> overrides;
    if (!config_path.empty()) overrides = ConfigFile::load(config_path);
    SuiteResult res = run_suite(suite, preset, overrides ? &*overrides : nullptr, out_root, seed);
    for (const auto& c : res.manifest.checks)
        std::cout << (c.pass ? "PASS" : "FAIL") << " " << c.name << ": " << c.detail << "\n";
    std::cout << (res.pass ? "PASS" : "FAIL") << " suite " << suite << " (" << res.manifest_path
              << ", " << format_double(res.manifest.wall_clock_sec) << " s)\n";
    return res.pass ? 0 : 1;
}

int cmd_plot(const std::string& manifest_path, std::string out_dir) {
    RunManifest man = load_manifest(manifest_path);
    if (out_dir.empty()) out_dir = fs::path(manifest_path).parent_path().string();
    if (out_dir.empty()) out_dir = ".";
    auto written = emit_plots(man, out_dir);
    for (const auto& w : written) std::cout << "wrote " << (fs::path(out_dir) / w.path).string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tracerlab: tracer diffusion in a logarithmically correlated drift field"};
    app.require_subcommand(1);
    std::string out_root = default_out_root();

    SimulateArgs sim;
    sim.out = (fs::path(out_root) / "simulate").string();
    auto* simulate = app.add_subcommand("simulate", "Euler-Maruyama tracer ensemble, MSD table");
    simulate->add_option("--epsilon2", sim.epsilon2, "squared drift amplitude");
    simulate->add_option("--scale-L", sim.scale_L, "IR cutoff scale (band [1/L, 1])");
    simulate->add_option("--dt", sim.dt, "time step");
    simulate->add_option("--t-max", sim.t_max, "horizon");
    simulate->add_option("--t-min", sim.t_min, "first recorded time (default t_max/50)");
    simulate->add_option("--n-times", sim.n_times, "number of recorded times");
    simulate->add_option("--paths", sim.paths, "Brownian paths per field");
    simulate->add_option("--fields", sim.fields, "independent field realizations");
    simulate->add_option("--modes-per-octave", sim.modes_per_octave, "spectral resolution");
    simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--out", sim.out, "output directory");

    double rn_eps2 = 0.5, rn_M = 2.0;
    int rn_steps = 20;
    std::string rn_out = (fs::path(out_root) / "renorm.csv").string();
    auto* renorm = app.add_subcommand("renorm", "one-step diffusivity recursion ladder");
    renorm->add_option("--epsilon2", rn_eps2, "squared drift amplitude");
    renorm->add_option("--M", rn_M, "scale factor per rung");
    renorm->add_option("--steps", rn_steps, "number of rungs");
    renorm->add_option("--out", rn_out, "output CSV path");

    double rg_z0 = 1.0, rg_span = 3.0 * std::log(10.0);
    std::string rg_out = (fs::path(out_root) / "rg_ode.csv").string();
    auto* rgode = app.add_subcommand("rg-ode", "exponent flow dz/ds = (2 - z)^2 and the MSD law");
    rgode->add_option("--z0", rg_z0, "initial exponent (0 < z0 <= 2)");
    rgode->add_option("--span", rg_span, "span in s = ln t");
    rgode->add_option("--out", rg_out, "output CSV path");

    auto* correctors = app.add_subcommand("correctors", "incremental corrector diagnostics");
    correctors->require_subcommand(1);
    double cp_L = 4.0, cp_M = 4.0, cp_eps2 = 0.5;
    int cp_samples = 4096, cp_mpo = 512;
    std::uint64_t cp_seed = 1;
    auto* vprime = correctors->add_subcommand("verify-prime",
                                              "single-increment identities (quadrature, MC)");
    vprime->add_option("--L", cp_L, "base scale of the increment");
    vprime->add_option("--M", cp_M, "scale factor (band [1/(LM), 1/L])");
    vprime->add_option("--epsilon2", cp_eps2, "amplitude used to pick lambda_tilde");
    vprime->add_option("--samples", cp_samples, "MC realizations");
    vprime->add_option("--modes-per-octave", cp_mpo, "spectral resolution");
    vprime->add_option("--seed", cp_seed, "master seed");

    int px_levels = 3;
    double px_eps2 = 0.5, px_M = 4.0;
    int px_samples = 1024, px_mpo = 256;
    std::uint64_t px_seed = 1;
    auto* pxcmd = correctors->add_subcommand("proxy", "proxy hierarchy moments and error field");
    pxcmd->add_option("--levels", px_levels, "hierarchy depth n (L = M^n)");
    pxcmd->add_option("--epsilon2", px_eps2, "squared drift amplitude");
    pxcmd->add_option("--M", px_M, "scale factor per level");
    pxcmd->add_option("--samples", px_samples, "MC realizations");
    pxcmd->add_option("--modes-per-octave", px_mpo, "spectral resolution");
    pxcmd->add_option("--seed", px_seed, "master seed");

    RepCheckConfig rc; // defaults are the desk-scale parameters
    rc.n_fields = 4;
    rc.n_paths = 2048;
    auto* repchk = app.add_subcommand("rep-check",
                                      "displacement-energy identity on a periodized field");
    repchk->add_option("--epsilon2", rc.epsilon2, "squared drift amplitude");
    repchk->add_option("--scale-L", rc.L, "IR cutoff scale");
    repchk->add_option("--T", rc.T, "horizon");
    repchk->add_option("--grid", rc.grid_n, "PDE grid size per side");
    repchk->add_option("--box-mult", rc.box_mult, "torus size in units of 2 pi L");
    repchk->add_option("--dt", rc.dt, "PDE and particle time step");
    repchk->add_option("--fields", rc.n_fields, "field realizations");
    repchk->add_option("--paths", rc.n_paths, "particle paths per field");
    repchk->add_option("--refine", rc.refine, "drift upsampling factor");
    repchk->add_option("--seed", rc.seed, "master seed");

    std::string run_suite_name, run_preset = "quick", run_config, run_out = out_root;
    std::uint64_t run_seed = 0;
    bool run_seed_set = false;
    auto* runcmd = app.add_subcommand("run", "execute a named experiment suite");
    runcmd->add_option("suite", run_suite_name, "one of: theorem1 theorem2 monotonicity lemma51 "
                                                "lemma61 lemma71 lemma91 rg-appendix")
        ->required();
    runcmd->add_option("--preset", run_preset, "quick or paper");
    runcmd->add_option("--config", run_config, "INI override file");
    runcmd->add_option("--out", run_out, "output root (default $TRACERLAB_OUT or ./out)");
    runcmd->add_option("--seed", run_seed, "master seed override")
        ->each([&](const std::string&) { run_seed_set = true; });

    std::string plot_manifest, plot_out;
    auto* plotcmd = app.add_subcommand("plot", "re-render SVG plots from a manifest");
    plotcmd->add_option("manifest", plot_manifest, "path to manifest.json")->required();
    plotcmd->add_option("--out", plot_out, "output directory (default: beside the manifest)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad flags are a schema violation
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*renorm) return cmd_renorm(rn_eps2, rn_M, rn_steps, rn_out);
        if (*rgode) return cmd_rg_ode(rg_z0, rg_span, rg_out);
        if (*vprime) return cmd_verify_prime(cp_L, cp_M, cp_eps2, cp_samples, cp_mpo, cp_seed);
        if (*pxcmd) return cmd_proxy(px_levels, px_eps2, px_M, px_samples, px_mpo, px_seed);
        if (*repchk) return cmd_rep_check(rc);
        if (*runcmd)
            return cmd_run(run_suite_name, run_preset, run_config, run_out,
                           run_seed_set ? std::optional<std::uint64_t>(run_seed) : std::nullopt);
        if (*plotcmd) return cmd_plot(plot_manifest, plot_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
