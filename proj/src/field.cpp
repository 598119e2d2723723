#include "tracerlab/field.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tracerlab/kernels.hpp"
#include "tracerlab/rng.hpp"

namespace trl {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kLn2 = 0.69314718055994530941723212145818;
} // namespace

std::string to_string(SamplingScheme s) {
    return s == SamplingScheme::stratified_annulus ? "stratified-annulus" : "importance-sampled-modes";
}

void ModeSet::push(double kx_, double ky_, double a_, double theta_) {
    kx.push_back(kx_);
    ky.push_back(ky_);
    a.push_back(a_);
    theta.push_back(theta_);
    ++count;
}

void ModeSet::finalize() {
    using kernels::pad4;
    pad4(kx);
    pad4(ky);
    pad4(a);
    pad4(theta);
    std::size_t n = padded();
    akx.resize(n);
    aky.resize(n);
    axx.resize(n);
    axy.resize(n);
    ayy.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        akx[j] = a[j] * kx[j];
        aky[j] = a[j] * ky[j];
        axx[j] = a[j] * kx[j] * kx[j];
        axy[j] = a[j] * kx[j] * ky[j];
        ayy[j] = a[j] * ky[j] * ky[j];
    }
}

OctaveGrid OctaveGrid::for_modes_per_octave(std::size_t m) {
    if (m < 1) m = 1;
    // Cells roughly square in (log r, theta): dtheta/du = 2*pi/ln2 ~ 9.06.
    int nu = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(m) / 9.06))));
    int ntheta = std::max(4, static_cast<int>(std::lround(static_cast<double>(m) / nu)));
    // Quarter-turn rotations must map the angular cells onto themselves so
    // that the sampled law is exactly invariant under them.
    ntheta = (ntheta + 3) / 4 * 4;
    return {nu, ntheta};
}

FieldRealization FieldRealization::sample(const SpectralBand& band, std::size_t num_modes,
                                          std::uint64_t seed, SamplingScheme scheme,
                                          std::uint32_t field_index, int increment_level) {
    if (num_modes < 1) throw std::invalid_argument("num_modes must be >= 1");
    if (increment_level > 0xFF) throw std::invalid_argument("increment level exceeds key range");
    auto cell_stream = [&](std::uint32_t octave, std::uint32_t cell, std::uint32_t running) {
        return increment_level < 0
                   ? stream_field_cell(field_index, octave, cell)
                   : stream_increment_cell(field_index, static_cast<std::uint32_t>(increment_level),
                                           running);
    };

    FieldRealization f;
    f.band_ = band;
    f.seed_ = seed;
    f.scheme_ = scheme;
    if (band.empty()) {
        f.modes_.finalize();
        return f;
    }

    const double u_lo_band = std::log(band.k_min);
    const double u_hi_band = std::log(band.k_max);

    if (scheme == SamplingScheme::importance_modes) {
        // iid wavevectors with density F(k)/(2*pi) d k, which is uniform in
        // (log r, theta); every mode carries an equal share of the mass.
        const double w = band.log_width();
        const double v = w / static_cast<double>(num_modes);
        for (std::size_t j = 0; j < num_modes; ++j) {
            auto jj = static_cast<std::uint32_t>(j);
            Rng rng(seed, cell_stream(0xFFu, jj, jj));
            double u = u_lo_band + rng.u01() * w;
            double th = rng.u01() * kTwoPi;
            double r = rng.rayleigh();
            double phase = rng.u01() * kTwoPi;
            double kr = std::exp(u);
            f.modes_.push(kr * std::cos(th), kr * std::sin(th), std::sqrt(v) * r, phase);
            f.expected_mass_ += v;
        }
        f.modes_.finalize();
        return f;
    }

    // Stratified: one mode per cell of the global per-octave grid, keyed by
    // absolute (octave, cell) so disjoint bands use disjoint streams.
    const double octaves = band.log_width() / kLn2;
    std::size_t m_per_oct =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(num_modes / octaves)));
    OctaveGrid grid = OctaveGrid::for_modes_per_octave(m_per_oct);
    const double du = kLn2 / grid.nu;
    const double dtheta = kTwoPi / grid.ntheta;

    int o_lo = static_cast<int>(std::floor(-std::log2(band.k_max) - 1e-12));
    int o_hi = static_cast<int>(std::ceil(-std::log2(band.k_min) + 1e-12)) - 1;
    if (o_lo < 0) o_lo = 0;
    if (o_hi > 250) throw std::invalid_argument("band reaches beyond supported octave range");

    std::uint32_t running = 0;
    for (int o = o_lo; o <= o_hi; ++o) {
        const double oct_u_hi = -o * kLn2;
        for (int iu = 0; iu < grid.nu; ++iu) {
            double cu_hi = oct_u_hi - iu * du;
            double cu_lo = cu_hi - du;
            double lo = std::max(cu_lo, u_lo_band);
            double hi = std::min(cu_hi, u_hi_band);
            if (hi - lo <= 1e-15) {
                running += static_cast<std::uint32_t>(grid.ntheta);
                continue;
            }
            for (int it = 0; it < grid.ntheta; ++it, ++running) {
                std::uint32_t cell = static_cast<std::uint32_t>(iu) * grid.ntheta + it;
                Rng rng(seed, cell_stream(static_cast<std::uint32_t>(o), cell, running));
                double u = lo + rng.u01() * (hi - lo);
                double th = (it + rng.u01()) * dtheta;
                double r = rng.rayleigh();
                double phase = rng.u01() * kTwoPi;
                double v = (hi - lo) * dtheta / kTwoPi;
                double kr = std::exp(u);
                f.modes_.push(kr * std::cos(th), kr * std::sin(th), std::sqrt(v) * r, phase);
                f.expected_mass_ += v;
            }
        }
    }
    f.modes_.finalize();
    return f;
}

FieldRealization FieldRealization::from_modes(const SpectralBand& band, std::vector<double> kx,
                                              std::vector<double> ky, std::vector<double> a,
                                              std::vector<double> theta) {
    if (kx.size() != ky.size() || kx.size() != a.size() || kx.size() != theta.size())
        throw std::invalid_argument("from_modes: mismatched array lengths");
    FieldRealization f;
    f.band_ = band;
    for (std::size_t j = 0; j < kx.size(); ++j) {
        f.modes_.push(kx[j], ky[j], a[j], theta[j]);
        f.expected_mass_ += 0.5 * a[j] * a[j]; // realized, not ensemble, mass
    }
    f.modes_.finalize();
    return f;
}

double FieldRealization::psi(Vec2 x) const {
    const ModeSet& m = modes_;
    if (m.padded() == 0) return 0.0;
    const double* cos_cols[1] = {m.a.data()};
    double c[1];
    kernels::backend().weighted(m.padded(), m.kx.data(), m.ky.data(), m.theta.data(), x.x, x.y,
                                nullptr, 0, cos_cols, 1, nullptr, c);
    return c[0];
}

Vec2 FieldRealization::grad_psi(Vec2 x) const {
    const ModeSet& m = modes_;
    if (m.padded() == 0) return {};
    const double* sin_cols[2] = {m.akx.data(), m.aky.data()};
    double s[2];
    kernels::backend().weighted(m.padded(), m.kx.data(), m.ky.data(), m.theta.data(), x.x, x.y,
                                sin_cols, 2, nullptr, 0, s, nullptr);
    return {-s[0], -s[1]};
}

Vec2 FieldRealization::b(Vec2 x) const {
    const ModeSet& m = modes_;
    if (m.padded() == 0) return {};
    double bx, by;
    kernels::backend().drift(m.padded(), m.kx.data(), m.ky.data(), m.theta.data(), m.akx.data(),
                             m.aky.data(), x.x, x.y, &bx, &by);
    return {bx, by};
}

Sym2 FieldRealization::hessian_psi(Vec2 x) const {
    const ModeSet& m = modes_;
    if (m.padded() == 0) return {};
    const double* cos_cols[3] = {m.axx.data(), m.axy.data(), m.ayy.data()};
    double c[3];
    kernels::backend().weighted(m.padded(), m.kx.data(), m.ky.data(), m.theta.data(), x.x, x.y,
                                nullptr, 0, cos_cols, 3, nullptr, c);
    return {-c[0], -c[1], -c[2]};
}

FieldRealization::Eval FieldRealization::eval_all(Vec2 x) const {
    const ModeSet& m = modes_;
    Eval e;
    if (m.padded() == 0) return e;
    const double* sin_cols[2] = {m.akx.data(), m.aky.data()};
    const double* cos_cols[4] = {m.a.data(), m.axx.data(), m.axy.data(), m.ayy.data()};
    double s[2], c[4];
    kernels::backend().weighted(m.padded(), m.kx.data(), m.ky.data(), m.theta.data(), x.x, x.y,
                                sin_cols, 2, cos_cols, 4, s, c);
    e.psi = c[0];
    e.grad = {-s[0], -s[1]};
    e.hess = {-c[1], -c[2], -c[3]};
    return e;
}

nlohmann::json FieldRealization::manifest() const {
    double a_min = 0.0, a_max = 0.0, a_sum = 0.0, a2_sum = 0.0;
    for (std::size_t j = 0; j < modes_.count; ++j) {
        double a = modes_.a[j];
        if (j == 0 || a < a_min) a_min = a;
        if (j == 0 || a > a_max) a_max = a;
        a_sum += a;
        a2_sum += a * a;
    }
    std::size_t n = modes_.count;
    return nlohmann::json{
        {"band", {{"k_min", band_.k_min}, {"k_max", band_.k_max}, {"L", band_.L()}}},
        {"seed", seed_},
        {"scheme", to_string(scheme_)},
        {"num_modes", n},
        {"amplitude",
         {{"min", a_min},
          {"max", a_max},
          {"mean", n ? a_sum / static_cast<double>(n) : 0.0},
          {"realized_mass", 0.5 * a2_sum},
          {"expected_mass", expected_mass_}}},
    };
}

void FieldRealization::dump_modes_binary(const std::string& path) const {
    static_assert(std::endian::native == std::endian::little,
                  "binary mode dumps are little-endian");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    for (std::size_t j = 0; j < modes_.count; ++j) {
        double row[4] = {modes_.kx[j], modes_.ky[j], modes_.a[j], modes_.theta[j]};
        out.write(reinterpret_cast<const char*>(row), sizeof(row));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace trl
