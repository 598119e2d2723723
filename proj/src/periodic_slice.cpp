#include "tracerlab/periodic_slice.hpp"

#include <cmath>
#include <stdexcept>

#include <fftw3.h>

#include "tracerlab/fft_grid.hpp"
#include "tracerlab/rng.hpp"
#include "tracerlab/sum.hpp"

namespace trl {

GridFft::GridFft(int n) : n_(n) {
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("GridFft: n must be even and >= 4");
    real_buf_.resize(real_size());
    spec_buf_.resize(spec_size());
    // Buffers are owned, so FFTW_ESTIMATE plans stay valid for the object's
    // lifetime; data is copied in and out per call.
    plan_fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_buf_.data(),
                                     reinterpret_cast<fftw_complex*>(spec_buf_.data()),
                                     FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(n_, n_, reinterpret_cast<fftw_complex*>(spec_buf_.data()),
                                     real_buf_.data(), FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("GridFft: planning failed");
}

GridFft::~GridFft() {
    fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

void GridFft::forward(const double* real, std::complex<double>* spec) {
    std::copy(real, real + real_size(), real_buf_.data());
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    double scale = 1.0 / static_cast<double>(real_size());
    for (std::size_t i = 0; i < spec_size(); ++i) spec[i] = spec_buf_[i] * scale;
}

void GridFft::backward(const std::complex<double>* spec, double* real) {
    std::copy(spec, spec + spec_size(), spec_buf_.data());
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    std::copy(real_buf_.data(), real_buf_.data() + real_size(), real);
}

namespace {

// Half-spectrum layout shared by everything below: the x dimension is the
// halved one (column c = m1 in [0, N/2]); rows run the full signed m2.
std::size_t spec_index(int n, int m1, int m2) {
    int row = m2 >= 0 ? m2 : n + m2;
    return static_cast<std::size_t>(row) * (n / 2 + 1) + static_cast<std::size_t>(m1);
}

// psi-hat on the N x (N/2+1) half lattice from explicit modes. Each mode
// a cos(q.x + theta) contributes (a/2) e^{i theta} at +q; the Hermitian
// partner at -q is implicit for m1 > 0 and stored explicitly on the m1 = 0
// column.
std::vector<std::complex<double>> assemble_psi_hat(const ModeSet& modes, double box, int n) {
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n) * (n / 2 + 1));
    const double dq = 2.0 * M_PI / box;
    for (std::size_t j = 0; j < modes.count; ++j) {
        double m1d = modes.kx[j] / dq, m2d = modes.ky[j] / dq;
        int m1 = static_cast<int>(std::lround(m1d));
        int m2 = static_cast<int>(std::lround(m2d));
        if (std::abs(m1d - m1) > 1e-9 || std::abs(m2d - m2) > 1e-9)
            throw std::invalid_argument("periodic slice: mode off the dual lattice");
        double a = modes.a[j], theta = modes.theta[j];
        if (m1 < 0 || (m1 == 0 && m2 < 0)) { // canonicalize to the stored half
            m1 = -m1;
            m2 = -m2;
            theta = -theta;
        }
        if (m1 == 0 && m2 == 0) throw std::invalid_argument("periodic slice: zero mode");
        if (m1 > n / 2 - 1 || std::abs(m2) > n / 2 - 1)
            throw std::invalid_argument("periodic slice: grid too coarse for mode set");
        std::complex<double> half = 0.5 * a * std::complex<double>(std::cos(theta), std::sin(theta));
        if (m1 == 0) {
            spec[spec_index(n, 0, m2)] += half;
            spec[spec_index(n, 0, -m2)] += std::conj(half);
        } else {
            spec[spec_index(n, m1, m2)] += half;
        }
    }
    return spec;
}

enum class DerivKind { none, ddx, ddy };

// (i q_k) * spec, the exact spectral derivative of the band-limited field.
std::vector<std::complex<double>> scale_derivative(const std::vector<std::complex<double>>& spec,
                                                   double box, int n, DerivKind kind) {
    std::vector<std::complex<double>> out(spec.size());
    const double dq = 2.0 * M_PI / box;
    for (int row = 0; row < n; ++row) {
        int m2 = row <= n / 2 ? row : row - n;
        for (int c = 0; c <= n / 2; ++c) {
            std::size_t idx = static_cast<std::size_t>(row) * (n / 2 + 1) + c;
            double q = kind == DerivKind::ddx ? dq * c : dq * m2;
            out[idx] = std::complex<double>(0.0, q) * spec[idx];
        }
    }
    if (kind == DerivKind::none) return spec;
    return out;
}

} // namespace

void PeriodicFieldSlice::synthesize_grids() {
    GridFft fft(grid_n);
    auto spec = assemble_psi_hat(field.modes(), box, grid_n);
    psi.resize(cells());
    bx.resize(cells());
    by.resize(cells());
    fft.backward(spec.data(), psi.data());
    // b = J grad psi = (-d/dy psi, d/dx psi).
    auto ddy = scale_derivative(spec, box, grid_n, DerivKind::ddy);
    for (auto& v : ddy) v = -v;
    fft.backward(ddy.data(), bx.data());
    auto ddx = scale_derivative(spec, box, grid_n, DerivKind::ddx);
    fft.backward(ddx.data(), by.data());
}

PeriodicFieldSlice PeriodicFieldSlice::sample(double L, double box_mult, int grid_n,
                                              std::uint64_t seed, std::uint32_t field_index) {
    if (!(L >= 1.0)) throw std::invalid_argument("PeriodicFieldSlice: L must be >= 1");
    if (!(box_mult >= 1.0)) throw std::invalid_argument("PeriodicFieldSlice: box_mult must be >= 1");

    PeriodicFieldSlice s;
    s.L = L;
    s.box = box_mult * 2.0 * M_PI * L;
    s.grid_n = grid_n;
    s.band = SpectralBand::from_L(L);

    const double dq = 2.0 * M_PI / s.box;
    const int Q = static_cast<int>(std::floor(s.band.k_max / dq * (1.0 + 1e-12)));
    if (Q > grid_n / 2 - 1)
        throw std::invalid_argument("PeriodicFieldSlice: grid " + std::to_string(grid_n) +
                                    " too coarse for the annulus (need > " + std::to_string(2 * Q + 2) +
                                    ")");

    // One Gaussian mode per dual-lattice point of the annulus; the m1 < 0
    // half-plane is the Hermitian image, not separate modes.
    std::vector<double> kx, ky, amp, theta;
    Ksum mass;
    for (int m2 = -Q; m2 <= Q; ++m2) {
        for (int m1 = (m2 > 0 ? 0 : 1); m1 <= Q; ++m1) {
            double qx = dq * m1, qy = dq * m2;
            double q = std::hypot(qx, qy);
            if (q < s.band.k_min * (1.0 - 1e-12) || q > s.band.k_max * (1.0 + 1e-12)) continue;
            std::uint32_t cell = static_cast<std::uint32_t>(m2 + Q) *
                                     static_cast<std::uint32_t>(2 * Q + 2) +
                                 static_cast<std::uint32_t>(m1);
            Rng rng(seed, stream_field_cell(field_index, 0xFEu, cell));
            double mass_cell = dq * dq / (2.0 * M_PI * q * q);
            double a = std::sqrt(mass_cell) * rng.rayleigh();
            double th = 2.0 * M_PI * rng.u01();
            kx.push_back(qx);
            ky.push_back(qy);
            amp.push_back(a);
            theta.push_back(th);
            mass.add(mass_cell);
        }
    }
    if (kx.empty())
        throw std::invalid_argument("PeriodicFieldSlice: annulus holds no lattice point; "
                                    "increase box_mult");
    s.expected_mass = mass.value();
    s.field = FieldRealization::from_modes(s.band, std::move(kx), std::move(ky), std::move(amp),
                                           std::move(theta));
    s.synthesize_grids();
    return s;
}

PeriodicFieldSlice PeriodicFieldSlice::from_modes(double L, double box, int grid_n,
                                                  const std::vector<double>& kx,
                                                  const std::vector<double>& ky,
                                                  const std::vector<double>& a,
                                                  const std::vector<double>& theta) {
    PeriodicFieldSlice s;
    s.L = L;
    s.box = box;
    s.grid_n = grid_n;
    s.band = SpectralBand::from_L(L);
    s.field = FieldRealization::from_modes(s.band, kx, ky, a, theta);
    s.expected_mass = 0.0;
    s.synthesize_grids(); // validates lattice commensurability
    return s;
}

nlohmann::json PeriodicFieldSlice::manifest() const {
    return {{"L", L},
            {"box", box},
            {"grid_n", grid_n},
            {"modes", field.modes().count},
            {"expected_mass", expected_mass},
            {"spacing", spacing()}};
}

SliceDriftSampler::SliceDriftSampler(const PeriodicFieldSlice& slice, int refine) {
    if (refine < 1 || refine > 16) throw std::invalid_argument("SliceDriftSampler: refine in [1,16]");
    box_ = slice.box;
    n_ = slice.grid_n * refine;
    GridFft fft(n_);
    auto spec = assemble_psi_hat(slice.field.modes(), box_, n_);
    auto ddy = scale_derivative(spec, box_, n_, DerivKind::ddy);
    for (auto& v : ddy) v = -v;
    bx_.resize(fft.real_size());
    by_.resize(fft.real_size());
    fft.backward(ddy.data(), bx_.data());
    auto ddx = scale_derivative(spec, box_, n_, DerivKind::ddx);
    fft.backward(ddx.data(), by_.data());
}

Vec2 SliceDriftSampler::b(Vec2 x) const {
    double h = box_ / n_;
    double u = x.x / h, v = x.y / h;
    double fu = std::floor(u), fv = std::floor(v);
    double du = u - fu, dv = v - fv;
    long iu = static_cast<long>(fu), iv = static_cast<long>(fv);
    auto wrap = [this](long i) {
        long m = i % n_;
        return static_cast<std::size_t>(m < 0 ? m + n_ : m);
    };
    std::size_t i0 = wrap(iu), i1 = wrap(iu + 1), j0 = wrap(iv), j1 = wrap(iv + 1);
    std::size_t n = static_cast<std::size_t>(n_);
    auto lerp = [&](const std::vector<double>& g) {
        double g00 = g[j0 * n + i0], g10 = g[j0 * n + i1];
        double g01 = g[j1 * n + i0], g11 = g[j1 * n + i1];
        return (1.0 - dv) * ((1.0 - du) * g00 + du * g10) + dv * ((1.0 - du) * g01 + du * g11);
    };
    return {lerp(bx_), lerp(by_)};
}

} // namespace trl
