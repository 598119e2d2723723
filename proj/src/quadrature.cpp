#include "tracerlab/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tracerlab/sum.hpp"

namespace trl {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double integrand_value(Integrand which, const IntegrandParams& p, Vec2 k) {
    double k2 = k.norm2();
    switch (which) {
        case Integrand::variance_psi:
            return 1.0 / k2;
        case Integrand::variance_b:
        case Integrand::variance_grad_psi:
            // E|b|^2 = E|grad psi|^2: the |k|^2 from differentiation cancels
            // the spectrum.
            return 1.0;
        case Integrand::corrector_variance: {
            double kj = k.dot(rot90(p.xi));
            return kj * kj / (p.lambda_tilde * p.lambda_tilde * k2 * k2 * k2);
        }
        case Integrand::corrector_grad_variance: {
            double kj = k.dot(rot90(p.xi));
            return kj * kj / (p.lambda_tilde * p.lambda_tilde * k2 * k2);
        }
        case Integrand::corrector_hessian_variance: {
            double kj = k.dot(rot90(p.xi));
            return kj * kj / (p.lambda_tilde * p.lambda_tilde * k2);
        }
        case Integrand::covariance_psi:
            return std::cos(k.dot(p.x)) / k2;
    }
    throw std::logic_error("unknown integrand");
}

bool needs_unit_xi(Integrand which) {
    return which == Integrand::corrector_variance || which == Integrand::corrector_grad_variance ||
           which == Integrand::corrector_hessian_variance;
}

} // namespace

double spectral_integral(const SpectralBand& band, Integrand which, const IntegrandParams& params,
                         const SpectralQuadrature& quad) {
    if (quad.radial_nodes < 4 || quad.angular_nodes < 4)
        throw std::invalid_argument("quadrature node counts must be >= 4");
    if (needs_unit_xi(which)) {
        if (std::abs(params.xi.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("corrector integrands require a unit direction xi");
        if (!(params.lambda_tilde > 0.0))
            throw std::invalid_argument("corrector integrands require lambda_tilde > 0");
    }
    if (band.empty()) return 0.0;

    const double u_lo = std::log(band.k_min);
    const double u_hi = std::log(band.k_max);
    const int nr = quad.radial_nodes;
    const int na = quad.angular_nodes;

    std::vector<double> u(nr), wu(nr);
    if (quad.rule == QuadRule::midpoint) {
        double h = (u_hi - u_lo) / nr;
        for (int i = 0; i < nr; ++i) {
            u[i] = u_lo + (i + 0.5) * h;
            wu[i] = h;
        }
    } else {
        std::vector<double> gx(nr), gw(nr);
        gauss_legendre(nr, gx.data(), gw.data());
        double c = 0.5 * (u_hi + u_lo), s = 0.5 * (u_hi - u_lo);
        for (int i = 0; i < nr; ++i) {
            u[i] = c + s * gx[i];
            wu[i] = s * gw[i];
        }
    }

    // dk = r dr dtheta = e^{2u} du dtheta; angular midpoint rule.
    const double dth = kTwoPi / na;
    Ksum total;
    for (int i = 0; i < nr; ++i) {
        double r = std::exp(u[i]);
        double jac = r * r * wu[i];
        Ksum ring;
        for (int j = 0; j < na; ++j) {
            double th = (j + 0.5) * dth;
            Vec2 k{r * std::cos(th), r * std::sin(th)};
            ring.add(integrand_value(which, params, k));
        }
        total.add(jac * ring.value() * dth / kTwoPi);
    }
    return total.value();
}

void gauss_legendre(int n, double* nodes, double* weights) {
    // Newton iteration on P_n from the Chebyshev initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

} // namespace trl
