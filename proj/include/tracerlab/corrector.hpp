#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "tracerlab/band.hpp"
#include "tracerlab/field.hpp"
#include "tracerlab/quadrature.hpp"
#include "tracerlab/vec.hpp"

namespace trl {

// One spectral increment psi' over [1/(M L), 1/L] plus the closed-form mode
// transforms of the two potentials tied to it:
//
//   lt * |k|^2 * F(phi') = i (k . J xi) * F(psi')     (phase-shifted modes)
//   sigma' = lt * (phi' with xi replaced by J xi)
//
// which make lt*grad(phi') + psi'*J*xi - J*grad(sigma') vanish identically,
// mode by mode. Both Cartesian directions are carried; any direction is a
// linear combination of them.
class IncrementalCorrector {
  public:
    struct Eval {
        double psi = 0.0;
        Vec2 grad_psi{};
        double phi[2] = {0.0, 0.0};   // directions e1, e2
        double sigma[2] = {0.0, 0.0};
        Vec2 grad_phi[2]{};
        Vec2 grad_sigma[2]{};
        Sym2 hess_phi[2]{};

        double phi_dir(Vec2 xi) const { return xi.x * phi[0] + xi.y * phi[1]; }
        double sigma_dir(Vec2 xi) const { return xi.x * sigma[0] + xi.y * sigma[1]; }
        Vec2 grad_phi_dir(Vec2 xi) const { return grad_phi[0] * xi.x + grad_phi[1] * xi.y; }
        Vec2 grad_sigma_dir(Vec2 xi) const { return grad_sigma[0] * xi.x + grad_sigma[1] * xi.y; }
        Sym2 hess_phi_dir(Vec2 xi) const {
            return {hess_phi[0].xx * xi.x + hess_phi[1].xx * xi.y,
                    hess_phi[0].xy * xi.x + hess_phi[1].xy * xi.y,
                    hess_phi[0].yy * xi.x + hess_phi[1].yy * xi.y};
        }
    };

    // Fused evaluation of all quantities in one pass over the modes.
    Eval eval(Vec2 x) const;

    double psi(Vec2 x) const { return eval(x).psi; }
    Vec2 grad_psi(Vec2 x) const { return eval(x).grad_psi; }
    double phi(Vec2 x) const { return eval(x).phi_dir(xi_); }
    double sigma(Vec2 x) const { return eval(x).sigma_dir(xi_); }
    Vec2 grad_phi(Vec2 x) const { return eval(x).grad_phi_dir(xi_); }
    Vec2 grad_sigma(Vec2 x) const { return eval(x).grad_sigma_dir(xi_); }
    Sym2 hess_phi(Vec2 x) const { return eval(x).hess_phi_dir(xi_); }

    // max |lt grad(phi') + psi' J xi - J grad(sigma')| over the points; an
    // algebraic identity of the mode representation, so rounding only.
    double residual(const std::vector<Vec2>& points) const;

    const SpectralBand& band() const { return band_; }
    double L() const { return L_; }
    double M() const { return M_; }
    double lambda_tilde() const { return lambda_tilde_; }
    Vec2 xi() const { return xi_; }
    const FieldRealization& psi_prime() const { return psi_prime_; }
    // Build parameters, kept so ensemble checks can construct independent
    // sibling realizations of the same increment.
    std::uint64_t seed() const { return seed_; }
    int modes_per_octave() const { return modes_per_octave_; }
    std::uint32_t realization() const { return realization_; }
    int level() const { return level_; }

    friend IncrementalCorrector build_incremental(double L, double M, double lambda_tilde, Vec2 xi,
                                                  std::uint64_t seed, int modes_per_octave,
                                                  std::uint32_t realization, int level);

  private:
    SpectralBand band_;
    double L_ = 1.0, M_ = 2.0, lambda_tilde_ = 1.0;
    Vec2 xi_{1.0, 0.0};
    std::uint64_t seed_ = 0;
    int modes_per_octave_ = 512;
    std::uint32_t realization_ = 0;
    int level_ = 0;
    FieldRealization psi_prime_;
    // Fused kernel columns, fixed layout; see corrector.cpp.
    std::vector<std::vector<double>> sin_cols_, cos_cols_;
};

// Requires lambda_tilde >= 1 and unit xi. RNG streams are keyed by
// (realization, level, cell), so hierarchies own independent increments per
// level. Throws std::logic_error if a sampled mode falls outside the band
// (construction bug).
IncrementalCorrector build_incremental(double L, double M, double lambda_tilde, Vec2 xi,
                                       std::uint64_t seed, int modes_per_octave = 512,
                                       std::uint32_t realization = 0, int level = 0);

struct LemmaPrimeRow {
    std::string quantity;
    double quadrature = 0.0;
    double closed_form = 0.0;
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double bound = 0.0; // NaN when the row has no one-sided bound
    bool pass = false;
};

struct LemmaPrimeReport {
    std::vector<LemmaPrimeRow> rows;
    bool pass = false;
    nlohmann::json to_json() const;
};

// Checks the increment's exact identities three ways: spectral quadrature
// against closed forms, Monte Carlo against quadrature (3 sigma), and the
// pointwise residual at random points (machine precision).
LemmaPrimeReport verify_lemma_prime(double L, double M, double lambda_tilde,
                                    const SpectralQuadrature& quad, int mc_samples,
                                    std::uint64_t seed, int modes_per_octave = 512);

} // namespace trl
