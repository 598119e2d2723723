#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace trl {

// Spectral annulus [k_min, k_max]. The UV cutoff is non-dimensionalized to
// k = 1; the IR cutoff scale is L = 1/k_min. Sub-annuli (k_max < 1) carry
// the per-level spectral increments.
struct SpectralBand {
    double k_min = 1.0;
    double k_max = 1.0;

    SpectralBand() = default;
    SpectralBand(double kmin, double kmax) : k_min(kmin), k_max(kmax) {
        if (!(k_min > 0.0) || !(k_min <= k_max) || !(k_max <= 1.0 + 1e-12))
            throw std::invalid_argument("invalid spectral band: need 0 < k_min <= k_max <= 1, got [" +
                                        std::to_string(kmin) + ", " + std::to_string(kmax) + "]");
    }

    static SpectralBand from_L(double L) {
        if (!(L >= 1.0)) throw std::invalid_argument("band scale L must be >= 1");
        return SpectralBand(1.0 / L, 1.0);
    }
    // Increment band [1/(M*L), 1/L].
    static SpectralBand increment(double L, double M) {
        if (!(L >= 1.0) || !(M > 1.0))
            throw std::invalid_argument("increment band needs L >= 1, M > 1");
        return SpectralBand(1.0 / (M * L), 1.0 / L);
    }

    double L() const { return 1.0 / k_min; }
    double log_width() const { return std::log(k_max / k_min); }
    // L = 1 (or any degenerate annulus) carries no spectral mass.
    bool empty() const { return log_width() <= 1e-15; }
};

} // namespace trl
