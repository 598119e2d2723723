#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace trl {

// Neumaier compensated accumulator. Running sums over >= 1e8 terms must not
// depend on magnitude ordering beyond ~1e-15 relative, so plain += is not
// enough for the ensemble reductions.
class Ksum {
  public:
    void add(double v) {
        double t = s_ + v;
        if (std::abs(s_) >= std::abs(v))
            c_ += (s_ - t) + v;
        else
            c_ += (v - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }
    void reset() { s_ = c_ = 0.0; }

  private:
    double s_ = 0.0, c_ = 0.0;
};

// Streaming mean/variance (Welford).
class RunningStats {
  public:
    void add(double v) {
        ++n_;
        double d = v - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (v - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    // Unbiased sample variance.
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_mean() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

  private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
};

inline double mean_of(const std::vector<double>& v) {
    Ksum s;
    for (double x : v) s.add(x);
    return v.empty() ? 0.0 : s.value() / static_cast<double>(v.size());
}

// Standard error of the mean of v (sample SD / sqrt(n)).
inline double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    Ksum q;
    for (double x : v) q.add((x - m) * (x - m));
    double var = q.value() / static_cast<double>(v.size() - 1);
    return std::sqrt(var / static_cast<double>(v.size()));
}

} // namespace trl
