#pragma once

#include <complex>
#include <vector>

namespace trl {

// Thin wrapper around FFTW's 2D real transforms for N x N periodic grids.
// Real arrays are row-major with x fastest, so the halved dimension of the
// r2c layout is x: spectra are N rows (full signed y-wavenumber m2) by
// N/2+1 columns (x-wavenumber m1 >= 0).
//
// forward() includes the 1/N^2 normalization, so backward(forward(f)) == f
// up to rounding and spectra hold genuine Fourier coefficients:
// f(x) = sum_q c_q exp(i q.x) with the implicit Hermitian half completed.
class GridFft {
  public:
    explicit GridFft(int n);
    ~GridFft();
    GridFft(const GridFft&) = delete;
    GridFft& operator=(const GridFft&) = delete;

    int n() const { return n_; }
    std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_; }
    std::size_t spec_size() const { return static_cast<std::size_t>(n_) * (n_ / 2 + 1); }

    void forward(const double* real, std::complex<double>* spec);
    void backward(const std::complex<double>* spec, double* real);

    // Signed integer y-wavenumber of spectral row i.
    int row_wavenumber(int i) const { return i <= n_ / 2 ? i : i - n_; }

  private:
    int n_;
    void* plan_fwd_; // fftw_plan, kept opaque to avoid leaking fftw3.h
    void* plan_bwd_;
    std::vector<double> real_buf_;
    std::vector<std::complex<double>> spec_buf_;
};

} // namespace trl
