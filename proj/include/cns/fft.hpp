// Thin FFTW wrapper for batched real transforms along periodic x rows.
// Plans are created with FFTW_ESTIMATE so results are reproducible run to run,
// and executed through the new-array interface so one plan can serve many
// threads concurrently.

#ifndef CNS_FFT_HPP
#define CNS_FFT_HPP

#include <complex>
#include <memory>
#include <vector>

namespace cns {

class RowFft {
 public:
  explicit RowFft(int nx);
  ~RowFft();
  RowFft(const RowFft&) = delete;
  RowFft& operator=(const RowFft&) = delete;

  int nx() const { return nx_; }
  int nk() const { return nx_ / 2 + 1; }

  /** Unnormalized forward transform of one row: nx reals -> nx/2+1 complex. */
  void forward(const double* in, std::complex<double>* out) const;
  /** Inverse transform of one row, normalized by 1/nx. */
  void inverse(const std::complex<double>* in, double* out) const;

 private:
  int nx_;
  void* plan_fwd_;  // fftw_plan, kept opaque to avoid leaking fftw3.h everywhere
  void* plan_bck_;
};

/** Shared per-size plan cache (plan creation is serialized internally). */
std::shared_ptr<const RowFft> get_row_fft(int nx);

}  // namespace cns

#endif  // CNS_FFT_HPP
