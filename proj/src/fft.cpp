#include "cns/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace cns {

RowFft::RowFft(int nx) : nx_(nx) {
  if (nx < 2) throw std::invalid_argument("RowFft: nx must be >= 2");
  // Scratch buffers only used at planning time; execution uses the
  // new-array interface with FFTW_UNALIGNED so caller buffers need no
  // special alignment.
  std::vector<double> r(nx);
  std::vector<std::complex<double>> c(nx / 2 + 1);
  plan_fwd_ = fftw_plan_dft_r2c_1d(nx, r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_bck_ = fftw_plan_dft_c2r_1d(nx, reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan_fwd_ || !plan_bck_) throw std::runtime_error("RowFft: fftw planning failed");
}

RowFft::~RowFft() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bck_));
}

void RowFft::forward(const double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void RowFft::inverse(const std::complex<double>* in, double* out) const {
  // c2r destroys its input; work on a copy so callers can reuse spectra.
  thread_local std::vector<std::complex<double>> tmp;
  tmp.assign(in, in + nk());
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bck_),
                       reinterpret_cast<fftw_complex*>(tmp.data()), out);
  const double s = 1.0 / nx_;
  for (int i = 0; i < nx_; ++i) out[i] *= s;
}

std::shared_ptr<const RowFft> get_row_fft(int nx) {
  static std::mutex mtx;
  static std::map<int, std::shared_ptr<const RowFft>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(nx);
  if (it == cache.end()) it = cache.emplace(nx, std::make_shared<const RowFft>(nx)).first;
  return it->second;
}

}  // namespace cns
