#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "cns/fft.hpp"
#include "cns/parallel.hpp"
#include "doctest.h"

using namespace cns;

TEST_CASE("fft round trip is identity to rounding") {
  const int nx = 64;
  auto fft = get_row_fft(nx);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> f(nx), back(nx);
  for (double& v : f) v = dist(rng);
  std::vector<std::complex<double>> spec(fft->nk());
  fft->forward(f.data(), spec.data());
  fft->inverse(spec.data(), back.data());
  for (int i = 0; i < nx; ++i) CHECK(back[i] == doctest::Approx(f[i]).epsilon(1e-13));
}

TEST_CASE("fft picks out a pure cosine mode") {
  const int nx = 32;
  auto fft = get_row_fft(nx);
  std::vector<double> f(nx);
  for (int i = 0; i < nx; ++i) f[i] = std::cos(2.0 * M_PI * 3 * i / nx);
  std::vector<std::complex<double>> spec(fft->nk());
  fft->forward(f.data(), spec.data());
  for (int k = 0; k < fft->nk(); ++k) {
    const double expected = (k == 3) ? nx / 2.0 : 0.0;
    CHECK(spec[k].real() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(std::abs(spec[k].imag()) < 1e-10);
  }
}

TEST_CASE("parallel_for matches serial and propagates exceptions") {
  const int n = 1000;
  std::vector<double> a(n), b(n);
  for (int i = 0; i < n; ++i) a[i] = static_cast<double>(i) * i;
  parallel_for(n, [&](int i) { b[i] = static_cast<double>(i) * i; }, 4);
  CHECK(a == b);
  CHECK_THROWS_AS(
      parallel_for(8, [](int i) { if (i == 5) throw std::runtime_error("boom"); }, 4),
      std::runtime_error);
}
