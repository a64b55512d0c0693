#include "cogsr/dsp/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>

#include "cogsr/error.hpp"

namespace cogsr::dsp {

bool is_power_of_two(std::size_t n) noexcept { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

namespace {

// FFTW plans are cached per size. Planning is not thread-safe, and neither is
// this cache; the library runs single-threaded.
struct Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  explicit Plans(std::size_t n) {
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    const int len = static_cast<int>(n);
    forward = fftw_plan_dft_r2c_1d(len, real, spec, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(len, spec, real, FFTW_ESTIMATE);
  }
  ~Plans() {
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
    fftw_free(real);
    fftw_free(spec);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

Plans& plans_for(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Plans>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plans>(n);
  return *slot;
}

}  // namespace

std::vector<std::complex<double>> rfft(const std::vector<double>& frame) {
  const std::size_t n = frame.size();
  if (n == 0) throw ValidationError("rfft of an empty frame");
  Plans& p = plans_for(n);
  std::memcpy(p.real, frame.data(), n * sizeof(double));
  fftw_execute(p.forward);
  std::vector<std::complex<double>> out(n / 2 + 1);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = {p.spec[k][0], p.spec[k][1]};
  return out;
}

std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, std::size_t n) {
  if (n == 0 || spectrum.size() != n / 2 + 1) {
    throw DimensionError("irfft expects n/2+1 = " + std::to_string(n / 2 + 1) + " bins, got " +
                         std::to_string(spectrum.size()));
  }
  Plans& p = plans_for(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    p.spec[k][0] = spectrum[k].real();
    p.spec[k][1] = spectrum[k].imag();
  }
  fftw_execute(p.inverse);
  std::vector<double> out(p.real, p.real + n);
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= inv;
  return out;
}

}  // namespace cogsr::dsp
