#include "cogsr/dsp/filter.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "cogsr/error.hpp"

namespace cogsr::dsp {

std::vector<double> design_lowpass(double cutoff_hz, int sample_rate, const LowpassDesign& design) {
  const double nyquist = 0.5 * sample_rate;
  if (!(cutoff_hz > 0.0 && cutoff_hz < nyquist)) {
    throw ValidationError("lowpass cutoff " + std::to_string(cutoff_hz) + " Hz outside (0, " +
                          std::to_string(nyquist) + ")");
  }
  if (design.num_taps % 2 == 0) throw ValidationError("lowpass tap count must be odd");
  const std::size_t n = design.num_taps;
  const double m = 0.5 * static_cast<double>(n - 1);
  const double fc = cutoff_hz / sample_rate;  // cycles per sample
  const double i0_beta = std::cyl_bessel_i(0.0, design.kaiser_beta);
  std::vector<double> taps(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i) - m;
    const double arg = 2.0 * fc * k;
    const double sinc = k == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double r = k / m;
    const double window = std::cyl_bessel_i(0.0, design.kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    taps[i] = 2.0 * fc * sinc * window;
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

std::vector<double> filter_zero_phase(const std::vector<double>& x, const std::vector<double>& taps) {
  const auto len = static_cast<std::ptrdiff_t>(x.size());
  const auto n = static_cast<std::ptrdiff_t>(taps.size());
  const std::ptrdiff_t delay = (n - 1) / 2;
  // y[i] = sum_k taps[k] * x[i + delay - k] = sum_j rev[j] * x[i + delay - (n - 1) + j]
  const std::vector<double> rev(taps.rbegin(), taps.rend());
  const Eigen::Map<const Eigen::VectorXd> h(rev.data(), n);
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < len; ++i) {
    const std::ptrdiff_t first = i + delay - (n - 1);
    const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, -first);
    const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(n - 1, len - 1 - first);
    if (j_hi < j_lo) continue;
    const Eigen::Map<const Eigen::VectorXd> seg(x.data() + first + j_lo, j_hi - j_lo + 1);
    y[static_cast<std::size_t>(i)] = h.segment(j_lo, j_hi - j_lo + 1).dot(seg);
  }
  return y;
}

Waveform lowpass(const Waveform& w, double cutoff_hz, const LowpassDesign& design) {
  const auto taps = design_lowpass(cutoff_hz, w.sample_rate, design);
  return Waveform{filter_zero_phase(w.samples, taps), w.sample_rate};
}

}  // namespace cogsr::dsp
