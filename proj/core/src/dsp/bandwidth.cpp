#include "cogsr/dsp/bandwidth.hpp"

#include <cmath>
#include <vector>

#include "cogsr/dsp/stft.hpp"
#include "cogsr/error.hpp"

namespace cogsr::dsp {

double estimate_bandwidth(const Waveform& w, const BandwidthEstimatorConfig& config) {
  const auto spec = stft_magnitude(w, config.fft_len, config.hop, WindowKind::hann);
  std::vector<double> power(spec.bins, 0.0);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t f = 0; f < spec.bins; ++f) power[f] += spec.at(t, f) * spec.at(t, f);
  }
  double total = 0.0;
  for (double p : power) total += p;
  if (!(total > 0.0)) throw ValidationError("cannot estimate the bandwidth of a silent signal");

  // prefix[k] = sum of power[0..k)
  std::vector<double> prefix(spec.bins + 1, 0.0);
  for (std::size_t f = 0; f < spec.bins; ++f) prefix[f + 1] = prefix[f] + power[f];
  const double bin_hz = spec.bin_hz(1);
  const double nyquist = w.nyquist();
  const double ratio = std::pow(10.0, -config.drop_db / 10.0);
  for (double f = config.grid_hz; f < nyquist; f += config.grid_hz) {
    // passband: bins 1 .. below f; stopband: bins from f + grid/2 up
    const auto pass_end = static_cast<std::size_t>(std::ceil(f / bin_hz));
    const auto stop_begin = static_cast<std::size_t>(std::ceil((f + 0.5 * config.grid_hz) / bin_hz));
    if (pass_end <= 1 || stop_begin >= spec.bins) continue;
    const double pass = (prefix[pass_end] - prefix[1]) / static_cast<double>(pass_end - 1);
    const double stop = (prefix[spec.bins] - prefix[stop_begin]) / static_cast<double>(spec.bins - stop_begin);
    if (pass > 0.0 && stop <= pass * ratio) return f;
  }
  return nyquist;
}

}  // namespace cogsr::dsp
