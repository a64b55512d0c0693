#include "cogsr/dsp/degrade.hpp"

#include <cmath>

#include "cogsr/dsp/filter.hpp"
#include "cogsr/error.hpp"

namespace cogsr::dsp {

void validate(const DegradationSpec& d, int sample_rate) {
  const double nyquist = 0.5 * sample_rate;
  if (!(d.cutoff_hz > 0.0 && d.cutoff_hz <= nyquist)) {
    throw ValidationError("degradation cutoff " + std::to_string(d.cutoff_hz) + " Hz outside (0, " +
                          std::to_string(nyquist) + "]");
  }
  if (std::isnan(d.snr_db) || d.snr_db == -kNoNoise) throw ValidationError("degradation snr_db must be a number or +inf");
}

Degraded degrade(const Waveform& w, const DegradationSpec& d) {
  validate(d, w.sample_rate);
  Degraded out{w, d, 0};
  if (d.cutoff_hz < w.nyquist()) out.audio = lowpass(w, d.cutoff_hz);
  if (!std::isinf(d.snr_db) && !w.samples.empty()) {
    const auto noise = make_noise(d.noise_kind, w.size(), w.sample_rate, d.rng_seed);
    out.audio = add_noise_at_snr(out.audio, noise, d.snr_db);
  }
  out.clipped = clip_in_place(out.audio);
  return out;
}

}  // namespace cogsr::dsp
