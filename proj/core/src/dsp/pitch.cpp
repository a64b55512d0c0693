#include "cogsr/dsp/pitch.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "cogsr/error.hpp"

namespace cogsr::dsp {

PitchTrack track_pitch(const Waveform& w, const PitchTrackerConfig& config) {
  if (w.sample_rate < 8000) throw ValidationError("pitch tracking needs a sample rate of at least 8 kHz");
  const double sr = w.sample_rate;
  const auto win = static_cast<std::size_t>(std::lround(config.frame_s * sr));
  const auto hop = static_cast<std::size_t>(std::lround(config.hop_s * sr));
  const auto lag_lo = static_cast<std::size_t>(std::floor(sr / config.max_hz));
  const auto lag_hi = static_cast<std::size_t>(std::ceil(sr / config.min_hz));
  PitchTrack track;
  track.hop_s = config.hop_s;
  const auto& x = w.samples;
  const std::size_t span = win + lag_hi + 1;
  if (x.size() < span || hop == 0) return track;

  std::vector<double> energy(x.size() + 1, 0.0);  // prefix sums of x^2
  for (std::size_t i = 0; i < x.size(); ++i) energy[i + 1] = energy[i] + x[i] * x[i];
  auto window_energy = [&](std::size_t s) { return energy[s + win] - energy[s]; };

  std::vector<double> r(lag_hi + 2, 0.0);
  for (std::size_t s = 0; s + span <= x.size(); s += hop) {
    const double e0 = window_energy(s);
    double f0 = 0.0;
    bool voiced = false;
    if (e0 > 1e-12) {
      for (std::size_t lag = lag_lo - 1; lag <= lag_hi + 1; ++lag) {
        const auto n = static_cast<Eigen::Index>(win);
        const double acc = Eigen::Map<const Eigen::VectorXd>(&x[s], n).dot(Eigen::Map<const Eigen::VectorXd>(&x[s + lag], n));
        const double el = window_energy(s + lag);
        r[lag] = el > 1e-12 ? acc / std::sqrt(e0 * el) : 0.0;
      }
      double best = -1.0;
      for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
        if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) best = std::max(best, r[lag]);
      }
      if (best >= config.voicing_threshold) {
        std::size_t pick = 0;
        for (std::size_t lag = lag_lo; lag <= lag_hi; ++lag) {
          if (r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1] && r[lag] >= best - config.peak_tolerance) {
            pick = lag;
            break;
          }
        }
        const double ym = r[pick - 1], y0 = r[pick], yp = r[pick + 1];
        const double denom = ym - 2.0 * y0 + yp;
        const double delta = denom < 0.0 ? std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5) : 0.0;
        f0 = sr / (static_cast<double>(pick) + delta);
        voiced = f0 >= config.min_hz && f0 <= config.max_hz;
        if (!voiced) f0 = 0.0;
      }
    }
    track.f0_hz.push_back(f0);
    track.voiced.push_back(voiced ? 1 : 0);
  }
  return track;
}

PitchStats pitch_stats(const PitchTrack& t) {
  std::vector<double> f;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.voiced[i]) f.push_back(t.f0_hz[i]);
  }
  PitchStats st;
  if (f.empty()) return st;
  std::sort(f.begin(), f.end());
  const std::size_t m = f.size();
  st.median_f0_hz = m % 2 ? f[m / 2] : 0.5 * (f[m / 2 - 1] + f[m / 2]);
  double mu = 0.0;
  for (double v : f) mu += std::log(v);
  mu /= static_cast<double>(m);
  double var = 0.0;
  for (double v : f) var += (std::log(v) - mu) * (std::log(v) - mu);
  st.log_f0_std = std::sqrt(var / static_cast<double>(m));
  st.voiced_fraction = static_cast<double>(m) / static_cast<double>(t.size());
  return st;
}

}  // namespace cogsr::dsp
