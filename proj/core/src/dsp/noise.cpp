#include "cogsr/dsp/noise.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cogsr/dsp/fft.hpp"
#include "cogsr/error.hpp"

namespace cogsr::dsp {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::pink: return "pink";
    case NoiseKind::bursts: return "bursts";
    case NoiseKind::hum: return "hum";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(std::string_view name) {
  if (name == "pink") return NoiseKind::pink;
  if (name == "bursts") return NoiseKind::bursts;
  if (name == "hum") return NoiseKind::hum;
  throw ValidationError("unknown noise kind '" + std::string(name) + "' (expected pink, bursts or hum)");
}

namespace {

std::vector<double> gaussian(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

std::vector<double> pink(std::size_t n, int sample_rate, std::mt19937_64& rng) {
  const std::size_t m = next_power_of_two(std::max<std::size_t>(n, 2));
  auto spec = rfft(gaussian(m, rng));
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(m);
  spec[0] = 0.0;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double f = std::max(20.0, static_cast<double>(k) * bin_hz);
    spec[k] /= std::sqrt(f);
  }
  auto x = irfft(spec, m);
  x.resize(n);
  return x;
}

std::vector<double> bursts(std::size_t n, int sample_rate, std::mt19937_64& rng) {
  auto x = gaussian(n, rng);
  std::vector<double> env(n, 0.05);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double sr = sample_rate;
  const auto ramp = static_cast<std::size_t>(0.01 * sr);
  std::size_t pos = static_cast<std::size_t>(u(rng) * 0.2 * sr);
  while (pos < n) {
    const auto len = static_cast<std::size_t>((0.05 + 0.15 * u(rng)) * sr);
    const double level = 0.5 + 0.5 * u(rng);
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      double g = level;
      if (i < ramp) g *= static_cast<double>(i) / ramp;
      if (len - i < ramp) g *= static_cast<double>(len - i) / ramp;
      env[pos + i] = std::max(env[pos + i], g);
    }
    pos += len + static_cast<std::size_t>((0.05 + 0.2 * u(rng)) * sr);
  }
  for (std::size_t i = 0; i < n; ++i) x[i] *= env[i];
  return x;
}

std::vector<double> hum(std::size_t n, int sample_rate, std::mt19937_64& rng) {
  auto x = gaussian(n, rng);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  const double base = 50.0;
  std::vector<double> phase;
  for (int h = 1; h * base < 1000.0; ++h) phase.push_back(u(rng));
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    double s = 0.0;
    for (std::size_t h = 0; h < phase.size(); ++h) {
      const double k = static_cast<double>(h + 1);
      s += std::sin(2.0 * std::numbers::pi * base * k * t + phase[h]) / k;
    }
    x[i] = s + 0.1 * x[i];
  }
  return x;
}

}  // namespace

Waveform make_noise(NoiseKind kind, std::size_t length, int sample_rate, std::uint64_t seed) {
  if (length == 0) throw ValidationError("noise length must be positive");
  if (sample_rate <= 0) throw ValidationError("sample rate must be positive");
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(kind) + 1)));
  std::vector<double> x;
  switch (kind) {
    case NoiseKind::pink: x = pink(length, sample_rate, rng); break;
    case NoiseKind::bursts: x = bursts(length, sample_rate, rng); break;
    case NoiseKind::hum: x = hum(length, sample_rate, rng); break;
  }
  const double p = mean_power(x);
  if (p > 0.0) {
    const double g = 1.0 / std::sqrt(p);
    for (double& v : x) v *= g;
  }
  return Waveform{std::move(x), sample_rate};
}

double noise_scale_for_snr(double signal_power, double noise_power, double snr_db) {
  if (!(signal_power > 0.0)) throw ValidationError("cannot set SNR on a silent signal");
  if (!(noise_power > 0.0)) throw ValidationError("cannot set SNR with silent noise");
  return std::sqrt(signal_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
}

Waveform add_noise_at_snr(const Waveform& w, const Waveform& noise, double snr_db) {
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw ValidationError("snr_db must be a number or +inf");
  }
  if (w.sample_rate != noise.sample_rate) {
    throw ValidationError("signal and noise sample rates differ: " + std::to_string(w.sample_rate) + " vs " +
                          std::to_string(noise.sample_rate));
  }
  if (std::isinf(snr_db)) return w;
  if (noise.samples.empty()) throw ValidationError("empty noise");
  const std::size_t n = w.size();
  std::vector<double> fitted(n);
  for (std::size_t i = 0; i < n; ++i) fitted[i] = noise.samples[i % noise.size()];
  const double g = noise_scale_for_snr(mean_power(w.samples), mean_power(fitted), snr_db);
  Waveform out{w.samples, w.sample_rate};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] += g * fitted[i];
  return out;
}

}  // namespace cogsr::dsp
