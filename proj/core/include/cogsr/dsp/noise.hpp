#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "cogsr/dsp/waveform.hpp"

namespace cogsr::dsp {

// Procedural noise textures.
enum class NoiseKind { pink, bursts, hum };

std::string to_string(NoiseKind kind);
// Throws ValidationError for unknown names.
NoiseKind noise_kind_from_string(std::string_view name);

// Deterministic in (kind, length, sample_rate, seed). Output has unit mean power.
Waveform make_noise(NoiseKind kind, std::size_t length, int sample_rate, std::uint64_t seed);

// Noise gain that yields the requested SNR for the given powers.
double noise_scale_for_snr(double signal_power, double noise_power, double snr_db);

// Adds noise scaled to the target SNR over the whole signal. Noise shorter than
// the signal is looped, longer noise is cropped from its start. snr_db = +inf
// returns the input unchanged.
Waveform add_noise_at_snr(const Waveform& w, const Waveform& noise, double snr_db);

}  // namespace cogsr::dsp
