#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace cogsr::dsp {

bool is_power_of_two(std::size_t n) noexcept;
std::size_t next_power_of_two(std::size_t n) noexcept;

// One-sided spectrum (n/2 + 1 bins) of a real frame, unnormalized.
std::vector<std::complex<double>> rfft(const std::vector<double>& frame);

// Inverse of rfft for a length-n real signal (includes the 1/n factor).
std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum, std::size_t n);

}  // namespace cogsr::dsp
