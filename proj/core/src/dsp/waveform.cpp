#include "cogsr/dsp/waveform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "cogsr/error.hpp"

namespace cogsr::dsp {

double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

double peak_abs(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p = std::max(p, std::abs(v));
  return p;
}

std::size_t clip_in_place(Waveform& w) {
  std::size_t clipped = 0;
  for (double& v : w.samples) {
    if (v > 1.0) {
      v = 1.0;
      ++clipped;
    } else if (v < -1.0) {
      v = -1.0;
      ++clipped;
    }
  }
  return clipped;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) os.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::ostream& os, std::uint16_t v) {
  os.put(static_cast<char>(v & 0xFF));
  os.put(static_cast<char>((v >> 8) & 0xFF));
}

std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

}  // namespace

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw ValidationError("write_wav: sample rate must be positive");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  os.write("RIFF", 4);
  put_u32(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put_u32(os, 16);
  put_u16(os, 1);  // PCM
  put_u16(os, 1);  // mono
  put_u32(os, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(os, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(os, 2);
  put_u16(os, 16);
  os.write("data", 4);
  put_u32(os, data_bytes);
  for (double v : w.samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    const auto code = static_cast<std::int16_t>(std::lround(c * 32767.0));
    put_u16(os, static_cast<std::uint16_t>(code));
  }
  if (!os) throw IoError("failed writing " + path.string());
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw ValidationError("not a RIFF/WAVE file: " + path.string());
  }
  Waveform w;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t len = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) throw ValidationError("truncated WAV chunk in " + path.string());
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw ValidationError("bad fmt chunk in " + path.string());
      const std::uint16_t format = get_u16(bytes.data() + body);
      const std::uint16_t channels = get_u16(bytes.data() + body + 2);
      w.sample_rate = static_cast<int>(get_u32(bytes.data() + body + 4));
      const std::uint16_t bits = get_u16(bytes.data() + body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw ValidationError("only 16-bit PCM mono WAV is supported: " + path.string());
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw ValidationError("data chunk before fmt chunk in " + path.string());
      w.samples.resize(len / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        const auto code = static_cast<std::int16_t>(get_u16(bytes.data() + body + 2 * i));
        w.samples[i] = code / 32767.0;
      }
      return w;
    }
    pos = body + len + (len & 1u);
  }
  throw ValidationError("WAV file has no data chunk: " + path.string());
}

}  // namespace cogsr::dsp
