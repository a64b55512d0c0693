#include "cogsr/harness/dataset.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "cogsr/error.hpp"

namespace cogsr::harness {

using Json = nlohmann::ordered_json;

dsp::UtteranceLabels ManifestEntry::labels() const {
  dsp::UtteranceLabels l;
  l.tokens = content_tokens;
  l.f0_hz = f0_hz;
  l.slots = slot_boundaries_s;
  return l;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write manifest: " + path.string());
  for (const auto& e : entries) {
    Json slots = Json::array();
    for (const auto& [s, t] : e.slot_boundaries_s) slots.push_back(Json::array({s, t}));
    const auto& d = e.degradation;
    Json j;
    j["id"] = e.id;
    j["wav_path"] = e.wav_path;
    j["f0_hz"] = e.f0_hz;
    j["content_tokens"] = e.content_tokens;
    j["slot_boundaries_s"] = slots;
    j["degradation"] = {{"cutoff_hz", d.cutoff_hz},
                        {"snr_db", std::isfinite(d.snr_db) ? Json(d.snr_db) : Json(nullptr)},
                        {"noise_kind", dsp::to_string(d.noise_kind)},
                        {"seed", d.rng_seed}};
    j["speaker"] = e.speaker;
    j["emotion"] = e.emotion;
    os << j.dump() << '\n';
  }
  if (!os) throw IoError("failed writing manifest: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest: " + path.string());
  std::vector<ManifestEntry> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = Json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.wav_path = j.at("wav_path").get<std::string>();
      e.f0_hz = j.at("f0_hz").get<double>();
      e.content_tokens = j.at("content_tokens").get<std::vector<int>>();
      for (const auto& s : j.at("slot_boundaries_s")) e.slot_boundaries_s.emplace_back(s.at(0), s.at(1));
      const auto& d = j.at("degradation");
      e.degradation.cutoff_hz = d.at("cutoff_hz").get<double>();
      e.degradation.snr_db = d.at("snr_db").is_null() ? dsp::kNoNoise : d.at("snr_db").get<double>();
      e.degradation.noise_kind = dsp::noise_kind_from_string(d.at("noise_kind").get<std::string>());
      e.degradation.rng_seed = d.at("seed").get<std::uint64_t>();
      e.speaker = j.value("speaker", std::string());
      e.emotion = j.value("emotion", std::string("Neutral"));
      if (e.slot_boundaries_s.size() != e.content_tokens.size()) {
        throw ValidationError("slot count differs from token count");
      }
      if (!ids.insert(e.id).second) throw ValidationError("duplicate id " + e.id);
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + ex.what());
    } catch (const ValidationError& ex) {
      throw ValidationError(path.string() + ":" + std::to_string(n) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<eval::EvalItem> load_eval_items(const std::filesystem::path& manifest) {
  std::vector<eval::EvalItem> items;
  for (const auto& e : read_manifest(manifest)) {
    items.push_back({e.id, dsp::read_wav(manifest.parent_path() / e.wav_path), e.labels(), e.emotion});
  }
  return items;
}

std::vector<double> cutoff_grid(const DegradationConfig& c) {
  std::vector<double> grid;
  for (double f = c.cutoff_hz[0]; f <= c.cutoff_hz[1] + 1e-9; f += c.cutoff_grid_hz) grid.push_back(f);
  return grid;
}

dsp::DegradationSpec sample_degradation(const DegradationConfig& c, std::mt19937_64& rng) {
  const auto grid = cutoff_grid(c);
  dsp::DegradationSpec d;
  d.cutoff_hz = grid[std::uniform_int_distribution<std::size_t>(0, grid.size() - 1)(rng)];
  const bool clean = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < c.clean_fraction;
  const double snr = std::uniform_real_distribution<double>(c.snr_db[0], c.snr_db[1])(rng);
  const auto kind = c.noise_kinds[std::uniform_int_distribution<std::size_t>(0, c.noise_kinds.size() - 1)(rng)];
  d.snr_db = clean ? dsp::kNoNoise : snr;
  d.noise_kind = kind;
  d.rng_seed = rng();
  return d;
}

void save_speaker_stats(const std::filesystem::path& path, const eval::SpeakerEmbeddingStats& s,
                        const std::string& fingerprint) {
  Json j;
  j["fingerprint"] = fingerprint;
  j["mean"] = s.mean;
  j["std"] = s.std;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write speaker stats: " + path.string());
  os << j.dump(2) << '\n';
}

eval::SpeakerEmbeddingStats load_speaker_stats(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open speaker stats: " + path.string());
  try {
    const auto j = Json::parse(is);
    eval::SpeakerEmbeddingStats s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
    if (s.mean.size() != s.std.size()) throw ValidationError("speaker stats mean/std sizes differ");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed speaker stats " + path.string() + ": " + e.what());
  }
}

}  // namespace cogsr::harness
