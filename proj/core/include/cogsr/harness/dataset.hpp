#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cogsr/dsp/degrade.hpp"
#include "cogsr/dsp/synth.hpp"
#include "cogsr/eval/corpus.hpp"
#include "cogsr/eval/speaker.hpp"
#include "cogsr/harness/config.hpp"

namespace cogsr::harness {

// One line of a corpus manifest (JSON-lines). wav_path is relative to the
// manifest's directory.
struct ManifestEntry {
  std::string id;
  std::string wav_path;
  std::string speaker;
  std::string emotion;
  double f0_hz = 0.0;
  std::vector<int> content_tokens;
  std::vector<std::pair<double, double>> slot_boundaries_s;
  dsp::DegradationSpec degradation;

  dsp::UtteranceLabels labels() const;
};

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
// Throws ValidationError for malformed lines or duplicate ids.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

// Loads every WAV of a manifest as evaluation items.
std::vector<eval::EvalItem> load_eval_items(const std::filesystem::path& manifest);

// Random degradation: cutoff uniform on the configured grid, clean with
// probability clean_fraction, otherwise SNR uniform in range with a uniform noise kind.
dsp::DegradationSpec sample_degradation(const DegradationConfig& c, std::mt19937_64& rng);
std::vector<double> cutoff_grid(const DegradationConfig& c);

struct DataPaths {
  std::filesystem::path root;
  std::filesystem::path manifest(const std::string& split) const { return root / (split + ".jsonl"); }
  std::filesystem::path cot_cache() const { return root / "cot_cache.jsonl"; }
  std::filesystem::path speaker_stats() const { return root / "speaker_stats.json"; }
  std::filesystem::path summary() const { return root / "dataset.json"; }
};

void save_speaker_stats(const std::filesystem::path& path, const eval::SpeakerEmbeddingStats& s,
                        const std::string& fingerprint);
eval::SpeakerEmbeddingStats load_speaker_stats(const std::filesystem::path& path);

}  // namespace cogsr::harness
