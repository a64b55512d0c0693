#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cogsr/conditioning/cot.hpp"

namespace cogsr::conditioning {

// Closed token inventory for the semantic embedding table. Ids 0..6 are
// reserved: five field markers, UNK and NULL. Lookups are case-insensitive.
class Vocabulary {
 public:
  static constexpr int kGenderMarker = 0;
  static constexpr int kEmotionMarker = 1;
  static constexpr int kNoiseMarker = 2;
  static constexpr int kContentMarker = 3;
  static constexpr int kQualityMarker = 4;
  static constexpr int kUnk = 5;
  static constexpr int kNull = 6;
  static constexpr int kReserved = 7;

  Vocabulary();
  // Adds each word (lowercased) once, in the given order, after the reserved ids.
  static Vocabulary build(const std::vector<std::string>& words);
  // Rebuilds from a full word list as returned by words(); validates the reserved prefix.
  static Vocabulary from_words(const std::vector<std::string>& all_words);

  int id(std::string_view word) const;  // kUnk when absent
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::string fingerprint() const;

 private:
  void add(const std::string& w);

  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

// What the semantic path sees.
enum class SemanticMode {
  full,             // all five fields with markers
  transcript_only,  // content marker + content words
  disabled,         // a single NULL token
};

// full: [GENDER, g, EMOTION, e, NOISE, n, CONTENT, c..., QUALITY, q...]
std::vector<int> semantic_token_ids(const CoTRecord& r, const Vocabulary& v, SemanticMode mode = SemanticMode::full);

}  // namespace cogsr::conditioning
