#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cogsr/error.hpp"

namespace cogsr::conditioning {

enum class Gender { male, female, unknown };

std::string to_string(Gender g);  // "Male", "Female", "Unknown"

// Marker written for an empty content or quality list.
inline constexpr std::string_view kEmptyMarker = "(none)";

// Five-field semantic description of an utterance:
// "[Gender]: Male; [Emotion]: Anxious; [Noise]: ...; [Content]: ...; [Quality]: ..."
struct CoTRecord {
  Gender gender = Gender::unknown;
  std::string emotion;
  std::string noise;
  std::vector<std::string> content;
  std::vector<std::string> quality;
  // Keys outside the five fields, in order of appearance, with original spelling.
  std::vector<std::pair<std::string, std::string>> extra;

  bool operator==(const CoTRecord&) const = default;
};

// Bracket/colon syntax broken; offset is the byte position of the problem.
class CoTSyntaxError : public ValidationError {
 public:
  CoTSyntaxError(const std::string& what, std::size_t offset)
      : ValidationError(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Syntax fine but required keys absent.
class CoTMissingKeys : public ValidationError {
 public:
  explicit CoTMissingKeys(std::vector<std::string> keys);
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

// Grammar: "[" Key "]" ":" Value { ";" "[" Key "]" ":" Value } [";"]
// Keys are case-insensitive. Content splits on whitespace, quality on commas;
// one trailing period on the record is ignored. Internal whitespace runs in
// free-text values collapse to one space.
CoTRecord parse_cot(std::string_view text);

// Canonical form: Gender, Emotion, Noise, Content, Quality, then extra keys;
// "; " separators, no trailing period.
std::string serialize_cot(const CoTRecord& r);

inline std::string normalize_cot(std::string_view text) { return serialize_cot(parse_cot(text)); }

}  // namespace cogsr::conditioning
