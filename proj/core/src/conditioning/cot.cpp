#include "cogsr/conditioning/cot.hpp"

#include <array>
#include <optional>

#include "cogsr/util.hpp"

namespace cogsr::conditioning {

std::string to_string(Gender g) {
  switch (g) {
    case Gender::male: return "Male";
    case Gender::female: return "Female";
    case Gender::unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 5> kKeys = {"Gender", "Emotion", "Noise", "Content", "Quality"};

std::string missing_message(const std::vector<std::string>& keys) {
  return "CoT record is missing " + std::to_string(keys.size()) + " required key(s): " + join(keys, ", ");
}

std::string collapse(std::string_view s) { return join(split_whitespace(s), " "); }

std::vector<std::string> split_quality(std::string_view value) {
  std::vector<std::string> out;
  if (trim(value) == kEmptyMarker) return out;
  std::size_t b = 0;
  while (b <= value.size()) {
    const std::size_t e = std::min(value.find(',', b), value.size());
    auto part = collapse(value.substr(b, e - b));
    if (!part.empty()) out.push_back(std::move(part));
    b = e + 1;
  }
  return out;
}

}  // namespace

CoTMissingKeys::CoTMissingKeys(std::vector<std::string> keys)
    : ValidationError(missing_message(keys)), keys_(std::move(keys)) {}

CoTRecord parse_cot(std::string_view text) {
  // One trailing period closes the record; it is not part of the last value.
  std::string_view body = text;
  {
    std::size_t e = body.size();
    while (e > 0 && std::isspace(static_cast<unsigned char>(body[e - 1]))) --e;
    if (e > 0 && body[e - 1] == '.') body = body.substr(0, e - 1);
  }
  if (trim(body).empty()) throw CoTSyntaxError("empty CoT text", 0);

  CoTRecord r;
  std::array<std::optional<std::string>, kKeys.size()> seen;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
  };
  while (true) {
    skip_ws();
    if (i >= body.size()) break;
    if (body[i] != '[') throw CoTSyntaxError("expected '['", i);
    const std::size_t key_begin = ++i;
    while (i < body.size() && body[i] != ']' && body[i] != '[' && body[i] != ';') ++i;
    if (i >= body.size() || body[i] != ']') throw CoTSyntaxError("unterminated key", key_begin - 1);
    const std::string key = trim(body.substr(key_begin, i - key_begin));
    if (key.empty()) throw CoTSyntaxError("empty key", key_begin);
    ++i;
    skip_ws();
    if (i >= body.size() || body[i] != ':') throw CoTSyntaxError("expected ':' after [" + key + "]", i);
    ++i;
    const std::size_t value_begin = i;
    while (i < body.size() && body[i] != ';') ++i;
    const std::string value = trim(body.substr(value_begin, i - value_begin));
    if (i < body.size()) ++i;  // consume ';'

    const std::string lower = to_lower(key);
    std::size_t slot = kKeys.size();
    for (std::size_t k = 0; k < kKeys.size(); ++k) {
      if (lower == to_lower(kKeys[k])) slot = k;
    }
    if (slot == kKeys.size()) {
      r.extra.emplace_back(key, collapse(value));
      continue;
    }
    if (seen[slot]) throw CoTSyntaxError("duplicate key [" + key + "]", key_begin - 1);
    if (value.empty()) {
      const std::string hint = slot >= 3 ? "; write " + std::string(kEmptyMarker) + " for an empty list" : "";
      throw CoTSyntaxError("empty value for [" + key + "]" + hint, value_begin);
    }
    seen[slot] = value;
  }

  std::vector<std::string> missing;
  for (std::size_t k = 0; k < kKeys.size(); ++k) {
    if (!seen[k]) missing.emplace_back(kKeys[k]);
  }
  if (!missing.empty()) throw CoTMissingKeys(std::move(missing));

  const std::string g = to_lower(*seen[0]);
  if (g == "male") r.gender = Gender::male;
  else if (g == "female") r.gender = Gender::female;
  else if (g == "unknown") r.gender = Gender::unknown;
  else throw ValidationError("unrecognised gender '" + *seen[0] + "' (expected Male, Female or Unknown)");
  r.emotion = collapse(*seen[1]);
  r.noise = collapse(*seen[2]);
  if (*seen[3] != kEmptyMarker) r.content = split_whitespace(*seen[3]);
  r.quality = split_quality(*seen[4]);
  return r;
}

std::string serialize_cot(const CoTRecord& r) {
  std::string out;
  auto field = [&](std::string_view key, const std::string& value) {
    if (!out.empty()) out += "; ";
    out += "[";
    out += key;
    out += "]: ";
    out += value;
  };
  field("Gender", to_string(r.gender));
  field("Emotion", r.emotion);
  field("Noise", r.noise);
  field("Content", r.content.empty() ? std::string(kEmptyMarker) : join(r.content, " "));
  field("Quality", r.quality.empty() ? std::string(kEmptyMarker) : join(r.quality, ", "));
  for (const auto& [k, v] : r.extra) field(k, v);
  return out;
}

}  // namespace cogsr::conditioning
