#include "cogsr/conditioning/vocabulary.hpp"

#include <algorithm>

#include "cogsr/error.hpp"
#include "cogsr/util.hpp"

namespace cogsr::conditioning {

namespace {
const std::vector<std::string> kReservedWords = {"<gender>", "<emotion>", "<noise>", "<content>",
                                                 "<quality>", "<unk>",    "<null>"};
}

Vocabulary::Vocabulary() {
  for (const auto& w : kReservedWords) add(w);
}

void Vocabulary::add(const std::string& w) {
  if (index_.contains(w)) return;
  index_.emplace(w, static_cast<int>(words_.size()));
  words_.push_back(w);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const auto& w : words) {
    const auto lw = to_lower(trim(w));
    if (!lw.empty()) v.add(lw);
  }
  return v;
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& all_words) {
  if (all_words.size() < kReservedWords.size() ||
      !std::equal(kReservedWords.begin(), kReservedWords.end(), all_words.begin())) {
    throw ValidationError("vocabulary word list does not start with the reserved tokens");
  }
  Vocabulary v = build({all_words.begin() + static_cast<std::ptrdiff_t>(kReservedWords.size()), all_words.end()});
  if (v.size() != all_words.size()) throw ValidationError("vocabulary word list has duplicates");
  return v;
}

int Vocabulary::id(std::string_view word) const {
  const auto it = index_.find(to_lower(word));
  return it == index_.end() ? kUnk : it->second;
}

std::string Vocabulary::fingerprint() const { return to_hex(fnv1a64(join(words_, "\n"))); }

std::vector<int> semantic_token_ids(const CoTRecord& r, const Vocabulary& v, SemanticMode mode) {
  std::vector<int> ids;
  switch (mode) {
    case SemanticMode::disabled:
      ids.push_back(Vocabulary::kNull);
      break;
    case SemanticMode::transcript_only:
      ids.push_back(Vocabulary::kContentMarker);
      for (const auto& w : r.content) ids.push_back(v.id(w));
      break;
    case SemanticMode::full:
      ids.push_back(Vocabulary::kGenderMarker);
      ids.push_back(v.id(to_string(r.gender)));
      ids.push_back(Vocabulary::kEmotionMarker);
      ids.push_back(v.id(r.emotion));
      ids.push_back(Vocabulary::kNoiseMarker);
      ids.push_back(v.id(r.noise));
      ids.push_back(Vocabulary::kContentMarker);
      for (const auto& w : r.content) ids.push_back(v.id(w));
      ids.push_back(Vocabulary::kQualityMarker);
      for (const auto& q : r.quality) ids.push_back(v.id(q));
      break;
  }
  return ids;
}

}  // namespace cogsr::conditioning
