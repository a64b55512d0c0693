#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "cogsr/conditioning/cot.hpp"

namespace cogsr::conditioning {

struct CachedRecord {
  CoTRecord record;
  std::string source = "oracle";  // "oracle" or "corrupted(p)"

  bool operator==(const CachedRecord&) const = default;
};

// Utterance id -> record, persisted as JSON lines:
// {"id", "gender", "emotion", "noise", "content", "quality", "source"[, "extra"]}.
// put() appends a line; on load the last line for an id wins. One writer at a time.
class ConditioningCache {
 public:
  // Loads the store when the file exists; otherwise starts empty.
  explicit ConditioningCache(std::filesystem::path path);

  void put(const std::string& id, const CoTRecord& record, const std::string& source = "oracle");
  // std::nullopt when the id is absent.
  std::optional<CachedRecord> get(const std::string& id) const;

  std::size_t size() const noexcept { return entries_.size(); }
  const std::filesystem::path& path() const noexcept { return path_; }
  const std::map<std::string, CachedRecord>& entries() const noexcept { return entries_; }

  // Rewrites the file with one line per id, sorted by id.
  void compact() const;

 private:
  std::filesystem::path path_;
  std::map<std::string, CachedRecord> entries_;
};

}  // namespace cogsr::conditioning
