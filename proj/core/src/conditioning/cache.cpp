#include "cogsr/conditioning/cache.hpp"

#include <fstream>

#include <json.hpp>

#include "cogsr/error.hpp"
#include "cogsr/util.hpp"

namespace cogsr::conditioning {

namespace {

using Json = nlohmann::ordered_json;

Json to_json(const std::string& id, const CachedRecord& c) {
  Json j;
  j["id"] = id;
  j["gender"] = to_string(c.record.gender);
  j["emotion"] = c.record.emotion;
  j["noise"] = c.record.noise;
  j["content"] = c.record.content;
  j["quality"] = c.record.quality;
  j["source"] = c.source;
  if (!c.record.extra.empty()) {
    Json extra = Json::array();
    for (const auto& [k, v] : c.record.extra) extra.push_back(Json::array({k, v}));
    j["extra"] = std::move(extra);
  }
  return j;
}

std::pair<std::string, CachedRecord> from_json(const Json& j) {
  CachedRecord c;
  const std::string g = to_lower(j.at("gender").get<std::string>());
  c.record.gender = g == "male" ? Gender::male : g == "female" ? Gender::female : Gender::unknown;
  c.record.emotion = j.at("emotion").get<std::string>();
  c.record.noise = j.at("noise").get<std::string>();
  c.record.content = j.at("content").get<std::vector<std::string>>();
  c.record.quality = j.at("quality").get<std::vector<std::string>>();
  c.source = j.at("source").get<std::string>();
  if (j.contains("extra")) {
    for (const auto& kv : j["extra"]) c.record.extra.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
  }
  return {j.at("id").get<std::string>(), std::move(c)};
}

}  // namespace

ConditioningCache::ConditioningCache(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream is(path_);
  if (!is) throw IoError("cannot open CoT cache: " + path_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto [id, rec] = from_json(Json::parse(line));
      entries_[id] = std::move(rec);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad CoT cache line " + std::to_string(lineno) + " in " + path_.string() + ": " + e.what());
    }
  }
}

void ConditioningCache::put(const std::string& id, const CoTRecord& record, const std::string& source) {
  if (id.empty()) throw ValidationError("cache id must be non-empty");
  CachedRecord c{record, source};
  std::ofstream os(path_, std::ios::app);
  if (!os) throw IoError("cannot append to CoT cache: " + path_.string());
  os << to_json(id, c).dump() << '\n';
  if (!os) throw IoError("failed writing CoT cache: " + path_.string());
  entries_[id] = std::move(c);
}

std::optional<CachedRecord> ConditioningCache::get(const std::string& id) const {
  const auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ConditioningCache::compact() const {
  std::ofstream os(path_, std::ios::trunc);
  if (!os) throw IoError("cannot rewrite CoT cache: " + path_.string());
  for (const auto& [id, c] : entries_) os << to_json(id, c).dump() << '\n';
  if (!os) throw IoError("failed writing CoT cache: " + path_.string());
}

}  // namespace cogsr::conditioning
