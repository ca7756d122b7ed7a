#include "nirattack/scheme.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nirattack/error.hpp"

namespace nirattack {

using nlohmann::json;

SegmentScheme::SegmentScheme(std::string id, int k, std::vector<std::string> names,
                             std::set<SegmentId> forced_black, std::optional<SegmentId> head)
    : id_(std::move(id)),
      k_(k),
      names_(std::move(names)),
      forced_black_(std::move(forced_black)),
      head_(head) {
  if (k_ < 1 || k_ > kMaxSegments)
    throw ConfigError("scheme '" + id_ + "': K must be in [1, 255], got " + std::to_string(k_));
  if (names_.size() != static_cast<std::size_t>(k_))
    throw ConfigError("scheme '" + id_ + "': expected " + std::to_string(k_) + " names, got " +
                      std::to_string(names_.size()));
  for (SegmentId s : forced_black_)
    if (s >= k_)
      throw ConfigError("scheme '" + id_ + "': forced_black id " + std::to_string(s) +
                        " out of range");
  if (head_ && *head_ >= k_)
    throw ConfigError("scheme '" + id_ + "': head id out of range");
}

SegmentScheme SegmentScheme::uniform(std::string id, int k, std::set<SegmentId> forced_black,
                                     std::optional<SegmentId> head) {
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) names.push_back("seg" + std::to_string(i));
  return SegmentScheme(std::move(id), k, std::move(names), std::move(forced_black), head);
}

std::vector<SegmentId> SegmentScheme::free_segments() const {
  std::vector<SegmentId> out;
  for (int i = 0; i < k_; ++i)
    if (!is_forced(i)) out.push_back(static_cast<SegmentId>(i));
  return out;
}

std::string SegmentScheme::to_json() const {
  json j;
  j["id"] = id_;
  j["K"] = k_;
  j["names"] = names_;
  j["forced_black"] = std::vector<SegmentId>(forced_black_.begin(), forced_black_.end());
  if (head_) j["head"] = *head_;
  return j.dump(2);
}

SegmentScheme SegmentScheme::from_json(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
    std::set<SegmentId> forced;
    for (int s : j.at("forced_black").get<std::vector<int>>()) {
      if (s < 0) throw ConfigError(source + ": negative forced_black id");
      forced.insert(static_cast<SegmentId>(s));
    }
    std::optional<SegmentId> head;
    if (j.contains("head") && !j["head"].is_null()) {
      int h = j["head"].get<int>();
      if (h < 0) throw ConfigError(source + ": negative head id");
      head = static_cast<SegmentId>(h);
    }
    return SegmentScheme(j.at("id").get<std::string>(), j.at("K").get<int>(),
                         j.at("names").get<std::vector<std::string>>(), std::move(forced), head);
  } catch (const json::exception& e) {
    throw ConfigError(source + ": invalid scheme: " + e.what());
  }
}

SegmentScheme load_scheme(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scheme file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return SegmentScheme::from_json(ss.str(), path.string());
}

void save_scheme(const std::filesystem::path& path, const SegmentScheme& scheme) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << scheme.to_json() << '\n';
}

}  // namespace nirattack
