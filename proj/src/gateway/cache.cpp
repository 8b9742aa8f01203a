#include <atomic>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "s2a/errors.hpp"
#include "s2a/gateway.hpp"

namespace s2a {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json entry_to_json(const CacheEntry& e) {
  return json{{"key", e.key},       {"backend_id", e.backend_id}, {"model_id", e.model_id},
              {"created", e.created_unix}, {"prompt", e.prompt},   {"text", e.text}};
}

std::optional<CacheEntry> read_entry(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  try {
    const json j = json::parse(in);
    return CacheEntry{j.at("key").get<std::string>(),       j.at("backend_id").get<std::string>(),
                      j.at("model_id").get<std::string>(),  j.at("created").get<std::int64_t>(),
                      j.at("prompt").get<std::string>(),    j.at("text").get<std::string>()};
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

std::string temp_suffix() {
  static std::atomic<std::uint64_t> counter{0};
  std::ostringstream s;
  s << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter++;
  return s.str();
}

}  // namespace

bool PurgeFilter::matches(const CacheEntry& e) const {
  if (model_id && e.model_id != *model_id) return false;
  if (created_before_unix && e.created_unix >= *created_before_unix) return false;
  return true;
}

ResponseCache::ResponseCache(std::optional<fs::path> dir) : dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    fs::create_directories(*dir_, ec);
    if (ec) throw IoError("cannot create cache directory " + dir_->string() + ": " + ec.message());
  }
}

fs::path ResponseCache::path_for(const std::string& key) const {
  return *dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CacheEntry> ResponseCache::lookup(const std::string& key) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  auto entry = read_entry(path_for(key));
  if (entry && entry->key != key) return std::nullopt;
  return entry;
}

void ResponseCache::store(const CacheEntry& entry) {
  {
    std::lock_guard lock(mu_);
    memory_[entry.key] = entry;
  }
  if (!dir_) return;
  const fs::path target = path_for(entry.key);
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + temp_suffix();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache entry " + tmp.string());
    out << entry_to_json(entry).dump();
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot commit cache entry " + target.string() + ": " + ec.message());
}

std::size_t ResponseCache::size() const {
  if (!dir_) {
    std::lock_guard lock(mu_);
    return memory_.size();
  }
  return list_cache(*dir_).size();
}

std::vector<CacheEntry> list_cache(const fs::path& dir) {
  std::vector<CacheEntry> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& item : fs::recursive_directory_iterator(dir, ec)) {
    if (!item.is_regular_file() || item.path().extension() != ".json") continue;
    if (auto e = read_entry(item.path())) out.push_back(std::move(*e));
  }
  std::sort(out.begin(), out.end(), [](const CacheEntry& a, const CacheEntry& b) { return a.key < b.key; });
  return out;
}

std::size_t purge_cache(const fs::path& dir, const PurgeFilter& filter) {
  std::size_t purged = 0;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return 0;
  std::vector<fs::path> victims;
  for (const auto& item : fs::recursive_directory_iterator(dir, ec)) {
    if (!item.is_regular_file() || item.path().extension() != ".json") continue;
    auto e = read_entry(item.path());
    if (e && filter.matches(*e)) victims.push_back(item.path());
  }
  for (const auto& p : victims) {
    if (fs::remove(p, ec)) ++purged;
  }
  return purged;
}

}  // namespace s2a
