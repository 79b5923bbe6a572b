#include "judgeforge/gateway/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

namespace judgeforge::gateway {

namespace {
std::atomic<std::uint64_t> g_temp_counter{0};
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

std::filesystem::path ResponseCache::entry_path(const CacheKey& key) const {
  const std::string hex = key.hex();
  return *dir_ / hex.substr(0, 2) / (hex + ".json");
}

std::optional<Completion> ResponseCache::get(const CacheKey& key) {
  const std::string hex = key.hex();
  {
    std::lock_guard lock(mu_);
    if (auto it = memory_.find(hex); it != memory_.end()) return it->second;
  }
  if (!dir_) return std::nullopt;
  std::ifstream in(entry_path(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  Completion c;
  try {
    c = decode_completion(Json::parse(ss.str()));
  } catch (const std::exception&) {
    return std::nullopt;  // corrupt entry is a miss
  }
  std::lock_guard lock(mu_);
  memory_.emplace(hex, c);
  return c;
}

void ResponseCache::put(const CacheKey& key, const Completion& completion) {
  const std::string hex = key.hex();
  {
    std::lock_guard lock(mu_);
    memory_.insert_or_assign(hex, completion);
  }
  if (!dir_) return;
  const auto path = entry_path(key);
  std::filesystem::create_directories(path.parent_path());
  std::ostringstream tmp_name;
  tmp_name << path.filename().string() << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
           << '.' << g_temp_counter.fetch_add(1);
  const auto tmp = path.parent_path() / tmp_name.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return;
    out << encode_completion(completion).dump(-1, ' ', false, Json::error_handler_t::replace);
    if (!out) return;
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) std::filesystem::remove(tmp, ec);
}

std::size_t ResponseCache::memory_size() const {
  std::lock_guard lock(mu_);
  return memory_.size();
}

}  // namespace judgeforge::gateway
