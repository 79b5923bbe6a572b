#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>

#include "judgeforge/gateway/request.hpp"

namespace judgeforge::gateway {

// Content-addressed completion store. Always memoizes in memory; when a
// directory is given, entries also persist as <dir>/<hh>/<hex>.json and are
// written via temp file + rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> dir = std::nullopt);

  std::optional<Completion> get(const CacheKey& key);
  void put(const CacheKey& key, const Completion& completion);

  std::size_t memory_size() const;

 private:
  std::filesystem::path entry_path(const CacheKey& key) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::string, Completion> memory_;
};

}  // namespace judgeforge::gateway
