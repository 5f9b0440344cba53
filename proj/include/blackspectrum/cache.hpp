// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

namespace blackspectrum {

struct CacheStats {
  std::atomic<int64_t> hits{0};
  std::atomic<int64_t> misses{0};
  std::atomic<int64_t> writes{0};
  // Outbound requests actually issued (never incremented on cache hits).
  std::atomic<int64_t> network{0};
};

// Replaces characters outside [A-Za-z0-9._-] with '_' so ids are safe as
// path components.
std::string sanitize_path_component(std::string_view s);

// Content-addressed JSON store. Entries live at
//   <root>/<namespace>/<first two hex chars of key>/<key>.json
// where the key is the SHA-256 of the canonical (sorted-key) serialization
// of the inputs that identify the entry. Writes are atomic (temp + rename),
// so concurrent runs sharing a cache root never observe torn files.
class CacheStore {
 public:
  explicit CacheStore(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  static std::string key_for(const nlohmann::json& key_inputs);

  std::filesystem::path entry_path(const std::string& namespace_id,
                                   const std::string& key) const;

  // A corrupt or unreadable entry counts as a miss; it gets rewritten later.
  std::optional<nlohmann::json> lookup(const std::string& namespace_id,
                                       const std::string& key) const;

  void store(const std::string& namespace_id, const std::string& key,
             const nlohmann::json& payload) const;

 private:
  std::filesystem::path root_;
};

}  // namespace blackspectrum
