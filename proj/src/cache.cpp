// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/cache.hpp"

#include "blackspectrum/errors.hpp"
#include "blackspectrum/io.hpp"

namespace blackspectrum {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sanitize_path_component(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? std::string("_") : out;
}

std::string CacheStore::key_for(const json& key_inputs) {
  return sha256_hex(key_inputs.dump());
}

fs::path CacheStore::entry_path(const std::string& namespace_id,
                                const std::string& key) const {
  return root_ / sanitize_path_component(namespace_id) / key.substr(0, 2) / (key + ".json");
}

std::optional<json> CacheStore::lookup(const std::string& namespace_id,
                                       const std::string& key) const {
  fs::path path = entry_path(namespace_id, key);
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  try {
    return json::parse(read_file(path));
  } catch (...) {
    return std::nullopt;
  }
}

void CacheStore::store(const std::string& namespace_id, const std::string& key,
                       const json& payload) const {
  atomic_write_file(entry_path(namespace_id, key), payload.dump() + "\n");
}

}  // namespace blackspectrum
