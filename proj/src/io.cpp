// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "blackspectrum/errors.hpp"

namespace blackspectrum {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return out.str();
}

void atomic_write_file(const fs::path& path, const std::string& content) {
  fs::path dir = path.parent_path();
  std::error_code ec;
  if (!dir.empty()) {
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }

  static std::random_device entropy;
  fs::path tmp = path;
  tmp += ".tmp-" + std::to_string(entropy());

  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.string().c_str());
      throw IoError("write failed: " + tmp.string());
    }
  }

  fs::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.string().c_str());
    throw IoError("rename to " + path.string() + " failed: " + ec.message());
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

}  // namespace blackspectrum
