// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

namespace blackspectrum {

// Reads a whole file as bytes. Throws IoError if the file cannot be read.
std::string read_file(const std::filesystem::path& path);

// Writes content to a temporary file in the target directory and renames it
// into place, so readers never observe a partially written file. Parent
// directories are created as needed. Throws IoError on failure.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// SHA-256 of arbitrary bytes as lowercase hex.
std::string sha256_hex(std::string_view bytes);

}  // namespace blackspectrum
