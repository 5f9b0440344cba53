// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace blackspectrum {

class CacheStore;

using LatentVector = std::vector<double>;

enum class EncoderKind { deterministic, remote };

struct EncoderSpec {
  // Recorded on anchors and axes; scoring refuses to mix encoders.
  std::string id = "hash-v1";
  EncoderKind kind = EncoderKind::deterministic;
  int dim = 256;
  // Remote encoders only.
  std::string endpoint;
  // Name of the environment variable holding the bearer token. Only the
  // name is ever stored or logged.
  std::string auth_env;
  int batch_size = 16;
  int timeout_ms = 30000;
};

double dot(const LatentVector& a, const LatentVector& b);  // throws DimensionMismatch
double l2_norm(const LatentVector& v);
double cosine_similarity(const LatentVector& a, const LatentVector& b);  // throws ZeroNorm

// Deterministic char n-gram (n = 3..5) embedding via signed feature
// hashing, L2-normalized. Runs become start/end sensitive through two
// bytes of padding on each side. Throws EmptyText on empty input.
LatentVector hash_embed(std::string_view text, int dim);

// Removes the component of the trace embedding along the sequence
// embedding: e~ = e_r - (<e_r, e_s> / |e_s|^2) e_s. A sequence embedding
// with norm below tol leaves the trace unchanged.
LatentVector denoise(const LatentVector& trace, const LatentVector& sequence,
                     double tol = 1e-12);

class Embedder {
 public:
  virtual ~Embedder() = default;
  const EncoderSpec& spec() const { return spec_; }
  LatentVector embed(const std::string& text);
  virtual std::vector<LatentVector> embed_batch(const std::vector<std::string>& texts) = 0;

 protected:
  explicit Embedder(EncoderSpec spec) : spec_(std::move(spec)) {}
  EncoderSpec spec_;
};

// cache (optional) is consulted for remote encoders only; the deterministic
// encoder recomputes. offline forbids network: a remote embed that misses
// the cache throws OfflineViolation.
std::unique_ptr<Embedder> make_embedder(const EncoderSpec& spec,
                                        const CacheStore* cache = nullptr,
                                        bool offline = false);

}  // namespace blackspectrum
