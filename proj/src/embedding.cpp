// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/embedding.hpp"

#include <cmath>
#include <stdexcept>

#include "blackspectrum/cache.hpp"
#include "blackspectrum/errors.hpp"
#include "blackspectrum/io.hpp"
#include "blackspectrum/rng.hpp"
#include "http_util.hpp"

namespace blackspectrum {

using nlohmann::json;

double dot(const LatentVector& a, const LatentVector& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("dot: " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double l2_norm(const LatentVector& v) { return std::sqrt(dot(v, v)); }

double cosine_similarity(const LatentVector& a, const LatentVector& b) {
  double na = l2_norm(a);
  double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) throw ZeroNorm("cosine similarity of a zero vector");
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

LatentVector hash_embed(std::string_view text, int dim) {
  if (text.empty()) throw EmptyText("cannot embed empty text");
  if (dim < 1) throw std::invalid_argument("embedding dim must be >= 1");

  std::string padded;
  padded.reserve(text.size() + 4);
  padded.append("\x02\x02");
  padded.append(text);
  padded.append("\x03\x03");

  LatentVector v(static_cast<size_t>(dim), 0.0);
  std::string_view p(padded);
  for (size_t n = 3; n <= 5; ++n) {
    for (size_t i = 0; i + n <= p.size(); ++i) {
      uint64_t h = mix64(fnv1a64(p.substr(i, n)));
      v[h % static_cast<uint64_t>(dim)] += (h >> 63) ? -1.0 : 1.0;
    }
  }

  double norm = l2_norm(v);
  if (norm == 0.0) {
    // All buckets cancelled (possible only for tiny inputs); fall back to a
    // deterministic one-hot so the result still has unit norm.
    v[mix64(fnv1a64(text)) % static_cast<uint64_t>(dim)] = 1.0;
    return v;
  }
  for (double& x : v) x /= norm;
  return v;
}

LatentVector denoise(const LatentVector& trace, const LatentVector& sequence, double tol) {
  if (trace.size() != sequence.size()) {
    throw DimensionMismatch("denoise: trace dim " + std::to_string(trace.size()) +
                            " vs sequence dim " + std::to_string(sequence.size()));
  }
  double seq_sq = dot(sequence, sequence);
  if (std::sqrt(seq_sq) < tol) return trace;
  double coef = dot(trace, sequence) / seq_sq;
  LatentVector out(trace.size());
  for (size_t i = 0; i < trace.size(); ++i) out[i] = trace[i] - coef * sequence[i];
  return out;
}

LatentVector Embedder::embed(const std::string& text) {
  return embed_batch({text}).front();
}

namespace {

class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(EncoderSpec spec) : Embedder(std::move(spec)) {}

  std::vector<LatentVector> embed_batch(const std::vector<std::string>& texts) override {
    std::vector<LatentVector> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) out.push_back(hash_embed(text, spec_.dim));
    return out;
  }
};

class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(EncoderSpec spec, const CacheStore* cache, bool offline)
      : Embedder(std::move(spec)), cache_(cache), offline_(offline) {
    if (spec_.endpoint.empty()) throw ConfigError("remote encoder requires an endpoint");
  }

  std::vector<LatentVector> embed_batch(const std::vector<std::string>& texts) override {
    std::vector<LatentVector> out(texts.size());
    std::vector<size_t> pending;
    for (size_t i = 0; i < texts.size(); ++i) {
      if (texts[i].empty()) throw EmptyText("cannot embed empty text");
      if (auto hit = cached(texts[i])) {
        out[i] = std::move(*hit);
      } else {
        pending.push_back(i);
      }
    }

    size_t batch = static_cast<size_t>(std::max(spec_.batch_size, 1));
    for (size_t start = 0; start < pending.size(); start += batch) {
      size_t stop = std::min(start + batch, pending.size());
      if (offline_) {
        throw OfflineViolation("offline mode: " + std::to_string(stop - start) +
                               " embeddings missing from cache");
      }
      json body;
      body["texts"] = json::array();
      for (size_t k = start; k < stop; ++k) body["texts"].push_back(texts[pending[k]]);

      json reply = detail::post_json(spec_.endpoint, body, spec_.auth_env,
                                     spec_.timeout_ms, detail::RetryPolicy{});
      if (!reply.contains("embeddings") || !reply["embeddings"].is_array() ||
          reply["embeddings"].size() != stop - start) {
        throw EncoderError("encoder reply must carry one embedding per input text");
      }
      for (size_t k = start; k < stop; ++k) {
        LatentVector v = parse_vector(reply["embeddings"][k - start]);
        store(texts[pending[k]], v);
        out[pending[k]] = std::move(v);
      }
    }
    return out;
  }

 private:
  LatentVector parse_vector(const json& row) const {
    if (!row.is_array() || row.size() != static_cast<size_t>(spec_.dim)) {
      throw EncoderError("encoder returned dim " + std::to_string(row.size()) +
                         ", expected " + std::to_string(spec_.dim));
    }
    LatentVector v(row.size());
    for (size_t i = 0; i < row.size(); ++i) {
      if (!row[i].is_number()) throw EncoderError("non-numeric embedding entry");
      v[i] = row[i].get<double>();
      if (!std::isfinite(v[i])) throw EncoderError("non-finite embedding entry");
    }
    return v;
  }

  json cache_key(const std::string& text) const {
    return json{{"encoder_id", spec_.id}, {"text_sha256", sha256_hex(text)}};
  }

  std::string cache_namespace() const { return "encoder-" + spec_.id; }

  std::optional<LatentVector> cached(const std::string& text) const {
    if (cache_ == nullptr) return std::nullopt;
    auto entry = cache_->lookup(cache_namespace(), CacheStore::key_for(cache_key(text)));
    if (!entry || !entry->contains("embedding")) return std::nullopt;
    try {
      auto v = (*entry)["embedding"].get<LatentVector>();
      if (v.size() == static_cast<size_t>(spec_.dim)) return v;
    } catch (...) {
    }
    return std::nullopt;
  }

  void store(const std::string& text, const LatentVector& v) const {
    if (cache_ == nullptr) return;
    json key = cache_key(text);
    json payload{{"key_inputs", key}, {"embedding", v}};
    cache_->store(cache_namespace(), CacheStore::key_for(key), payload);
  }

  const CacheStore* cache_;
  bool offline_;
};

}  // namespace

std::unique_ptr<Embedder> make_embedder(const EncoderSpec& spec, const CacheStore* cache,
                                        bool offline) {
  if (spec.dim < 1) throw ConfigError("encoder dim must be >= 1");
  if (spec.kind == EncoderKind::deterministic) {
    return std::make_unique<HashingEmbedder>(spec);
  }
  return std::make_unique<RemoteEmbedder>(spec, cache, offline);
}

}  // namespace blackspectrum
