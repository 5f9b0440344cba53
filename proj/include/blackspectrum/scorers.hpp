// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace blackspectrum {

struct NextTokenDistribution {
  std::map<std::string, double> probabilities;
  int vocab_size = 0;
};

// Scores candidate synthetic sequences: what might follow the prefix?
class ValidationScorer {
 public:
  virtual ~ValidationScorer() = default;
  virtual std::string scorer_id() const = 0;
  virtual NextTokenDistribution next_token_distribution(const std::string& prefix) = 0;
  // Set when the backend only exposes a renormalized top-k head, which makes
  // entropies approximate; recorded in axis provenance.
  virtual std::optional<int> top_k() const { return std::nullopt; }
};

// Per-token negative log-likelihoods under a reference model.
class ReferenceScorer {
 public:
  virtual ~ReferenceScorer() = default;
  virtual std::string scorer_id() const = 0;
  virtual std::vector<double> token_nlls(const std::string& text) = 0;
};

// Word-bigram model with add-alpha smoothing, trained on a small built-in
// plain-prose corpus. Offline stand-in for a validation LM.
std::unique_ptr<ValidationScorer> make_builtin_validation_scorer();

// POST {prefix, top_k} -> {tokens, probabilities}; probabilities are
// renormalized over the returned head.
std::unique_ptr<ValidationScorer> make_remote_validation_scorer(
    const std::string& endpoint, const std::string& auth_env, int top_k,
    int timeout_ms = 30000);

// Whitespace-token NLLs that are ln(V) at every position: a calibration
// scorer whose output is independent of content.
std::unique_ptr<ReferenceScorer> make_uniform_reference_scorer(int vocab_size);

// Character-bigram reference model trained on the built-in corpus.
std::unique_ptr<ReferenceScorer> make_builtin_reference_scorer();

// POST {text} -> {nlls}.
std::unique_ptr<ReferenceScorer> make_remote_reference_scorer(
    const std::string& endpoint, const std::string& auth_env, int timeout_ms = 30000);

// The corpus backing the builtin scorers (one sentence per entry).
const std::vector<std::string>& builtin_corpus();

}  // namespace blackspectrum
