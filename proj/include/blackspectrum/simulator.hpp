// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blackspectrum/provider.hpp"

namespace blackspectrum {

// Offline stand-in for a reasoning model API. Traces are assembled from two
// phrase banks (recall-flavored and inference-flavored) that share a pool of
// neutral boilerplate, so every trace quotes the input sequence and carries
// task chatter regardless of which bank dominates. Output depends only on
// (seed, mix, source_text) and is bit-identical across platforms.

// Core phrases plus the shared pool. A phrase may contain "{fragment}",
// replaced with a short quoted span of the source text.
const std::vector<std::string>& recall_bank();
const std::vector<std::string>& inference_bank();
const std::vector<std::string>& shared_pool();

std::string simulate_trace(double mix, uint64_t seed, const std::string& source_text,
                           const SimulatorParams& params);

// Sentence truncation: mild keeps the first 6 sentences, strong the first 3.
std::string simulate_compression(const std::string& trace_text, CompressionLevel level);

// Marker-count heuristic producing a reply like "Certainty: 8/10. ...".
std::string simulate_judgement(const std::string& trace_text);

// Low-information prefix for synthetic anchor candidates; distinct texts
// for consecutive sample indices.
std::string simulate_candidate(uint64_t seed, int sample_index);

// Splits on '.', '!', '?' (closing quotes stay attached). Used by the
// compression simulation and by tests.
std::vector<std::string> split_sentences(const std::string& text);

// True when the sentence could have been produced from one of the bank's
// phrases (exact match after any "{fragment}" substitution).
bool sentence_in_bank(const std::string& sentence, const std::vector<std::string>& bank);

}  // namespace blackspectrum
