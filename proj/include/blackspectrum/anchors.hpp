// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "blackspectrum/dataset.hpp"
#include "blackspectrum/embedding.hpp"
#include "blackspectrum/scorers.hpp"

namespace blackspectrum {

enum class AnchorKind { verbatim_recall, low_information_synthetic };
std::string to_string(AnchorKind kind);
AnchorKind anchor_kind_from_string(const std::string& s);

struct AnchorSequenceSet {
  AnchorKind kind = AnchorKind::verbatim_recall;
  std::vector<QuerySequence> sequences;

  size_t size() const { return sequences.size(); }
};

struct AxisProvenance {
  int k = 0;                    // recall set size
  int l = 0;                    // synthetic set size
  int gamma = 0;                // synthetic survivors requested
  int traces_per_sequence = 0;
  // Present when entropies came from a top-k head (approximate).
  std::optional<int> entropy_top_k;
};

struct RecallInferenceAxis {
  std::string encoder_id;
  LatentVector anchor_recall;     // a_M
  LatentVector anchor_inference;  // a_N
  LatentVector direction;         // unit vector from recall toward inference
  double distance = 0.0;          // |a_N - a_M|
  AxisProvenance provenance;
};

// H = -sum_w P(w) ln P(w), with 0 ln 0 = 0. Natural log; the base only
// rescales rankings. Throws InvalidDistribution when probabilities are
// negative or do not sum to 1 within 1e-6.
double next_token_entropy(const NextTokenDistribution& distribution);

// Keeps the gamma candidates with the largest entropy, ties broken toward
// the lexicographically smaller sequence id. Survivors keep their input
// order. Throws GammaTooLarge when gamma exceeds the candidate count.
AnchorSequenceSet select_top_gamma(
    const std::vector<std::pair<QuerySequence, NextTokenDistribution>>& candidates,
    int gamma);

// Component-wise mean of denoised trace embeddings. Throws EmptyInput /
// DimensionMismatch.
LatentVector build_anchor(const std::vector<LatentVector>& traces);

// u = a_N - a_M, direction = u/|u|, distance = |u|. Throws DegenerateAxis
// when the anchors are closer than min_distance.
RecallInferenceAxis build_axis(const LatentVector& anchor_recall,
                               const LatentVector& anchor_inference,
                               double min_distance = 1e-9);

void save_axis(const RecallInferenceAxis& axis, const std::filesystem::path& path);
RecallInferenceAxis load_axis(const std::filesystem::path& path);

// JSONL of {id, text, kind}. All rows must carry the same kind.
AnchorSequenceSet load_anchor_set(const std::filesystem::path& path);
void save_anchor_set(const AnchorSequenceSet& set, const std::filesystem::path& path);

}  // namespace blackspectrum
