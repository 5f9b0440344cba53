// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blackspectrum/anchors.hpp"
#include "blackspectrum/dataset.hpp"
#include "blackspectrum/embedding.hpp"
#include "blackspectrum/provider.hpp"

namespace blackspectrum {

struct MembershipScore {
  std::string sequence_id;
  // Higher = more member-like, for every attack.
  double score = 0.0;
  std::string attack_id;
  // Attack-specific underlying value. For blackspectrum the axis projection
  // rho, so score = 1 - rho/distance holds exactly.
  double raw_projection = 0.0;
  std::optional<Label> label;
  int n_samples = 1;
};

struct SkippedSequence {
  std::string sequence_id;
  std::string reason;
};

struct AttackOutcome {
  std::vector<MembershipScore> scores;
  std::vector<SkippedSequence> skipped;
  std::optional<double> threshold;
  std::map<std::string, Label> decisions;  // filled iff threshold is set
};

// rho = (trace_vec - anchor_recall) . direction
double project_onto_axis(const LatentVector& trace_vec, const RecallInferenceAxis& axis);

// epsilon = 1 - rho/distance: 1 at the recall anchor, 0 at the inference
// anchor, unclamped beyond them.
MembershipScore membership_score(const LatentVector& trace_vec,
                                 const RecallInferenceAxis& axis);

// member iff score >= threshold (boundary inclusive).
Label decide(const MembershipScore& score, double threshold);

AttackOutcome& apply_threshold(AttackOutcome& outcome, double threshold);

// Per sequence: render prompt, fetch samples_per_sequence traces, embed,
// denoise, project; record the mean score. Failed sequences land in the
// skip list instead of the scores. Results are sorted by sequence_id.
// When collect_embeddings is non-null, the sample-0 denoised embedding of
// every scored sequence is stored there (used for the PCA export).
AttackOutcome score_dataset(const Dataset& dataset, const TraceProvider& provider,
                            Embedder& encoder, const RecallInferenceAxis& axis,
                            const std::string& prompt_template, int samples_per_sequence,
                            const FetchContext& ctx,
                            CompressionLevel defense = CompressionLevel::none,
                            const TraceProvider* defense_judge = nullptr,
                            std::map<std::string, LatentVector>* collect_embeddings = nullptr);

}  // namespace blackspectrum
