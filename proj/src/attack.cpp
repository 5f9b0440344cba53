// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/attack.hpp"

#include <algorithm>

#include "blackspectrum/errors.hpp"

namespace blackspectrum {

double project_onto_axis(const LatentVector& trace_vec, const RecallInferenceAxis& axis) {
  if (trace_vec.size() != axis.direction.size()) {
    throw DimensionMismatch("trace dim " + std::to_string(trace_vec.size()) +
                            " vs axis dim " + std::to_string(axis.direction.size()));
  }
  double rho = 0.0;
  for (size_t i = 0; i < trace_vec.size(); ++i) {
    rho += (trace_vec[i] - axis.anchor_recall[i]) * axis.direction[i];
  }
  return rho;
}

MembershipScore membership_score(const LatentVector& trace_vec,
                                 const RecallInferenceAxis& axis) {
  if (!(axis.distance > 0.0)) throw DegenerateAxis("axis distance must be positive");
  MembershipScore score;
  score.attack_id = "blackspectrum";
  score.raw_projection = project_onto_axis(trace_vec, axis);
  score.score = 1.0 - score.raw_projection / axis.distance;
  return score;
}

Label decide(const MembershipScore& score, double threshold) {
  return score.score >= threshold ? Label::member : Label::non_member;
}

AttackOutcome& apply_threshold(AttackOutcome& outcome, double threshold) {
  outcome.threshold = threshold;
  outcome.decisions.clear();
  for (const MembershipScore& s : outcome.scores) {
    outcome.decisions[s.sequence_id] = decide(s, threshold);
  }
  return outcome;
}

AttackOutcome score_dataset(const Dataset& dataset, const TraceProvider& provider,
                            Embedder& encoder, const RecallInferenceAxis& axis,
                            const std::string& prompt_template, int samples_per_sequence,
                            const FetchContext& ctx, CompressionLevel defense,
                            const TraceProvider* defense_judge,
                            std::map<std::string, LatentVector>* collect_embeddings) {
  if (samples_per_sequence < 1) {
    throw std::invalid_argument("samples_per_sequence must be >= 1");
  }
  if (!axis.encoder_id.empty() && axis.encoder_id != encoder.spec().id) {
    throw EncoderAxisMismatch("axis was built with encoder '" + axis.encoder_id +
                              "', scoring uses '" + encoder.spec().id + "'");
  }
  if (defense != CompressionLevel::none && defense_judge == nullptr) {
    throw ConfigError("compression defense requires a judge provider");
  }

  AttackOutcome outcome;
  for (const QuerySequence& seq : dataset.sequences) {
    try {
      TraceRequest request;
      request.prompt = render_prompt(prompt_template, seq);
      request.task = TraceTask::trace;
      request.sequence_id = seq.id;
      request.source_text = seq.text;
      request.sim_label = seq.label;

      std::vector<ReasoningTrace> traces =
          provider.fetch_repeated(request, samples_per_sequence, ctx);
      if (defense != CompressionLevel::none) {
        for (ReasoningTrace& trace : traces) {
          trace = compress_trace(*defense_judge, trace, defense, ctx);
        }
      }

      LatentVector seq_vec = encoder.embed(seq.text);
      double rho_sum = 0.0;
      for (size_t i = 0; i < traces.size(); ++i) {
        LatentVector denoised = denoise(encoder.embed(traces[i].trace_text), seq_vec);
        rho_sum += project_onto_axis(denoised, axis);
        if (i == 0 && collect_embeddings != nullptr) {
          (*collect_embeddings)[seq.id] = std::move(denoised);
        }
      }
      double rho_mean = rho_sum / static_cast<double>(traces.size());

      MembershipScore score;
      score.sequence_id = seq.id;
      score.attack_id = "blackspectrum";
      score.raw_projection = rho_mean;
      score.score = 1.0 - rho_mean / axis.distance;
      score.label = seq.label;
      score.n_samples = samples_per_sequence;
      outcome.scores.push_back(std::move(score));
    } catch (const Error& e) {
      outcome.skipped.push_back({seq.id, e.what()});
    }
  }

  std::sort(outcome.scores.begin(), outcome.scores.end(),
            [](const MembershipScore& a, const MembershipScore& b) {
              return a.sequence_id < b.sequence_id;
            });
  std::sort(outcome.skipped.begin(), outcome.skipped.end(),
            [](const SkippedSequence& a, const SkippedSequence& b) {
              return a.sequence_id < b.sequence_id;
            });
  return outcome;
}

}  // namespace blackspectrum
