// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "blackspectrum/cache.hpp"
#include "blackspectrum/dataset.hpp"

namespace blackspectrum {

enum class ProviderKind { simulator, http };
enum class CompressionLevel { none, mild, strong };
std::string to_string(CompressionLevel level);
CompressionLevel compression_level_from_string(const std::string& s);

// What the provider is being asked to produce. The simulator dispatches on
// this; HTTP providers just send the prompt.
enum class TraceTask { trace, compression, judgement, generation };

struct SamplingParams {
  double temperature = 0.7;
  int max_output_tokens = 1024;
};

struct SimulatorParams {
  uint64_t seed = 1;
  // Mixing weight between the recall-flavored and inference-flavored phrase
  // banks: 0 = pure recall, 1 = pure inference. Chosen per request from the
  // sequence label unless the request overrides it.
  double member_mix = 0.15;
  double non_member_mix = 0.85;
  double unlabeled_mix = 0.5;
  // Probability that a sentence comes from the shared (bank-neutral) pool.
  double shared_rate = 0.3;
};

struct ProviderConfig {
  std::string provider_id = "sim";
  ProviderKind kind = ProviderKind::simulator;
  std::string model_id = "sim-reasoner-1";
  // HTTP providers only.
  std::string endpoint;
  std::string auth_env;  // env var name holding the bearer token
  // Dotted path into the chat-completions response JSON; numeric segments
  // index into arrays.
  std::string reasoning_field_path = "choices.0.message.reasoning_content";
  SamplingParams sampling;
  SimulatorParams simulator;
  int max_attempts = 4;
  int base_delay_ms = 200;
  int timeout_ms = 60000;
};

struct ReasoningTrace {
  std::string sequence_id;
  std::string trace_text;
  std::string model_id;
  int sample_index = 0;
  bool from_cache = false;
};

struct TraceRequest {
  std::string prompt;
  int sample_index = 0;
  TraceTask task = TraceTask::trace;
  // Context for the simulator; HTTP providers ignore everything below.
  std::string sequence_id;
  std::string source_text;              // sequence text, mined for quoted fragments
  std::optional<double> sim_mix;        // overrides the label-derived mix
  std::optional<Label> sim_label;
  std::string payload;                  // input trace for compression / judgement
  CompressionLevel level = CompressionLevel::none;
};

struct FetchContext {
  const CacheStore* cache = nullptr;
  CacheStats* stats = nullptr;
  bool offline = false;
};

class TraceProvider {
 public:
  explicit TraceProvider(ProviderConfig config);

  const ProviderConfig& config() const { return config_; }

  // Cache-first: a hit returns the stored trace with from_cache = true and
  // never touches the network. On a miss the trace is produced (simulated
  // or fetched), stored, and returned with from_cache = false. Offline mode
  // turns an HTTP miss into OfflineViolation.
  ReasoningTrace fetch(const TraceRequest& request, const FetchContext& ctx) const;

  // k traces for sample_index 0..k-1. Errors propagate annotated with the
  // failing sample index.
  std::vector<ReasoningTrace> fetch_repeated(const TraceRequest& request, int k,
                                             const FetchContext& ctx) const;

  nlohmann::json cache_key_inputs(const TraceRequest& request) const;

 private:
  ReasoningTrace synthesize(const TraceRequest& request) const;
  std::string fetch_http(const TraceRequest& request) const;
  double effective_mix(const TraceRequest& request) const;

  ProviderConfig config_;
};

// Extracts a dotted path ("choices.0.message.reasoning_content") from a
// JSON document. Missing path, non-string leaf, or empty string all throw
// MissingTraceField.
std::string extract_trace_field(const nlohmann::json& body, const std::string& path);

// Replaces the placeholder (e.g. "{sequence}"), which must occur exactly
// once; otherwise throws TemplateError.
std::string render_template(const std::string& tmpl, const std::string& placeholder,
                            const std::string& value);
std::string render_prompt(const std::string& tmpl, const QuerySequence& sequence);

// Non-blocking template checks: returns human-readable findings when the
// template is missing a recall instruction or a continuation instruction.
std::vector<std::string> lint_template(const std::string& tmpl);

std::string default_attack_template();
std::string default_judgement_template();
std::string compression_template(CompressionLevel level);  // mild or strong only

// Sends the trace back through a judge provider for summarization at the
// given level, returning the compressed trace (same sequence_id and
// sample_index as the input).
ReasoningTrace compress_trace(const TraceProvider& judge, const ReasoningTrace& trace,
                              CompressionLevel level, const FetchContext& ctx);

}  // namespace blackspectrum
