// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "blackspectrum/anchors.hpp"
#include "blackspectrum/attack.hpp"
#include "blackspectrum/embedding.hpp"
#include "blackspectrum/provider.hpp"

namespace blackspectrum {

inline constexpr const char* kVersion = "0.1.0";

// The known attack ids, in canonical order.
const std::vector<std::string>& known_attacks();

struct ScorerConfig {
  std::string kind = "builtin";  // builtin | uniform | remote
  int vocab_size = 8;            // uniform only
  std::string endpoint;
  std::string auth_env;
  int top_k = 50;  // remote validation scorers only
};

struct AnchorConfig {
  std::string recall_path;
  // Pre-selected synthetic anchors; skips entropy selection when set.
  std::string synthetic_path;
  // Candidate pool for entropy selection, generated when empty.
  std::string synthetic_candidates_path;
  int n_generated_candidates = 12;
  int gamma = 5;
  int traces_per_sequence = 3;
  ScorerConfig validation_scorer;
};

struct BaselineConfig {
  std::string seeds_path;               // empty = builtin seed set
  std::string stopwords_path;           // empty = builtin list
  std::string judgement_template_path;  // empty = builtin template
  ScorerConfig reference_scorer;
  int consistency_samples = 3;
  double similarity_threshold = 0.8;
};

struct RunConfig {
  std::string dataset_path;
  std::string template_path;  // empty = builtin attack template
  std::string output_dir = "out";
  std::string cache_root = "cache";
  uint64_t seed = 1;
  int samples_per_sequence = 3;
  double fpr_budget = 0.05;
  bool offline = false;
  CompressionLevel defense = CompressionLevel::none;
  std::vector<std::string> attacks{"blackspectrum"};
  ProviderConfig provider;
  std::optional<ProviderConfig> judge;  // defaults to provider
  EncoderSpec encoder;
  AnchorConfig anchors;
  BaselineConfig baselines;
};

// Parses the config JSON, applying defaults for absent fields. Throws
// ConfigError on unknown attack ids, bad enums, or type errors. Paths are
// resolved relative to the config file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::filesystem::path& base_dir);

// Everything that affects results, defaults applied, sorted keys. Output
// and cache locations are excluded: they relocate artifacts without
// changing them.
nlohmann::json canonical_config(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Referenced files must exist; attack ids must be known. Throws ConfigError.
void validate_run_config(const RunConfig& config);

struct PipelineResult {
  int exit_code = 0;  // 0 ok, 1 fatal, 2 partial (non-empty skip list)
  std::filesystem::path manifest_path;
  nlohmann::json manifest;
};

// Builds just the axis (anchor traces + entropy selection) and writes it to
// save_path. Backs the `anchors build` subcommand.
RecallInferenceAxis build_axis_only(const RunConfig& config,
                                    const std::filesystem::path& save_path);

// Runs anchors -> attacks -> evaluation -> exports, writing into
// config.output_dir:
//   axis.json, scores/<attack>.jsonl, metrics/<attack>.<level>.json,
//   roc/<attack>.<level>.csv, pca.csv, manifest.json
// Holds an exclusive lock on output_dir for the duration.
PipelineResult run_pipeline(const RunConfig& config);

// Renders a plain-text summary (one AUC-sorted block per level) from the
// metrics files under output_dir. Throws MissingReports.
std::string emit_report(const std::filesystem::path& output_dir);

struct DemoParams {
  uint64_t seed = 1;
  int docs_per_class = 10;
  int segments_per_doc = 10;
  int tokens_per_segment = 32;
  int recall_anchor_count = 5;
  int candidate_count = 12;
  int gamma = 5;
  double member_mix = 0.15;
  double non_member_mix = 0.85;
};

// Writes a self-contained offline benchmark under dir/inputs: a labeled
// synthetic dataset, recall anchors, synthetic candidate pool, prompt
// template, and a ready-to-run config.json. Returns the config path.
std::filesystem::path write_demo_inputs(const std::filesystem::path& dir,
                                        const DemoParams& params = {});

}  // namespace blackspectrum
