// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "blackspectrum/baselines.hpp"
#include "blackspectrum/errors.hpp"
#include "blackspectrum/evaluation.hpp"
#include "blackspectrum/io.hpp"
#include "blackspectrum/rng.hpp"
#include "blackspectrum/scorers.hpp"
#include "blackspectrum/simulator.hpp"

namespace blackspectrum {

using nlohmann::json;
namespace fs = std::filesystem;

const std::vector<std::string>& known_attacks() {
  static const std::vector<std::string> ids{
      "blackspectrum",       "thinking_token",      "compression_rate",
      "tr_consistency_char", "tr_consistency_token", "llm_judgement",
  };
  return ids;
}

namespace {

// ---------------------------------------------------------------------------
// config parsing

[[noreturn]] void config_type_error(const std::string& key, const char* expected) {
  throw ConfigError("config field '" + key + "' must be " + expected);
}

template <typename T>
T field_or(const json& j, const std::string& key, T def) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) config_type_error(key, "a string");
  } else if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) config_type_error(key, "a boolean");
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) config_type_error(key, "a number");
  } else {
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      config_type_error(key, "an integer");
    }
  }
  return v.get<T>();
}

std::string resolve_path(const std::string& value, const fs::path& base) {
  if (value.empty()) return value;
  fs::path p(value);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (base / p).lexically_normal().string();
}

std::string path_field(const json& j, const std::string& key, const std::string& def,
                       const fs::path& base) {
  return resolve_path(field_or<std::string>(j, key, def), base);
}

ProviderConfig provider_from_json(const json& j, uint64_t seed) {
  if (!j.is_object()) throw ConfigError("provider config must be an object");
  ProviderConfig p;
  p.provider_id = field_or<std::string>(j, "provider_id", p.provider_id);
  std::string kind = field_or<std::string>(j, "kind", "simulator");
  if (kind == "simulator") {
    p.kind = ProviderKind::simulator;
  } else if (kind == "http") {
    p.kind = ProviderKind::http;
  } else {
    throw ConfigError("provider kind must be simulator or http, got '" + kind + "'");
  }
  p.model_id = field_or<std::string>(j, "model_id", p.model_id);
  p.endpoint = field_or<std::string>(j, "endpoint", p.endpoint);
  p.auth_env = field_or<std::string>(j, "auth_env", p.auth_env);
  p.reasoning_field_path =
      field_or<std::string>(j, "reasoning_field_path", p.reasoning_field_path);
  p.sampling.temperature = field_or<double>(j, "temperature", p.sampling.temperature);
  p.sampling.max_output_tokens =
      field_or<int>(j, "max_output_tokens", p.sampling.max_output_tokens);
  p.simulator.seed = seed;
  p.simulator.member_mix = field_or<double>(j, "member_mix", p.simulator.member_mix);
  p.simulator.non_member_mix =
      field_or<double>(j, "non_member_mix", p.simulator.non_member_mix);
  p.simulator.unlabeled_mix =
      field_or<double>(j, "unlabeled_mix", p.simulator.unlabeled_mix);
  p.simulator.shared_rate = field_or<double>(j, "shared_rate", p.simulator.shared_rate);
  p.max_attempts = field_or<int>(j, "max_attempts", p.max_attempts);
  p.base_delay_ms = field_or<int>(j, "base_delay_ms", p.base_delay_ms);
  p.timeout_ms = field_or<int>(j, "timeout_ms", p.timeout_ms);
  return p;
}

json provider_to_json(const ProviderConfig& p) {
  return json{{"provider_id", p.provider_id},
              {"kind", p.kind == ProviderKind::simulator ? "simulator" : "http"},
              {"model_id", p.model_id},
              {"endpoint", p.endpoint},
              {"auth_env", p.auth_env},
              {"reasoning_field_path", p.reasoning_field_path},
              {"temperature", p.sampling.temperature},
              {"max_output_tokens", p.sampling.max_output_tokens},
              {"member_mix", p.simulator.member_mix},
              {"non_member_mix", p.simulator.non_member_mix},
              {"unlabeled_mix", p.simulator.unlabeled_mix},
              {"shared_rate", p.simulator.shared_rate},
              {"max_attempts", p.max_attempts},
              {"base_delay_ms", p.base_delay_ms},
              {"timeout_ms", p.timeout_ms}};
}

EncoderSpec encoder_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("encoder config must be an object");
  EncoderSpec e;
  e.id = field_or<std::string>(j, "id", e.id);
  std::string kind = field_or<std::string>(j, "kind", "deterministic");
  if (kind == "deterministic") {
    e.kind = EncoderKind::deterministic;
  } else if (kind == "remote") {
    e.kind = EncoderKind::remote;
  } else {
    throw ConfigError("encoder kind must be deterministic or remote, got '" + kind + "'");
  }
  e.dim = field_or<int>(j, "dim", e.dim);
  e.endpoint = field_or<std::string>(j, "endpoint", e.endpoint);
  e.auth_env = field_or<std::string>(j, "auth_env", e.auth_env);
  e.batch_size = field_or<int>(j, "batch_size", e.batch_size);
  e.timeout_ms = field_or<int>(j, "timeout_ms", e.timeout_ms);
  return e;
}

json encoder_to_json(const EncoderSpec& e) {
  return json{{"id", e.id},
              {"kind", e.kind == EncoderKind::deterministic ? "deterministic" : "remote"},
              {"dim", e.dim},
              {"endpoint", e.endpoint},
              {"auth_env", e.auth_env},
              {"batch_size", e.batch_size},
              {"timeout_ms", e.timeout_ms}};
}

ScorerConfig scorer_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("scorer config must be an object");
  ScorerConfig s;
  s.kind = field_or<std::string>(j, "kind", s.kind);
  if (s.kind != "builtin" && s.kind != "uniform" && s.kind != "remote") {
    throw ConfigError("scorer kind must be builtin, uniform, or remote, got '" + s.kind + "'");
  }
  s.vocab_size = field_or<int>(j, "vocab_size", s.vocab_size);
  s.endpoint = field_or<std::string>(j, "endpoint", s.endpoint);
  s.auth_env = field_or<std::string>(j, "auth_env", s.auth_env);
  s.top_k = field_or<int>(j, "top_k", s.top_k);
  return s;
}

json scorer_to_json(const ScorerConfig& s) {
  return json{{"kind", s.kind},
              {"vocab_size", s.vocab_size},
              {"endpoint", s.endpoint},
              {"auth_env", s.auth_env},
              {"top_k", s.top_k}};
}

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  RunConfig c;
  c.dataset_path = path_field(j, "dataset_path", "", base_dir);
  c.template_path = path_field(j, "template_path", "", base_dir);
  c.output_dir = path_field(j, "output_dir", c.output_dir, base_dir);
  c.cache_root = path_field(j, "cache_root", c.cache_root, base_dir);
  c.seed = field_or<uint64_t>(j, "seed", c.seed);
  c.samples_per_sequence = field_or<int>(j, "samples_per_sequence", c.samples_per_sequence);
  c.fpr_budget = field_or<double>(j, "fpr_budget", c.fpr_budget);
  c.offline = field_or<bool>(j, "offline", c.offline);
  c.defense = compression_level_from_string(
      field_or<std::string>(j, "defense", to_string(c.defense)));

  if (j.contains("attacks")) {
    if (!j["attacks"].is_array()) config_type_error("attacks", "an array of strings");
    c.attacks.clear();
    for (const auto& entry : j["attacks"]) {
      if (!entry.is_string()) config_type_error("attacks", "an array of strings");
      c.attacks.push_back(entry.get<std::string>());
    }
  }

  c.provider = j.contains("provider") ? provider_from_json(j["provider"], c.seed)
                                      : provider_from_json(json::object(), c.seed);
  if (j.contains("judge")) c.judge = provider_from_json(j["judge"], c.seed);
  c.encoder = j.contains("encoder") ? encoder_from_json(j["encoder"]) : EncoderSpec{};

  if (j.contains("anchors")) {
    const json& a = j["anchors"];
    if (!a.is_object()) config_type_error("anchors", "an object");
    c.anchors.recall_path = path_field(a, "recall_path", "", base_dir);
    c.anchors.synthetic_path = path_field(a, "synthetic_path", "", base_dir);
    c.anchors.synthetic_candidates_path =
        path_field(a, "synthetic_candidates_path", "", base_dir);
    c.anchors.n_generated_candidates =
        field_or<int>(a, "n_generated_candidates", c.anchors.n_generated_candidates);
    c.anchors.gamma = field_or<int>(a, "gamma", c.anchors.gamma);
    c.anchors.traces_per_sequence =
        field_or<int>(a, "traces_per_sequence", c.anchors.traces_per_sequence);
    if (a.contains("validation_scorer")) {
      c.anchors.validation_scorer = scorer_from_json(a["validation_scorer"]);
    }
  }

  if (j.contains("baselines")) {
    const json& b = j["baselines"];
    if (!b.is_object()) config_type_error("baselines", "an object");
    c.baselines.seeds_path = path_field(b, "seeds_path", "", base_dir);
    c.baselines.stopwords_path = path_field(b, "stopwords_path", "", base_dir);
    c.baselines.judgement_template_path =
        path_field(b, "judgement_template_path", "", base_dir);
    if (b.contains("reference_scorer")) {
      c.baselines.reference_scorer = scorer_from_json(b["reference_scorer"]);
    }
    c.baselines.consistency_samples =
        field_or<int>(b, "consistency_samples", c.baselines.consistency_samples);
    c.baselines.similarity_threshold =
        field_or<double>(b, "similarity_threshold", c.baselines.similarity_threshold);
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j, path.parent_path());
}

json canonical_config(const RunConfig& c) {
  // offline is excluded along with the output/cache locations: it changes
  // where bytes come from, never what they are.
  json j{{"dataset_path", c.dataset_path},
         {"template_path", c.template_path},
         {"seed", c.seed},
         {"samples_per_sequence", c.samples_per_sequence},
         {"fpr_budget", c.fpr_budget},
         {"defense", to_string(c.defense)},
         {"attacks", c.attacks},
         {"provider", provider_to_json(c.provider)},
         {"judge", c.judge ? provider_to_json(*c.judge) : json()},
         {"encoder", encoder_to_json(c.encoder)},
         {"anchors",
          json{{"recall_path", c.anchors.recall_path},
               {"synthetic_path", c.anchors.synthetic_path},
               {"synthetic_candidates_path", c.anchors.synthetic_candidates_path},
               {"n_generated_candidates", c.anchors.n_generated_candidates},
               {"gamma", c.anchors.gamma},
               {"traces_per_sequence", c.anchors.traces_per_sequence},
               {"validation_scorer", scorer_to_json(c.anchors.validation_scorer)}}},
         {"baselines",
          json{{"seeds_path", c.baselines.seeds_path},
               {"stopwords_path", c.baselines.stopwords_path},
               {"judgement_template_path", c.baselines.judgement_template_path},
               {"reference_scorer", scorer_to_json(c.baselines.reference_scorer)},
               {"consistency_samples", c.baselines.consistency_samples},
               {"similarity_threshold", c.baselines.similarity_threshold}}}};
  return j;
}

std::string config_hash(const RunConfig& config) {
  return sha256_hex(canonical_config(config).dump());
}

void validate_run_config(const RunConfig& c) {
  auto require_file = [](const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " is required");
    if (!fs::exists(path)) {
      throw ConfigError(std::string(what) + " does not exist: " + path);
    }
  };
  auto optional_file = [](const std::string& path, const char* what) {
    if (!path.empty() && !fs::exists(path)) {
      throw ConfigError(std::string(what) + " does not exist: " + path);
    }
  };

  require_file(c.dataset_path, "dataset_path");
  optional_file(c.template_path, "template_path");
  require_file(c.anchors.recall_path, "anchors.recall_path");
  optional_file(c.anchors.synthetic_path, "anchors.synthetic_path");
  optional_file(c.anchors.synthetic_candidates_path, "anchors.synthetic_candidates_path");
  optional_file(c.baselines.seeds_path, "baselines.seeds_path");
  optional_file(c.baselines.stopwords_path, "baselines.stopwords_path");
  optional_file(c.baselines.judgement_template_path, "baselines.judgement_template_path");

  if (c.attacks.empty()) throw ConfigError("at least one attack must be configured");
  std::set<std::string> seen;
  for (const std::string& id : c.attacks) {
    const auto& known = known_attacks();
    if (std::find(known.begin(), known.end(), id) == known.end()) {
      throw ConfigError("unknown attack id '" + id + "'");
    }
    if (!seen.insert(id).second) throw ConfigError("duplicate attack id '" + id + "'");
  }

  if (c.samples_per_sequence < 1) throw ConfigError("samples_per_sequence must be >= 1");
  if (c.fpr_budget < 0.0 || c.fpr_budget > 1.0) {
    throw ConfigError("fpr_budget must lie in [0, 1]");
  }
  if (c.anchors.gamma < 1) throw ConfigError("anchors.gamma must be >= 1");
  if (c.anchors.traces_per_sequence < 1) {
    throw ConfigError("anchors.traces_per_sequence must be >= 1");
  }
  if (c.anchors.n_generated_candidates < 1) {
    throw ConfigError("anchors.n_generated_candidates must be >= 1");
  }
  if (c.baselines.consistency_samples < 2) {
    throw ConfigError("baselines.consistency_samples must be >= 2");
  }
  if (c.baselines.similarity_threshold <= 0.0 || c.baselines.similarity_threshold > 1.0) {
    throw ConfigError("baselines.similarity_threshold must lie in (0, 1]");
  }
  if (c.provider.kind == ProviderKind::http && c.provider.endpoint.empty()) {
    throw ConfigError("http provider requires an endpoint");
  }
  if (c.judge && c.judge->kind == ProviderKind::http && c.judge->endpoint.empty()) {
    throw ConfigError("http judge requires an endpoint");
  }
  if (c.encoder.kind == EncoderKind::remote && c.encoder.endpoint.empty()) {
    throw ConfigError("remote encoder requires an endpoint");
  }
  if (c.encoder.dim < 1) throw ConfigError("encoder dim must be >= 1");
  ScorerConfig vs = c.anchors.validation_scorer;
  if (vs.kind == "remote" && vs.endpoint.empty()) {
    throw ConfigError("remote validation scorer requires an endpoint");
  }
  if (vs.kind == "uniform") {
    throw ConfigError("validation scorer kind must be builtin or remote");
  }
  ScorerConfig rs = c.baselines.reference_scorer;
  if (rs.kind == "remote" && rs.endpoint.empty()) {
    throw ConfigError("remote reference scorer requires an endpoint");
  }
  if (rs.kind == "uniform" && rs.vocab_size < 1) {
    throw ConfigError("uniform reference scorer needs vocab_size >= 1");
  }
}

namespace {

// ---------------------------------------------------------------------------
// orchestration helpers

class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".lock") {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output dir " + dir.string() + ": " + ec.message());
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      throw ConfigError("output dir is locked by another run (remove " + path_.string() +
                        " if that run is dead)");
    }
    std::string pid = std::to_string(::getpid()) + "\n";
    ssize_t n = ::write(fd_, pid.c_str(), pid.size());
    (void)n;
  }

  ~OutputLock() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }

  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

struct AnchorVectors {
  RecallInferenceAxis axis;
  // (id, group, denoised embedding) for the PCA export.
  std::vector<std::tuple<std::string, std::string, LatentVector>> embeddings;
  std::vector<std::string> notes;
};

std::vector<ReasoningTrace> fetch_sequence_traces(
    const QuerySequence& seq, int k, const std::string& tmpl, const TraceProvider& provider,
    const TraceProvider& judge, CompressionLevel defense, const FetchContext& ctx,
    std::optional<double> mix_override = std::nullopt) {
  TraceRequest request;
  request.prompt = render_prompt(tmpl, seq);
  request.task = TraceTask::trace;
  request.sequence_id = seq.id;
  request.source_text = seq.text;
  request.sim_label = seq.label;
  request.sim_mix = mix_override;

  std::vector<ReasoningTrace> traces = provider.fetch_repeated(request, k, ctx);
  if (defense != CompressionLevel::none) {
    for (ReasoningTrace& trace : traces) {
      trace = compress_trace(judge, trace, defense, ctx);
    }
  }
  return traces;
}

std::unique_ptr<ValidationScorer> make_validation_scorer(const ScorerConfig& s) {
  if (s.kind == "remote") {
    return make_remote_validation_scorer(s.endpoint, s.auth_env, s.top_k);
  }
  return make_builtin_validation_scorer();
}

std::unique_ptr<ReferenceScorer> make_reference_scorer(const ScorerConfig& s) {
  if (s.kind == "remote") return make_remote_reference_scorer(s.endpoint, s.auth_env);
  if (s.kind == "uniform") return make_uniform_reference_scorer(s.vocab_size);
  return make_builtin_reference_scorer();
}

AnchorVectors build_axis_artifact(const RunConfig& config, const std::string& tmpl,
                                  const TraceProvider& provider, const TraceProvider& judge,
                                  Embedder& encoder, const FetchContext& ctx) {
  AnchorVectors result;

  AnchorSequenceSet recall = load_anchor_set(config.anchors.recall_path);
  if (recall.kind != AnchorKind::verbatim_recall) {
    throw ConfigError("anchors.recall_path must contain verbatim_recall rows");
  }

  AnchorSequenceSet synthetic;
  std::optional<int> entropy_top_k;
  int gamma_used = 0;
  if (!config.anchors.synthetic_path.empty()) {
    synthetic = load_anchor_set(config.anchors.synthetic_path);
    if (synthetic.kind != AnchorKind::low_information_synthetic) {
      throw ConfigError("anchors.synthetic_path must contain low_information_synthetic rows");
    }
    gamma_used = static_cast<int>(synthetic.size());
  } else {
    std::vector<QuerySequence> candidates;
    if (!config.anchors.synthetic_candidates_path.empty()) {
      AnchorSequenceSet pool = load_anchor_set(config.anchors.synthetic_candidates_path);
      if (pool.kind != AnchorKind::low_information_synthetic) {
        throw ConfigError(
            "anchors.synthetic_candidates_path must contain low_information_synthetic rows");
      }
      candidates = pool.sequences;
    } else {
      for (int i = 0; i < config.anchors.n_generated_candidates; ++i) {
        TraceRequest request;
        request.prompt = "Produce one short, generic sentence opening that could "
                         "continue in many ways.";
        request.sample_index = i;
        request.task = TraceTask::generation;
        char id[32];
        std::snprintf(id, sizeof(id), "gen-%03d", i);
        request.sequence_id = id;
        ReasoningTrace candidate = provider.fetch(request, ctx);
        QuerySequence seq;
        seq.id = id;
        seq.text = candidate.trace_text;
        seq.document_id = seq.id;
        seq.token_length = static_cast<int>(whitespace_tokenize(seq.text).size());
        candidates.push_back(std::move(seq));
      }
    }

    std::unique_ptr<ValidationScorer> scorer =
        make_validation_scorer(config.anchors.validation_scorer);
    std::vector<std::pair<QuerySequence, NextTokenDistribution>> scored;
    scored.reserve(candidates.size());
    for (const QuerySequence& cand : candidates) {
      scored.emplace_back(cand, scorer->next_token_distribution(cand.text));
    }
    synthetic = select_top_gamma(scored, config.anchors.gamma);
    gamma_used = config.anchors.gamma;
    entropy_top_k = scorer->top_k();
  }

  auto collect = [&](const AnchorSequenceSet& set, double mix, const char* group) {
    std::vector<LatentVector> vectors;
    for (const QuerySequence& seq : set.sequences) {
      try {
        std::vector<ReasoningTrace> traces =
            fetch_sequence_traces(seq, config.anchors.traces_per_sequence, tmpl, provider,
                                  judge, config.defense, ctx, mix);
        LatentVector seq_vec = encoder.embed(seq.text);
        for (const ReasoningTrace& trace : traces) {
          LatentVector denoised = denoise(encoder.embed(trace.trace_text), seq_vec);
          result.embeddings.emplace_back(
              seq.id + "#" + std::to_string(trace.sample_index), group, denoised);
          vectors.push_back(std::move(denoised));
        }
      } catch (const Error& e) {
        result.notes.push_back("anchor '" + seq.id + "' skipped: " + e.what());
      }
    }
    return vectors;
  };

  std::vector<LatentVector> recall_vectors = collect(recall, 0.0, "recall_anchor");
  std::vector<LatentVector> synthetic_vectors = collect(synthetic, 1.0, "inference_anchor");
  if (recall_vectors.empty() || synthetic_vectors.empty()) {
    throw DegenerateAxis("no usable anchor traces on at least one side");
  }

  result.axis = build_axis(build_anchor(recall_vectors), build_anchor(synthetic_vectors));
  result.axis.encoder_id = encoder.spec().id;
  result.axis.provenance.k = static_cast<int>(recall.size());
  result.axis.provenance.l = static_cast<int>(synthetic.size());
  result.axis.provenance.gamma = gamma_used;
  result.axis.provenance.traces_per_sequence = config.anchors.traces_per_sequence;
  result.axis.provenance.entropy_top_k = entropy_top_k;
  return result;
}

template <typename Fn>
AttackOutcome run_per_sequence(const Dataset& dataset, Fn&& score_sequence) {
  AttackOutcome outcome;
  for (const QuerySequence& seq : dataset.sequences) {
    try {
      MembershipScore score = score_sequence(seq);
      score.sequence_id = seq.id;
      score.label = seq.label;
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

void write_scores_file(const AttackOutcome& outcome, const fs::path& path) {
  std::string body;
  for (const MembershipScore& s : outcome.scores) {
    json j{{"sequence_id", s.sequence_id},
           {"attack_id", s.attack_id},
           {"score", s.score},
           {"raw_projection", s.raw_projection},
           {"n_samples", s.n_samples}};
    if (s.label) j["label"] = to_string(*s.label);
    body += j.dump();
    body.push_back('\n');
  }
  atomic_write_file(path, body);
}

json evaluate_level(const LabeledScores& entries, const std::string& attack_id,
                    const std::string& level, double fpr_budget,
                    const std::string& fingerprint, const std::string& chash,
                    size_t n_skipped, const fs::path& roc_path) {
  json m{{"attack_id", attack_id},
         {"level", level},
         {"fpr_budget", fpr_budget},
         {"dataset_fingerprint", fingerprint},
         {"config_hash", chash},
         {"n_scored", entries.size()},
         {"n_skipped", n_skipped}};
  std::vector<std::string> notes;

  int n_member = 0;
  int n_non = 0;
  std::vector<double> member_scores;
  std::vector<double> non_member_scores;
  for (const LabeledEntry& e : entries) {
    if (e.label == Label::member) {
      ++n_member;
      member_scores.push_back(e.score);
    } else {
      ++n_non;
      non_member_scores.push_back(e.score);
    }
  }
  m["n_member"] = n_member;
  m["n_non_member"] = n_non;

  try {
    write_roc_csv(roc_points(entries), roc_path);
    m["auc"] = auc(entries);
    BalancedAccuracyResult bacc = balanced_accuracy(entries);
    m["balanced_acc"] = bacc.acc;
    m["best_threshold"] = bacc.best_threshold;
    m["tpr_at_fpr"] = tpr_at_fpr(entries, fpr_budget);
  } catch (const Error& e) {
    m["auc"] = nullptr;
    m["balanced_acc"] = nullptr;
    m["best_threshold"] = nullptr;
    m["tpr_at_fpr"] = nullptr;
    notes.push_back(e.what());
  }

  try {
    TTestResult t = welch_t_test(member_scores, non_member_scores);
    m["t_statistic"] = t.t;
    m["p_value"] = t.p_value;
  } catch (const Error& e) {
    m["t_statistic"] = nullptr;
    m["p_value"] = nullptr;
    notes.push_back(std::string("t-test: ") + e.what());
  }
  try {
    m["effect_size"] = effect_size(member_scores, non_member_scores);
  } catch (const Error& e) {
    m["effect_size"] = nullptr;
    notes.push_back(std::string("effect size: ") + e.what());
  }

  m["notes"] = notes;
  return m;
}

}  // namespace

RecallInferenceAxis build_axis_only(const RunConfig& config, const fs::path& save_path) {
  validate_run_config(config);
  CacheStore cache{fs::path(config.cache_root)};
  CacheStats stats;
  FetchContext ctx{&cache, &stats, config.offline};
  std::string tmpl = config.template_path.empty() ? default_attack_template()
                                                  : read_file(config.template_path);
  std::unique_ptr<Embedder> encoder = make_embedder(config.encoder, &cache, config.offline);
  TraceProvider provider(config.provider);
  TraceProvider judge(config.judge ? *config.judge : config.provider);
  AnchorVectors anchors = build_axis_artifact(config, tmpl, provider, judge, *encoder, ctx);
  save_axis(anchors.axis, save_path);
  return anchors.axis;
}

PipelineResult run_pipeline(const RunConfig& config) {
  validate_run_config(config);

  fs::path out_dir(config.output_dir);
  OutputLock lock(out_dir);
  fs::create_directories(out_dir / "scores");
  fs::create_directories(out_dir / "metrics");
  fs::create_directories(out_dir / "roc");

  CacheStore cache{fs::path(config.cache_root)};
  CacheStats stats;
  FetchContext ctx{&cache, &stats, config.offline};

  Dataset dataset = load_dataset(config.dataset_path);
  std::string fingerprint = sha256_hex(read_file(config.dataset_path));
  std::string chash = config_hash(config);

  std::string tmpl = config.template_path.empty() ? default_attack_template()
                                                  : read_file(config.template_path);
  std::vector<std::string> notes;
  for (const std::string& finding : lint_template(tmpl)) {
    notes.push_back("template lint: " + finding);
  }

  std::unique_ptr<Embedder> encoder = make_embedder(config.encoder, &cache, config.offline);
  TraceProvider provider(config.provider);
  TraceProvider judge(config.judge ? *config.judge : config.provider);

  std::map<std::string, std::string> document_of;
  for (const QuerySequence& seq : dataset.sequences) document_of[seq.id] = seq.document_id;

  // Step 1-2: anchors and axis.
  AnchorVectors anchors = build_axis_artifact(config, tmpl, provider, judge, *encoder, ctx);
  save_axis(anchors.axis, out_dir / "axis.json");
  for (const std::string& n : anchors.notes) notes.push_back(n);

  // Step 3: attacks.
  std::map<std::string, LatentVector> query_embeddings;
  json skipped_summary = json::object();
  std::vector<std::string> artifacts{"axis.json", "manifest.json"};
  bool any_skipped = false;

  std::optional<ThinkingTokenSeedSet> seeds;
  std::set<std::string> stopwords;
  std::string judgement_tmpl;
  std::unique_ptr<ReferenceScorer> reference;

  for (const std::string& attack_id : config.attacks) {
    AttackOutcome outcome;
    if (attack_id == "blackspectrum") {
      outcome = score_dataset(dataset, provider, *encoder, anchors.axis, tmpl,
                              config.samples_per_sequence, ctx, config.defense, &judge,
                              &query_embeddings);
    } else if (attack_id == "thinking_token") {
      if (!seeds) {
        seeds = config.baselines.seeds_path.empty()
                    ? builtin_seed_set()
                    : load_seed_set(config.baselines.seeds_path);
        seeds->similarity_threshold = config.baselines.similarity_threshold;
        stopwords = config.baselines.stopwords_path.empty()
                        ? builtin_stopwords()
                        : load_stopwords(config.baselines.stopwords_path);
      }
      outcome = run_per_sequence(dataset, [&](const QuerySequence& seq) {
        ReasoningTrace trace =
            fetch_sequence_traces(seq, 1, tmpl, provider, judge, config.defense, ctx).front();
        return thinking_token_score(trace, *seeds, *encoder, stopwords);
      });
    } else if (attack_id == "compression_rate") {
      if (!reference) reference = make_reference_scorer(config.baselines.reference_scorer);
      outcome = run_per_sequence(dataset, [&](const QuerySequence& seq) {
        ReasoningTrace trace =
            fetch_sequence_traces(seq, 1, tmpl, provider, judge, config.defense, ctx).front();
        return compression_rate_score(trace, *reference);
      });
    } else if (attack_id == "tr_consistency_char" || attack_id == "tr_consistency_token") {
      Granularity g = attack_id == "tr_consistency_char" ? Granularity::character
                                                         : Granularity::token;
      outcome = run_per_sequence(dataset, [&](const QuerySequence& seq) {
        std::vector<ReasoningTrace> traces =
            fetch_sequence_traces(seq, config.baselines.consistency_samples, tmpl, provider,
                                  judge, config.defense, ctx);
        return trace_consistency_score(traces, g);
      });
    } else if (attack_id == "llm_judgement") {
      if (judgement_tmpl.empty()) {
        judgement_tmpl = config.baselines.judgement_template_path.empty()
                             ? default_judgement_template()
                             : read_file(config.baselines.judgement_template_path);
      }
      outcome = run_per_sequence(dataset, [&](const QuerySequence& seq) {
        ReasoningTrace trace =
            fetch_sequence_traces(seq, 1, tmpl, provider, judge, config.defense, ctx).front();
        return llm_judgement_score(trace, judge, judgement_tmpl, ctx);
      });
    }

    std::string scores_rel = "scores/" + attack_id + ".jsonl";
    write_scores_file(outcome, out_dir / scores_rel);
    artifacts.push_back(scores_rel);

    json skipped_rows = json::array();
    for (const SkippedSequence& s : outcome.skipped) {
      skipped_rows.push_back(json{{"sequence_id", s.sequence_id}, {"reason", s.reason}});
    }
    skipped_summary[attack_id] = skipped_rows;
    any_skipped = any_skipped || !outcome.skipped.empty();

    // Evaluation at both levels, when labels allow it.
    LabeledScores labeled;
    for (const MembershipScore& s : outcome.scores) {
      if (!s.label) continue;
      labeled.push_back({s.sequence_id, s.score, *s.label, document_of[s.sequence_id]});
    }
    if (labeled.empty()) {
      notes.push_back("attack " + attack_id + ": no labeled scores, metrics skipped");
      continue;
    }

    std::string roc_rel = "roc/" + attack_id + ".sequence.csv";
    json seq_metrics =
        evaluate_level(labeled, attack_id, "sequence", config.fpr_budget, fingerprint,
                       chash, outcome.skipped.size(), out_dir / roc_rel);
    std::string metrics_rel = "metrics/" + attack_id + ".sequence.json";
    atomic_write_file(out_dir / metrics_rel, seq_metrics.dump(2) + "\n");
    artifacts.push_back(metrics_rel);
    if (!seq_metrics["auc"].is_null()) artifacts.push_back(roc_rel);

    try {
      LabeledScores docs = aggregate_documents(labeled);
      std::string doc_roc_rel = "roc/" + attack_id + ".document.csv";
      json doc_metrics =
          evaluate_level(docs, attack_id, "document", config.fpr_budget, fingerprint, chash,
                         outcome.skipped.size(), out_dir / doc_roc_rel);
      std::string doc_metrics_rel = "metrics/" + attack_id + ".document.json";
      atomic_write_file(out_dir / doc_metrics_rel, doc_metrics.dump(2) + "\n");
      artifacts.push_back(doc_metrics_rel);
      if (!doc_metrics["auc"].is_null()) artifacts.push_back(doc_roc_rel);
    } catch (const Error& e) {
      notes.push_back("attack " + attack_id + ": document level skipped: " + e.what());
    }
  }

  // Fill query embeddings for the PCA export even when blackspectrum was
  // not among the attacks.
  if (query_embeddings.empty()) {
    for (const QuerySequence& seq : dataset.sequences) {
      try {
        ReasoningTrace trace =
            fetch_sequence_traces(seq, 1, tmpl, provider, judge, config.defense, ctx).front();
        query_embeddings[seq.id] =
            denoise(encoder->embed(trace.trace_text), encoder->embed(seq.text));
      } catch (const Error&) {
        // Already reported through the attack skip lists.
      }
    }
  }

  std::vector<LatentVector> pca_vectors;
  std::vector<std::pair<std::string, std::string>> pca_meta;  // (id, group)
  for (const auto& [id, group, vec] : anchors.embeddings) {
    pca_meta.emplace_back(id, group);
    pca_vectors.push_back(vec);
  }
  std::map<std::string, std::optional<Label>> label_of;
  for (const QuerySequence& seq : dataset.sequences) label_of[seq.id] = seq.label;
  for (const auto& [id, vec] : query_embeddings) {
    std::optional<Label> label = label_of[id];
    pca_meta.emplace_back(id, label ? to_string(*label) : "unlabeled");
    pca_vectors.push_back(vec);
  }

  if (pca_vectors.size() >= 3 && pca_vectors.front().size() >= 2) {
    PcaResult pca = pca_project(pca_vectors, 2);
    std::vector<PcaExportRow> rows;
    rows.reserve(pca_meta.size());
    for (size_t i = 0; i < pca_meta.size(); ++i) {
      rows.push_back({pca_meta[i].first, pca_meta[i].second, pca.projections[i][0],
                      pca.projections[i][1]});
    }
    write_pca_csv(rows, out_dir / "pca.csv");
    artifacts.push_back("pca.csv");
  } else {
    notes.push_back("pca export skipped: not enough vectors");
  }

  std::sort(artifacts.begin(), artifacts.end());
  json manifest{{"version", kVersion},
                {"config_hash", chash},
                {"dataset_fingerprint", fingerprint},
                {"provider_kind",
                 config.provider.kind == ProviderKind::simulator ? "simulator" : "http"},
                {"offline", config.offline},
                {"defense", to_string(config.defense)},
                {"n_sequences", dataset.sequences.size()},
                {"attacks", config.attacks},
                {"cache",
                 json{{"hits", stats.hits.load()},
                      {"misses", stats.misses.load()},
                      {"writes", stats.writes.load()},
                      {"network_calls", stats.network.load()}}},
                {"skipped", skipped_summary},
                {"notes", notes},
                {"artifacts", artifacts}};

  PipelineResult result;
  result.exit_code = any_skipped ? 2 : 0;
  result.manifest = manifest;
  result.manifest_path = out_dir / "manifest.json";
  atomic_write_file(result.manifest_path, manifest.dump(2) + "\n");
  return result;
}

std::string emit_report(const fs::path& output_dir) {
  fs::path metrics_dir = output_dir / "metrics";
  if (!fs::exists(metrics_dir)) {
    throw MissingReports("no metrics directory under " + output_dir.string());
  }

  struct Row {
    std::string attack_id;
    json m;
  };
  std::map<std::string, std::vector<Row>> levels;
  for (const auto& entry : fs::directory_iterator(metrics_dir)) {
    if (entry.path().extension() != ".json") continue;
    json m;
    try {
      m = json::parse(read_file(entry.path()));
    } catch (...) {
      continue;
    }
    if (!m.contains("attack_id") || !m.contains("level")) continue;
    levels[m["level"].get<std::string>()].push_back({m["attack_id"].get<std::string>(), m});
  }
  if (levels.empty()) throw MissingReports("no metrics reports under " + metrics_dir.string());

  auto num = [](const json& m, const char* key) {
    return m.contains(key) && m[key].is_number() ? m[key].get<double>()
                                                 : std::numeric_limits<double>::quiet_NaN();
  };

  std::string out;
  for (const char* level : {"sequence", "document"}) {
    auto it = levels.find(level);
    if (it == levels.end()) continue;
    std::vector<Row>& rows = it->second;
    std::sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
      double aa = num(a.m, "auc");
      double bb = num(b.m, "auc");
      if (std::isnan(aa) != std::isnan(bb)) return !std::isnan(aa);
      if (aa != bb) return aa > bb;
      return a.attack_id < b.attack_id;
    });

    double budget = rows.empty() ? 0.05 : num(rows.front().m, "fpr_budget");
    char header[160];
    std::snprintf(header, sizeof(header), "%-22s %8s %8s %12s %10s %8s %9s\n",
                  "attack", "bal_acc", "auc",
                  ("tpr@" + std::to_string(static_cast<int>(budget * 100)) + "%fpr").c_str(),
                  "p_value", "eff_sz", "n(m/n)");
    out += std::string(level) + "-level results\n";
    out += header;
    for (const Row& row : rows) {
      auto cell = [&](const char* key, const char* fmt) {
        double v = num(row.m, key);
        char buf[32];
        if (std::isnan(v)) return std::string("-");
        std::snprintf(buf, sizeof(buf), fmt, v);
        return std::string(buf);
      };
      int nm = row.m.contains("n_member") && row.m["n_member"].is_number()
                   ? row.m["n_member"].get<int>()
                   : 0;
      int nn = row.m.contains("n_non_member") && row.m["n_non_member"].is_number()
                   ? row.m["n_non_member"].get<int>()
                   : 0;
      char line[200];
      std::snprintf(line, sizeof(line), "%-22s %8s %8s %12s %10s %8s %4d/%-4d\n",
                    row.attack_id.c_str(), cell("balanced_acc", "%.4f").c_str(),
                    cell("auc", "%.4f").c_str(), cell("tpr_at_fpr", "%.4f").c_str(),
                    cell("p_value", "%.3g").c_str(), cell("effect_size", "%.3f").c_str(),
                    nm, nn);
      out += line;
    }
    out.push_back('\n');
  }
  return out;
}

fs::path write_demo_inputs(const fs::path& dir, const DemoParams& params) {
  fs::path inputs = dir / "inputs";
  std::error_code ec;
  fs::create_directories(inputs, ec);
  if (ec) throw IoError("cannot create " + inputs.string() + ": " + ec.message());

  static const std::vector<std::string> vocabulary{
      "river",   "stone",   "meadow",  "lantern", "harbor",  "breeze",  "ledger",
      "orchard", "kettle",  "signal",  "timber",  "saddle",  "copper",  "willow",
      "market",  "anchor",  "ribbon",  "thimble", "garden",  "bridge",  "candle",
      "barrel",  "compass", "shutter", "meadowlark", "sparrow", "harvest", "mill",
      "quarry",  "hinge",   "cellar",  "spool",   "paddle",  "hearth",  "tunnel",
      "beacon",  "furrow",  "gravel",  "hollow",  "ivy",     "jetty",   "knoll",
      "lattice", "mortar",  "needle",  "oar",     "pasture", "quill",   "rampart",
      "satchel", "trellis", "upland",  "valley",  "wagon",   "yarrow",  "zephyr",
      "awning",  "bobbin",  "cistern", "dovetail", "eaves",  "flagon",  "gable",
      "hamlet",  "inlet",   "juniper", "keel",    "loom",    "mast",    "notch",
  };

  Dataset dataset;
  for (int cls = 0; cls < 2; ++cls) {
    Label label = cls == 0 ? Label::member : Label::non_member;
    const char* tag = cls == 0 ? "m" : "n";
    for (int d = 0; d < params.docs_per_class; ++d) {
      char doc_id[32];
      std::snprintf(doc_id, sizeof(doc_id), "doc-%s-%02d", tag, d);
      Rng rng(mix_seed(params.seed, fnv1a64(std::string("demo-doc:") + doc_id)));

      std::string text;
      int total = params.segments_per_doc * params.tokens_per_segment;
      for (int t = 0; t < total; ++t) {
        if (!text.empty()) text.push_back(' ');
        text += vocabulary[rng.next_index(vocabulary.size())];
      }
      for (QuerySequence& seq :
           segment_text(text, doc_id, {params.tokens_per_segment})) {
        seq.label = label;
        seq.source = "demo";
        dataset.sequences.push_back(std::move(seq));
      }
    }
  }
  int n_member = 0;
  int n_non = 0;
  for (const QuerySequence& seq : dataset.sequences) {
    (*seq.label == Label::member ? n_member : n_non) += 1;
  }
  dataset.metadata["tokenizer"] = "whitespace";
  dataset.metadata["source"] = "simulator demo";
  dataset.metadata["n_member"] = std::to_string(n_member);
  dataset.metadata["n_non_member"] = std::to_string(n_non);
  save_dataset(dataset, inputs / "dataset.jsonl");

  static const std::vector<std::string> proverbs{
      "An apple a day keeps the doctor away.",
      "A stitch in time saves nine.",
      "Actions speak louder than words.",
      "The early bird catches the worm.",
      "All that glitters is not gold.",
      "Where there is a will there is a way.",
      "The pen is mightier than the sword.",
      "A journey of a thousand miles begins with a single step.",
  };
  AnchorSequenceSet recall;
  recall.kind = AnchorKind::verbatim_recall;
  int n_recall = std::min<int>(params.recall_anchor_count, static_cast<int>(proverbs.size()));
  for (int i = 0; i < n_recall; ++i) {
    QuerySequence seq;
    char id[32];
    std::snprintf(id, sizeof(id), "recall-%02d", i);
    seq.id = id;
    seq.text = proverbs[static_cast<size_t>(i)];
    seq.document_id = seq.id;
    seq.token_length = static_cast<int>(whitespace_tokenize(seq.text).size());
    recall.sequences.push_back(std::move(seq));
  }
  save_anchor_set(recall, inputs / "recall_anchors.jsonl");

  AnchorSequenceSet candidates;
  candidates.kind = AnchorKind::low_information_synthetic;
  for (int i = 0; i < params.candidate_count; ++i) {
    QuerySequence seq;
    char id[32];
    std::snprintf(id, sizeof(id), "cand-%02d", i);
    seq.id = id;
    seq.text = simulate_candidate(params.seed, i);
    seq.document_id = seq.id;
    seq.token_length = static_cast<int>(whitespace_tokenize(seq.text).size());
    candidates.sequences.push_back(std::move(seq));
  }
  save_anchor_set(candidates, inputs / "synthetic_candidates.jsonl");

  atomic_write_file(inputs / "template.txt", default_attack_template());

  json config{{"dataset_path", "inputs/dataset.jsonl"},
              {"template_path", "inputs/template.txt"},
              {"output_dir", "out"},
              {"cache_root", "cache"},
              {"seed", params.seed},
              {"samples_per_sequence", 3},
              {"attacks", known_attacks()},
              {"provider", json{{"kind", "simulator"},
                                {"provider_id", "sim"},
                                {"model_id", "sim-reasoner-1"},
                                {"member_mix", params.member_mix},
                                {"non_member_mix", params.non_member_mix}}},
              {"encoder", json{{"kind", "deterministic"}, {"id", "hash-v1"}, {"dim", 256}}},
              {"anchors", json{{"recall_path", "inputs/recall_anchors.jsonl"},
                               {"synthetic_candidates_path",
                                "inputs/synthetic_candidates.jsonl"},
                               {"gamma", params.gamma},
                               {"traces_per_sequence", 3}}}};
  fs::path config_path = dir / "config.json";
  atomic_write_file(config_path, config.dump(2) + "\n");
  return config_path;
}

}  // namespace blackspectrum
