// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command line front end. Subcommands:
//   dataset segment   raw text files -> query sequence JSONL
//   anchors build     anchor traces -> axis.json
//   attack run        full pipeline: anchors, attacks, metrics, exports
//   eval              metrics from an existing scores file
//   report            plain-text summary of a finished run
//   simulate demo     self-contained offline benchmark
//
// Exit codes: 0 success, 1 fatal error, 2 finished with skipped sequences.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>

#include "blackspectrum/dataset.hpp"
#include "blackspectrum/errors.hpp"
#include "blackspectrum/evaluation.hpp"
#include "blackspectrum/io.hpp"
#include "blackspectrum/pipeline.hpp"

namespace bs = blackspectrum;
using nlohmann::json;

namespace {

struct Overrides {
  std::string cache_root;
  std::string output_dir;
  std::string attacks;
  std::string defense;
  double fpr_budget = -1.0;
  int64_t seed = -1;
  bool offline = false;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--cache-root", ov.cache_root, "Override the cache root");
  cmd->add_option("--output-dir", ov.output_dir, "Override the output directory");
  cmd->add_option("--attacks", ov.attacks, "Comma-separated attack ids to run");
  cmd->add_option("--defense", ov.defense, "Compression defense: none, mild, strong");
  cmd->add_option("--fpr-budget", ov.fpr_budget, "FPR budget for TPR@FPR");
  cmd->add_option("--seed", ov.seed, "Override the run seed");
  cmd->add_flag("--offline", ov.offline, "Serve everything from cache; no network");
}

bs::RunConfig load_with_overrides(const std::string& config_path, const Overrides& ov) {
  bs::RunConfig config = bs::load_run_config(config_path);
  if (!ov.cache_root.empty()) config.cache_root = ov.cache_root;
  if (!ov.output_dir.empty()) config.output_dir = ov.output_dir;
  if (!ov.attacks.empty()) {
    config.attacks.clear();
    std::string rest = ov.attacks;
    while (!rest.empty()) {
      size_t comma = rest.find(',');
      std::string id = rest.substr(0, comma);
      if (!id.empty()) config.attacks.push_back(id);
      if (comma == std::string::npos) break;
      rest.erase(0, comma + 1);
    }
  }
  if (!ov.defense.empty()) {
    config.defense = bs::compression_level_from_string(ov.defense);
  }
  if (ov.fpr_budget >= 0.0) config.fpr_budget = ov.fpr_budget;
  if (ov.seed >= 0) {
    config.seed = static_cast<uint64_t>(ov.seed);
    config.provider.simulator.seed = config.seed;
    if (config.judge) config.judge->simulator.seed = config.seed;
  }
  if (ov.offline) config.offline = true;
  return config;
}

int cmd_dataset_segment(const std::vector<std::string>& inputs, int length,
                        const std::string& label, const std::string& output) {
  std::optional<bs::Label> parsed_label;
  if (!label.empty() && label != "none") parsed_label = bs::label_from_string(label);

  bs::Dataset dataset;
  for (const std::string& input : inputs) {
    std::filesystem::path p(input);
    std::string doc_id = p.stem().string();
    for (bs::QuerySequence& seq :
         bs::segment_text(bs::read_file(p), doc_id, {length})) {
      seq.label = parsed_label;
      seq.source = p.filename().string();
      dataset.sequences.push_back(std::move(seq));
    }
  }
  bs::DatasetSummary summary = bs::validate_dataset(dataset);
  dataset.metadata["tokenizer"] = "whitespace";
  bs::save_dataset(dataset, output);
  std::cout << "wrote " << dataset.sequences.size() << " sequences from " << inputs.size()
            << " documents to " << output << "\n";
  for (const std::string& note : summary.notes) std::cout << "note: " << note << "\n";
  return 0;
}

int cmd_eval(const std::string& scores_path, const std::string& dataset_path,
             double fpr_budget) {
  std::map<std::string, std::string> document_of;
  if (!dataset_path.empty()) {
    for (const bs::QuerySequence& seq : bs::load_dataset(dataset_path).sequences) {
      document_of[seq.id] = seq.document_id;
    }
  }

  bs::LabeledScores entries;
  std::istringstream stream(bs::read_file(scores_path));
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded()) {
      throw bs::ParseError(line_no, "bad JSON in " + scores_path);
    }
    if (!row.contains("label") || row["label"].is_null()) continue;
    bs::LabeledEntry entry;
    entry.sequence_id = row.at("sequence_id").get<std::string>();
    entry.score = row.at("score").get<double>();
    entry.label = bs::label_from_string(row["label"].get<std::string>());
    auto it = document_of.find(entry.sequence_id);
    entry.document_id = it != document_of.end() ? it->second : entry.sequence_id;
    entries.push_back(std::move(entry));
  }

  auto to_json = [](const bs::MetricsReport& r) {
    return json{{"balanced_acc", r.balanced_acc}, {"best_threshold", r.best_threshold},
                {"auc", r.auc},                   {"tpr_at_fpr", r.tpr_at_fpr},
                {"fpr_budget", r.fpr_budget},     {"t_statistic", r.t_statistic},
                {"p_value", r.p_value},           {"effect_size", r.effect_size},
                {"n_member", r.n_member},         {"n_non_member", r.n_non_member}};
  };

  json out{{"sequence", to_json(bs::compute_metrics(entries, fpr_budget))}};
  if (!dataset_path.empty()) {
    out["document"] = to_json(bs::compute_metrics(bs::aggregate_documents(entries), fpr_budget));
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership inference against black-box reasoning APIs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", bs::kVersion);

  // dataset segment
  auto* dataset_cmd = app.add_subcommand("dataset", "Dataset utilities");
  auto* segment = dataset_cmd->add_subcommand("segment", "Split documents into sequences");
  std::vector<std::string> seg_inputs;
  int seg_length = 128;
  std::string seg_label = "none";
  std::string seg_output = "dataset.jsonl";
  segment->add_option("--input", seg_inputs, "Input text files")->required()->expected(-1);
  segment->add_option("--length", seg_length, "Tokens per sequence");
  segment->add_option("--label", seg_label, "member, non_member, or none");
  segment->add_option("--output", seg_output, "Output JSONL path");

  // anchors build
  auto* anchors_cmd = app.add_subcommand("anchors", "Anchor utilities");
  auto* anchors_build = anchors_cmd->add_subcommand("build", "Build and save the axis");
  std::string anchors_config;
  std::string anchors_output;
  Overrides anchors_ov;
  anchors_build->add_option("--config", anchors_config, "Run config JSON")->required();
  anchors_build->add_option("--output", anchors_output, "Axis output path");
  add_override_flags(anchors_build, anchors_ov);

  // attack run
  auto* attack_cmd = app.add_subcommand("attack", "Attack execution");
  auto* attack_run = attack_cmd->add_subcommand("run", "Run the full pipeline");
  std::string attack_config;
  Overrides attack_ov;
  attack_run->add_option("--config", attack_config, "Run config JSON")->required();
  add_override_flags(attack_run, attack_ov);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Metrics from a scores file");
  std::string eval_scores;
  std::string eval_dataset;
  double eval_budget = 0.05;
  eval_cmd->add_option("--scores", eval_scores, "Scores JSONL from a run")->required();
  eval_cmd->add_option("--dataset", eval_dataset,
                       "Dataset JSONL (enables document-level metrics)");
  eval_cmd->add_option("--fpr-budget", eval_budget, "FPR budget for TPR@FPR");

  // report
  auto* report_cmd = app.add_subcommand("report", "Summarize a finished run");
  std::string report_dir;
  report_cmd->add_option("--output-dir", report_dir, "Run output directory")->required();

  // simulate demo
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulator utilities");
  auto* demo = simulate_cmd->add_subcommand("demo", "Write and run the offline benchmark");
  std::string demo_dir = "demo";
  bs::DemoParams demo_params;
  bool demo_no_run = false;
  demo->add_option("--dir", demo_dir, "Demo directory");
  demo->add_option("--seed", demo_params.seed, "Generator seed");
  demo->add_option("--member-mix", demo_params.member_mix, "Member trace mix");
  demo->add_option("--non-member-mix", demo_params.non_member_mix, "Non-member trace mix");
  demo->add_option("--docs-per-class", demo_params.docs_per_class, "Documents per class");
  demo->add_flag("--no-run", demo_no_run, "Only write the inputs and config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*segment) return cmd_dataset_segment(seg_inputs, seg_length, seg_label, seg_output);

    if (*anchors_build) {
      bs::RunConfig config = load_with_overrides(anchors_config, anchors_ov);
      std::filesystem::path out = anchors_output.empty()
                                      ? std::filesystem::path(config.output_dir) / "axis.json"
                                      : std::filesystem::path(anchors_output);
      bs::RecallInferenceAxis axis = bs::build_axis_only(config, out);
      std::cout << "axis written to " << out.string() << " (distance "
                << axis.distance << ")\n";
      return 0;
    }

    if (*attack_run) {
      bs::RunConfig config = load_with_overrides(attack_config, attack_ov);
      bs::PipelineResult result = bs::run_pipeline(config);
      std::cout << bs::emit_report(config.output_dir);
      std::cout << "manifest: " << result.manifest_path.string() << "\n";
      if (result.exit_code == 2) {
        std::cout << "finished with skipped sequences (exit 2)\n";
      }
      return result.exit_code;
    }

    if (*eval_cmd) return cmd_eval(eval_scores, eval_dataset, eval_budget);

    if (*report_cmd) {
      std::cout << bs::emit_report(report_dir);
      return 0;
    }

    if (*demo) {
      std::filesystem::path config_path = bs::write_demo_inputs(demo_dir, demo_params);
      std::cout << "demo inputs written; config at " << config_path.string() << "\n";
      if (demo_no_run) return 0;
      bs::RunConfig config = bs::load_run_config(config_path);
      bs::PipelineResult result = bs::run_pipeline(config);
      std::cout << bs::emit_report(config.output_dir);
      return result.exit_code;
    }

    std::cerr << "error: no subcommand selected\n";
    return 1;
  } catch (const bs::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
