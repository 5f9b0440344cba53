// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "blackspectrum/anchors.hpp"
#include "blackspectrum/dataset.hpp"
#include "blackspectrum/errors.hpp"
#include "blackspectrum/io.hpp"
#include "blackspectrum/pipeline.hpp"
#include "test_util.hpp"

using namespace blackspectrum;
using blackspectrum::testing::EnvVar;
using blackspectrum::testing::TempDir;
using blackspectrum::testing::TestServer;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename Fn>
std::string config_error_message(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

// Relative paths of every regular file under root, sorted.
std::vector<std::string> list_files(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      out.push_back(fs::relative(entry.path(), root).string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

DemoParams small_demo() {
  DemoParams p;
  p.docs_per_class = 2;
  p.segments_per_doc = 2;
  p.tokens_per_segment = 16;
  p.recall_anchor_count = 3;
  p.candidate_count = 8;
  p.gamma = 3;
  return p;
}

AnchorSequenceSet make_anchor_set(AnchorKind kind, const std::vector<std::string>& texts,
                                  const char* prefix) {
  AnchorSequenceSet set;
  set.kind = kind;
  for (size_t i = 0; i < texts.size(); ++i) {
    QuerySequence seq;
    seq.id = prefix + std::to_string(i);
    seq.text = texts[i];
    seq.document_id = seq.id;
    seq.token_length = static_cast<int>(whitespace_tokenize(seq.text).size());
    set.sequences.push_back(std::move(seq));
  }
  return set;
}

}  // namespace

TEST_CASE("run config: defaults from an empty object") {
  RunConfig c = run_config_from_json(json::object(), "/base");
  CHECK(c.dataset_path.empty());
  CHECK(c.template_path.empty());
  CHECK(c.output_dir == "/base/out");
  CHECK(c.cache_root == "/base/cache");
  CHECK(c.seed == 1);
  CHECK(c.samples_per_sequence == 3);
  CHECK(c.fpr_budget == doctest::Approx(0.05));
  CHECK_FALSE(c.offline);
  CHECK(c.defense == CompressionLevel::none);
  CHECK(c.attacks == std::vector<std::string>{"blackspectrum"});
  CHECK(c.provider.kind == ProviderKind::simulator);
  CHECK_FALSE(c.judge.has_value());
  CHECK(c.encoder.kind == EncoderKind::deterministic);
  CHECK(c.encoder.id == "hash-v1");
  CHECK(c.encoder.dim == 256);
  CHECK(c.anchors.gamma == 5);
  CHECK(c.anchors.validation_scorer.kind == "builtin");
  CHECK(c.baselines.consistency_samples == 3);
}

TEST_CASE("run config: type and enum errors") {
  CHECK_THROWS_AS(run_config_from_json(json::array(), "."), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"seed", "one"}}, "."), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"fpr_budget", "low"}}, "."), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"attacks", "blackspectrum"}}, "."), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"attacks", json::array({1})}}, "."), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"defense", "harsh"}}, "."), ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json(json{{"provider", json{{"kind", "carrier-pigeon"}}}}, "."),
      ConfigError);
  CHECK_THROWS_AS(run_config_from_json(json{{"encoder", json{{"kind", "psychic"}}}}, "."),
                  ConfigError);
  CHECK_THROWS_AS(
      run_config_from_json(
          json{{"anchors", json{{"validation_scorer", json{{"kind", "vibes"}}}}}}, "."),
      ConfigError);

  std::string msg =
      config_error_message([] { run_config_from_json(json{{"seed", "one"}}, "."); });
  CHECK(msg.find("seed") != std::string::npos);
}

TEST_CASE("run config: relative paths resolve against the config directory") {
  TempDir dir("cfg");
  fs::create_directories(dir / "data");
  atomic_write_file(dir / "data" / "ds.jsonl", "");
  json j{{"dataset_path", "data/ds.jsonl"},
         {"template_path", "/abs/tpl.txt"},
         {"anchors", json{{"recall_path", "data/recall.jsonl"}}},
         {"baselines", json{{"seeds_path", "data/seeds.txt"}}}};
  atomic_write_file(dir / "config.json", j.dump());

  RunConfig c = load_run_config(dir / "config.json");
  CHECK(c.dataset_path == (dir / "data" / "ds.jsonl").lexically_normal().string());
  CHECK(c.template_path == "/abs/tpl.txt");
  CHECK(c.anchors.recall_path == (dir / "data" / "recall.jsonl").lexically_normal().string());
  CHECK(c.baselines.seeds_path == (dir / "data" / "seeds.txt").lexically_normal().string());
  CHECK(c.output_dir == (dir / "out").lexically_normal().string());
}

TEST_CASE("run config: malformed JSON is a config error") {
  TempDir dir("badjson");
  atomic_write_file(dir / "config.json", "{not json");
  std::string msg = config_error_message([&] { load_run_config(dir / "config.json"); });
  CHECK(msg.find("not valid JSON") != std::string::npos);
}

TEST_CASE("config validation rejects bad inputs before any work") {
  TempDir dir("val");
  atomic_write_file(dir / "ds.jsonl", json{{"id", "a"}, {"text", "hello world"}}.dump() + "\n");
  save_anchor_set(make_anchor_set(AnchorKind::verbatim_recall, {"An apple a day."}, "r"),
                  dir / "recall.jsonl");

  RunConfig base;
  base.dataset_path = (dir / "ds.jsonl").string();
  base.anchors.recall_path = (dir / "recall.jsonl").string();
  CHECK_NOTHROW(validate_run_config(base));

  auto broken = [&](auto mutate) {
    RunConfig c = base;
    mutate(c);
    return config_error_message([&] { validate_run_config(c); });
  };

  CHECK(broken([](RunConfig& c) { c.dataset_path = ""; }).find("dataset_path") !=
        std::string::npos);
  CHECK(broken([&](RunConfig& c) { c.dataset_path = (dir / "missing.jsonl").string(); })
            .find("does not exist") != std::string::npos);
  CHECK(broken([](RunConfig& c) { c.attacks = {"sidechannel"}; }).find("unknown attack") !=
        std::string::npos);
  CHECK(broken([](RunConfig& c) {
          c.attacks = {"blackspectrum", "blackspectrum"};
        }).find("duplicate attack") != std::string::npos);
  CHECK(broken([](RunConfig& c) { c.attacks.clear(); }).find("at least one attack") !=
        std::string::npos);
  CHECK_FALSE(broken([](RunConfig& c) { c.samples_per_sequence = 0; }).empty());
  CHECK_FALSE(broken([](RunConfig& c) { c.fpr_budget = 1.5; }).empty());
  CHECK_FALSE(broken([](RunConfig& c) { c.anchors.gamma = 0; }).empty());
  CHECK_FALSE(broken([](RunConfig& c) { c.baselines.consistency_samples = 1; }).empty());
  CHECK_FALSE(broken([](RunConfig& c) {
                c.provider.kind = ProviderKind::http;
                c.provider.endpoint = "";
              }).empty());
  CHECK_FALSE(broken([](RunConfig& c) {
                c.encoder.kind = EncoderKind::remote;
                c.encoder.endpoint = "";
              }).empty());
  CHECK(broken([](RunConfig& c) {
          c.anchors.validation_scorer.kind = "uniform";
        }).find("validation scorer") != std::string::npos);
}

TEST_CASE("config hash ignores artifact locations and offline mode") {
  RunConfig c;
  c.dataset_path = "/data/ds.jsonl";
  std::string base = config_hash(c);

  RunConfig moved = c;
  moved.output_dir = "/elsewhere/out";
  moved.cache_root = "/elsewhere/cache";
  moved.offline = true;
  CHECK(config_hash(moved) == base);

  json canon = canonical_config(c);
  CHECK_FALSE(canon.contains("output_dir"));
  CHECK_FALSE(canon.contains("cache_root"));
  CHECK_FALSE(canon.contains("offline"));
}

TEST_CASE("config hash tracks semantic fields") {
  RunConfig c;
  c.dataset_path = "/data/ds.jsonl";
  std::string base = config_hash(c);

  auto changed = [&](auto mutate) {
    RunConfig m = c;
    mutate(m);
    return config_hash(m) != base;
  };
  CHECK(changed([](RunConfig& m) { m.fpr_budget = 0.01; }));
  CHECK(changed([](RunConfig& m) { m.seed = 7; }));
  CHECK(changed([](RunConfig& m) { m.defense = CompressionLevel::strong; }));
  CHECK(changed([](RunConfig& m) { m.attacks.push_back("thinking_token"); }));
  CHECK(changed([](RunConfig& m) { m.provider.simulator.member_mix = 0.0; }));
  CHECK(changed([](RunConfig& m) { m.encoder.dim = 128; }));

  // Same inputs, same hash.
  RunConfig again;
  again.dataset_path = "/data/ds.jsonl";
  CHECK(config_hash(again) == base);
}

TEST_CASE("demo inputs are deterministic and loadable") {
  TempDir d1("demo1");
  TempDir d2("demo2");
  DemoParams params = small_demo();
  fs::path cfg1 = write_demo_inputs(d1.path(), params);
  fs::path cfg2 = write_demo_inputs(d2.path(), params);

  for (const char* rel : {"inputs/dataset.jsonl", "inputs/recall_anchors.jsonl",
                          "inputs/synthetic_candidates.jsonl", "inputs/template.txt",
                          "config.json"}) {
    CAPTURE(rel);
    CHECK(read_file(d1.path() / rel) == read_file(d2.path() / rel));
  }

  Dataset ds = load_dataset(d1 / "inputs/dataset.jsonl");
  CHECK(ds.sequences.size() == 8);  // 2 classes x 2 docs x 2 segments
  int members = 0;
  for (const QuerySequence& seq : ds.sequences) {
    REQUIRE(seq.label.has_value());
    CHECK(seq.token_length == params.tokens_per_segment);
    if (*seq.label == Label::member) ++members;
  }
  CHECK(members == 4);
  CHECK(ds.metadata.at("tokenizer") == "whitespace");

  AnchorSequenceSet recall = load_anchor_set(d1 / "inputs/recall_anchors.jsonl");
  CHECK(recall.kind == AnchorKind::verbatim_recall);
  CHECK(recall.size() == 3);
  AnchorSequenceSet pool = load_anchor_set(d1 / "inputs/synthetic_candidates.jsonl");
  CHECK(pool.kind == AnchorKind::low_information_synthetic);
  CHECK(pool.size() == 8);

  RunConfig c = load_run_config(cfg1);
  CHECK_NOTHROW(validate_run_config(c));
  CHECK(c.attacks == known_attacks());
}

TEST_CASE("build_axis_only writes a loadable axis") {
  TempDir dir("axisonly");
  fs::path cfg = write_demo_inputs(dir.path(), small_demo());
  RunConfig c = load_run_config(cfg);

  fs::path out = dir / "axis.json";
  RecallInferenceAxis axis = build_axis_only(c, out);
  CHECK(axis.distance > 0.0);
  CHECK(axis.encoder_id == "hash-v1");

  RecallInferenceAxis loaded = load_axis(out);
  CHECK(loaded.distance == doctest::Approx(axis.distance).epsilon(1e-12));
  CHECK(loaded.provenance.k == 3);
  CHECK(loaded.provenance.l == 3);
  CHECK(loaded.provenance.gamma == 3);
}

TEST_CASE("pipeline runs the simulator demo end to end") {
  TempDir dir("e2e");
  fs::path cfg = write_demo_inputs(dir.path(), small_demo());
  RunConfig c = load_run_config(cfg);

  PipelineResult result = run_pipeline(c);
  REQUIRE(result.exit_code == 0);
  CHECK(fs::exists(result.manifest_path));
  CHECK_FALSE(fs::exists(fs::path(c.output_dir) / ".lock"));

  const json& m = result.manifest;
  CHECK(m["version"] == kVersion);
  CHECK(m["n_sequences"] == 8);
  CHECK(m["provider_kind"] == "simulator");
  CHECK(m["offline"] == false);
  CHECK(m["config_hash"] == config_hash(c));
  CHECK(m["dataset_fingerprint"] == sha256_hex(read_file(c.dataset_path)));
  CHECK(m["cache"]["network_calls"] == 0);
  CHECK(m["attacks"].get<std::vector<std::string>>() == known_attacks());

  // Every listed artifact exists, and the list is sorted.
  auto artifacts = m["artifacts"].get<std::vector<std::string>>();
  CHECK(std::is_sorted(artifacts.begin(), artifacts.end()));
  for (const std::string& rel : artifacts) {
    CAPTURE(rel);
    CHECK(fs::exists(fs::path(c.output_dir) / rel));
  }
  for (const std::string& attack : known_attacks()) {
    CHECK(std::find(artifacts.begin(), artifacts.end(), "scores/" + attack + ".jsonl") !=
          artifacts.end());
    CHECK(std::find(artifacts.begin(), artifacts.end(),
                    "metrics/" + attack + ".sequence.json") != artifacts.end());
  }
  CHECK(std::find(artifacts.begin(), artifacts.end(), "pca.csv") != artifacts.end());

  // Score rows are sorted, labeled, and one per sequence.
  std::vector<std::string> ids;
  std::string scores = read_file(fs::path(c.output_dir) / "scores/blackspectrum.jsonl");
  size_t pos = 0;
  while (pos < scores.size()) {
    size_t end = scores.find('\n', pos);
    json row = json::parse(scores.substr(pos, end - pos));
    ids.push_back(row["sequence_id"]);
    CHECK(row["attack_id"] == "blackspectrum");
    CHECK(row["n_samples"] == 3);
    CHECK(row.contains("label"));
    CHECK(row.contains("raw_projection"));
    pos = end + 1;
  }
  CHECK(ids.size() == 8);
  CHECK(std::is_sorted(ids.begin(), ids.end()));

  json seq_metrics =
      json::parse(read_file(fs::path(c.output_dir) / "metrics/blackspectrum.sequence.json"));
  CHECK(seq_metrics["n_scored"] == 8);
  CHECK(seq_metrics["n_member"] == 4);
  CHECK(seq_metrics["n_non_member"] == 4);
  CHECK(seq_metrics["config_hash"] == config_hash(c));
  double auc_value = seq_metrics["auc"].get<double>();
  CHECK(auc_value >= 0.0);
  CHECK(auc_value <= 1.0);

  json doc_metrics =
      json::parse(read_file(fs::path(c.output_dir) / "metrics/blackspectrum.document.json"));
  CHECK(doc_metrics["n_scored"] == 4);
  CHECK(doc_metrics["level"] == "document");

  std::string report = emit_report(c.output_dir);
  CHECK(report.find("sequence-level results") != std::string::npos);
  CHECK(report.find("document-level results") != std::string::npos);
  CHECK(report.find("blackspectrum") != std::string::npos);
  CHECK(report.find("tpr@5%fpr") != std::string::npos);

  // Warm offline rerun into a fresh output dir reproduces every artifact
  // byte for byte; only the manifest (cache counters, offline flag) moves.
  RunConfig warm = c;
  warm.output_dir = (dir / "out2").string();
  warm.offline = true;
  PipelineResult rerun = run_pipeline(warm);
  REQUIRE(rerun.exit_code == 0);
  CHECK(rerun.manifest["cache"]["network_calls"] == 0);
  CHECK(rerun.manifest["cache"]["misses"] == 0);
  CHECK(rerun.manifest["cache"]["hits"].get<int64_t>() > 0);
  CHECK(rerun.manifest["config_hash"] == m["config_hash"]);

  std::vector<std::string> first = list_files(c.output_dir);
  std::vector<std::string> second = list_files(warm.output_dir);
  REQUIRE(first == second);
  for (const std::string& rel : first) {
    if (rel == "manifest.json") continue;
    CAPTURE(rel);
    CHECK(read_file(fs::path(c.output_dir) / rel) ==
          read_file(fs::path(warm.output_dir) / rel));
  }
}

TEST_CASE("pipeline refuses a locked output dir") {
  TempDir dir("lock");
  fs::path cfg = write_demo_inputs(dir.path(), small_demo());
  RunConfig c = load_run_config(cfg);

  fs::create_directories(c.output_dir);
  atomic_write_file(fs::path(c.output_dir) / ".lock", "12345\n");
  std::string msg = config_error_message([&] { run_pipeline(c); });
  CHECK(msg.find("locked") != std::string::npos);

  fs::remove(fs::path(c.output_dir) / ".lock");
  CHECK(run_pipeline(c).exit_code == 0);
}

TEST_CASE("pipeline without labels skips metrics with a note") {
  TempDir dir("nolabel");
  Dataset ds;
  for (int i = 0; i < 2; ++i) {
    QuerySequence seq;
    seq.id = "u" + std::to_string(i);
    seq.text = "a plain sentence about sequence number " + std::to_string(i);
    seq.document_id = seq.id;
    seq.token_length = 7;
    ds.sequences.push_back(std::move(seq));
  }
  save_dataset(ds, dir / "ds.jsonl");
  save_anchor_set(make_anchor_set(AnchorKind::verbatim_recall,
                                  {"An apple a day keeps the doctor away.",
                                   "A stitch in time saves nine."},
                                  "r"),
                  dir / "recall.jsonl");
  save_anchor_set(make_anchor_set(AnchorKind::low_information_synthetic,
                                  {"It was a quiet morning.", "Some things take time."},
                                  "s"),
                  dir / "synth.jsonl");

  RunConfig c;
  c.dataset_path = (dir / "ds.jsonl").string();
  c.anchors.recall_path = (dir / "recall.jsonl").string();
  c.anchors.synthetic_path = (dir / "synth.jsonl").string();
  c.anchors.traces_per_sequence = 1;
  c.samples_per_sequence = 1;
  c.output_dir = (dir / "out").string();
  c.cache_root = (dir / "cache").string();

  PipelineResult result = run_pipeline(c);
  CHECK(result.exit_code == 0);
  bool noted = false;
  for (const auto& note : result.manifest["notes"]) {
    if (note.get<std::string>().find("metrics skipped") != std::string::npos) noted = true;
  }
  CHECK(noted);
  CHECK_FALSE(fs::exists(fs::path(c.output_dir) / "metrics/blackspectrum.sequence.json"));
  CHECK_THROWS_AS(emit_report(c.output_dir), MissingReports);
}

TEST_CASE("pipeline over http: skips, retries cache, and keeps secrets out") {
  const std::string token = "sk-pipeline-secret-93cf07";
  EnvVar guard("BS_PIPE_TOKEN", token);

  std::atomic<int> http_calls{0};
  std::atomic<bool> auth_ok{true};
  TestServer server([&](const httplib::Request& req, httplib::Response& res) {
    http_calls.fetch_add(1);
    if (req.get_header_value("Authorization") != "Bearer " + token) auth_ok = false;
    if (req.body.find("FAILME") != std::string::npos) {
      res.status = 404;
      res.set_content("{\"error\":\"unknown model\"}", "application/json");
      return;
    }
    std::string text = "Consider the passage carefully. Marker " +
                       std::to_string(std::hash<std::string>{}(req.body) % 100000) +
                       " stands out. The wording suggests a tentative answer.";
    json reply{{"choices", json::array({json{{"message", json{{"reasoning_content", text}}}}})}};
    res.set_content(reply.dump(), "application/json");
  });

  TempDir dir("httprun");
  Dataset ds;
  auto add = [&](const std::string& id, const std::string& text, Label label) {
    QuerySequence seq;
    seq.id = id;
    seq.text = text;
    seq.document_id = id;
    seq.token_length = static_cast<int>(whitespace_tokenize(text).size());
    seq.label = label;
    ds.sequences.push_back(std::move(seq));
  };
  add("m-a", "the quick brown fox jumps over the lazy dog", Label::member);
  add("m-b", "pack my box with five dozen liquor jugs", Label::member);
  add("n-a", "how vexingly quick daft zebras jump around", Label::non_member);
  add("n-b", "sphinx of black quartz judge my vow today", Label::non_member);
  add("x-fail", "this row mentions FAILME and cannot be traced", Label::member);
  save_dataset(ds, dir / "ds.jsonl");

  save_anchor_set(make_anchor_set(AnchorKind::verbatim_recall,
                                  {"An apple a day keeps the doctor away.",
                                   "A stitch in time saves nine."},
                                  "r"),
                  dir / "recall.jsonl");
  save_anchor_set(make_anchor_set(AnchorKind::low_information_synthetic,
                                  {"It was a quiet morning.", "Some things take time."},
                                  "s"),
                  dir / "synth.jsonl");

  RunConfig c;
  c.dataset_path = (dir / "ds.jsonl").string();
  c.anchors.recall_path = (dir / "recall.jsonl").string();
  c.anchors.synthetic_path = (dir / "synth.jsonl").string();
  c.anchors.traces_per_sequence = 1;
  c.samples_per_sequence = 1;
  c.output_dir = (dir / "out").string();
  c.cache_root = (dir / "cache").string();
  c.provider.kind = ProviderKind::http;
  c.provider.provider_id = "testhttp";
  c.provider.model_id = "m-test";
  c.provider.endpoint = server.url();
  c.provider.auth_env = "BS_PIPE_TOKEN";

  PipelineResult result = run_pipeline(c);
  CHECK(result.exit_code == 2);
  CHECK(auth_ok.load());

  const json& m = result.manifest;
  CHECK(m["provider_kind"] == "http");
  // 2 recall + 2 synthetic anchors, then 5 queries (one of them the 404).
  CHECK(m["cache"]["network_calls"] == 9);
  CHECK(http_calls.load() == 9);
  CHECK(m["cache"]["hits"] == 0);
  // Failed fetches land in neither bucket: hits + misses counts completed
  // fetches, and writes tracks misses.
  CHECK(m["cache"]["misses"] == 8);
  CHECK(m["cache"]["writes"] == 8);

  REQUIRE(m["skipped"]["blackspectrum"].size() == 1);
  CHECK(m["skipped"]["blackspectrum"][0]["sequence_id"] == "x-fail");

  json metrics =
      json::parse(read_file(fs::path(c.output_dir) / "metrics/blackspectrum.sequence.json"));
  CHECK(metrics["n_scored"] == 4);
  CHECK(metrics["n_skipped"] == 1);

  // The token must not leak into any artifact or cache entry.
  for (const fs::path& root : {fs::path(c.output_dir), fs::path(c.cache_root)}) {
    for (const std::string& rel : list_files(root)) {
      CAPTURE(rel);
      CHECK(read_file(root / rel).find(token) == std::string::npos);
    }
  }

  // Warm offline rerun: zero network, identical artifacts, same skip.
  RunConfig warm = c;
  warm.output_dir = (dir / "out2").string();
  warm.offline = true;
  PipelineResult rerun = run_pipeline(warm);
  CHECK(rerun.exit_code == 2);
  CHECK(http_calls.load() == 9);
  CHECK(rerun.manifest["cache"]["network_calls"] == 0);
  CHECK(rerun.manifest["cache"]["hits"] == 8);
  CHECK(rerun.manifest["cache"]["misses"] == 0);  // the 404 row fails before filling
  CHECK(rerun.manifest["cache"]["writes"] == 0);

  for (const std::string& rel : list_files(c.output_dir)) {
    if (rel == "manifest.json") continue;
    CAPTURE(rel);
    CHECK(read_file(fs::path(c.output_dir) / rel) ==
          read_file(fs::path(warm.output_dir) / rel));
  }
}

TEST_CASE("emit_report orders attacks by auc within each level") {
  TempDir dir("report");
  fs::create_directories(dir / "metrics");
  auto metric = [](const char* attack, double auc_value) {
    return json{{"attack_id", attack}, {"level", "sequence"},  {"auc", auc_value},
                {"balanced_acc", 0.6}, {"best_threshold", 0.5}, {"tpr_at_fpr", 0.1},
                {"p_value", 0.5},      {"effect_size", 0.2},    {"fpr_budget", 0.05},
                {"n_member", 3},       {"n_non_member", 3}};
  };
  atomic_write_file(dir / "metrics/alpha.sequence.json", metric("alpha", 0.70).dump());
  atomic_write_file(dir / "metrics/beta.sequence.json", metric("beta", 0.90).dump());

  std::string report = emit_report(dir.path());
  size_t beta = report.find("beta");
  size_t alpha = report.find("alpha");
  REQUIRE(beta != std::string::npos);
  REQUIRE(alpha != std::string::npos);
  CHECK(beta < alpha);
  CHECK(report.find("document-level results") == std::string::npos);

  TempDir empty("noreport");
  CHECK_THROWS_AS(emit_report(empty.path()), MissingReports);
  fs::create_directories(empty / "metrics");
  atomic_write_file(empty / "metrics/readme.txt", "not a metric");
  CHECK_THROWS_AS(emit_report(empty.path()), MissingReports);
}
