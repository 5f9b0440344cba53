// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0
//
// Python bindings for the attack library. Scalar-and-dict oriented: score
// collections travel as plain lists, reports and manifests as dicts, so the
// module composes with pandas/numpy without custom types on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "blackspectrum/anchors.hpp"
#include "blackspectrum/attack.hpp"
#include "blackspectrum/baselines.hpp"
#include "blackspectrum/dataset.hpp"
#include "blackspectrum/embedding.hpp"
#include "blackspectrum/errors.hpp"
#include "blackspectrum/evaluation.hpp"
#include "blackspectrum/pipeline.hpp"

namespace py = pybind11;
using namespace blackspectrum;
using nlohmann::json;

namespace {

py::object json_to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return py::none();
    case json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case json::value_t::number_integer:
      return py::int_(j.get<int64_t>());
    case json::value_t::number_unsigned:
      return py::int_(j.get<uint64_t>());
    case json::value_t::number_float:
      return py::float_(j.get<double>());
    case json::value_t::string:
      return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list out;
      for (const json& item : j) out.append(json_to_py(item));
      return out;
    }
    case json::value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
      return out;
    }
    default:
      return py::none();
  }
}

LabeledScores to_entries(const std::vector<double>& member_scores,
                         const std::vector<double>& non_member_scores) {
  LabeledScores entries;
  entries.reserve(member_scores.size() + non_member_scores.size());
  for (size_t i = 0; i < member_scores.size(); ++i) {
    entries.push_back({"m" + std::to_string(i), member_scores[i], Label::member, ""});
  }
  for (size_t i = 0; i < non_member_scores.size(); ++i) {
    entries.push_back({"n" + std::to_string(i), non_member_scores[i], Label::non_member, ""});
  }
  return entries;
}

Granularity granularity_from_string(const std::string& name) {
  if (name == "character" || name == "char") return Granularity::character;
  if (name == "token") return Granularity::token;
  throw ConfigError("granularity must be 'character' or 'token', got '" + name + "'");
}

py::dict score_to_dict(const MembershipScore& s) {
  py::dict out;
  out["score"] = s.score;
  out["raw_projection"] = s.raw_projection;
  out["attack_id"] = s.attack_id;
  out["n_samples"] = s.n_samples;
  return out;
}

}  // namespace

PYBIND11_MODULE(_blackspectrum, m) {
  m.doc() = "Membership inference attacks against black-box reasoning APIs";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "Error");

  m.def("known_attacks", [] { return known_attacks(); },
        "Attack ids accepted by run configs, in canonical order.");

  // -- embedding ------------------------------------------------------------
  m.def("hash_embed", &hash_embed, py::arg("text"), py::arg("dim") = 256,
        "Deterministic char n-gram feature-hashing embedding, L2-normalized.");
  m.def("denoise", &denoise, py::arg("trace_embedding"), py::arg("sequence_embedding"),
        py::arg("tol") = 1e-12,
        "Remove the component aligned with the sequence embedding.");
  m.def("cosine_similarity", &cosine_similarity, py::arg("a"), py::arg("b"));

  // -- dataset --------------------------------------------------------------
  py::class_<QuerySequence>(m, "QuerySequence")
      .def(py::init<>())
      .def_readwrite("id", &QuerySequence::id)
      .def_readwrite("text", &QuerySequence::text)
      .def_readwrite("token_length", &QuerySequence::token_length)
      .def_readwrite("document_id", &QuerySequence::document_id)
      .def_property(
          "label",
          [](const QuerySequence& s) -> py::object {
            if (!s.label) return py::none();
            return py::str(to_string(*s.label));
          },
          [](QuerySequence& s, const py::object& value) {
            if (value.is_none()) {
              s.label.reset();
            } else {
              s.label = label_from_string(value.cast<std::string>());
            }
          })
      .def_property(
          "source",
          [](const QuerySequence& s) -> py::object {
            if (!s.source) return py::none();
            return py::str(*s.source);
          },
          [](QuerySequence& s, const py::object& value) {
            if (value.is_none()) {
              s.source.reset();
            } else {
              s.source = value.cast<std::string>();
            }
          })
      .def("__repr__", [](const QuerySequence& s) {
        return "<QuerySequence id='" + s.id + "' tokens=" + std::to_string(s.token_length) +
               ">";
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("sequences", &Dataset::sequences)
      .def_readwrite("metadata", &Dataset::metadata)
      .def("__len__", [](const Dataset& d) { return d.sequences.size(); });

  m.def("whitespace_tokenize",
        [](const std::string& text) { return whitespace_tokenize(text); },
        py::arg("text"));
  m.def(
      "segment_text",
      [](const std::string& document, const std::string& document_id,
         const std::set<int>& token_lengths) {
        return segment_text(document, document_id, token_lengths);
      },
      py::arg("document"), py::arg("document_id"), py::arg("token_lengths"),
      "Cut a document into fixed-length token spans (tail dropped).");
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("save_dataset", &save_dataset, py::arg("dataset"), py::arg("path"));
  m.def(
      "validate_dataset",
      [](const Dataset& dataset) {
        DatasetSummary s = validate_dataset(dataset);
        py::dict out;
        out["n_sequences"] = s.n_sequences;
        out["n_member"] = s.n_member;
        out["n_non_member"] = s.n_non_member;
        out["n_unlabeled"] = s.n_unlabeled;
        out["imbalance_ratio"] =
            s.imbalance_ratio ? py::object(py::float_(*s.imbalance_ratio)) : py::none();
        out["notes"] = s.notes;
        return out;
      },
      py::arg("dataset"));

  // -- anchors and the recall/inference axis --------------------------------
  py::class_<RecallInferenceAxis>(m, "RecallInferenceAxis")
      .def_readonly("encoder_id", &RecallInferenceAxis::encoder_id)
      .def_readonly("anchor_recall", &RecallInferenceAxis::anchor_recall)
      .def_readonly("anchor_inference", &RecallInferenceAxis::anchor_inference)
      .def_readonly("direction", &RecallInferenceAxis::direction)
      .def_readonly("distance", &RecallInferenceAxis::distance)
      .def("__repr__", [](const RecallInferenceAxis& a) {
        return "<RecallInferenceAxis dim=" + std::to_string(a.direction.size()) +
               " distance=" + std::to_string(a.distance) + ">";
      });

  m.def(
      "next_token_entropy",
      [](const std::map<std::string, double>& probabilities, int vocab_size) {
        NextTokenDistribution d;
        d.probabilities = probabilities;
        d.vocab_size = vocab_size;
        return next_token_entropy(d);
      },
      py::arg("probabilities"), py::arg("vocab_size"),
      "Shannon entropy (natural log) of a next-token distribution.");
  m.def("build_anchor", &build_anchor, py::arg("vectors"),
        "Component-wise mean of denoised trace embeddings.");
  m.def("build_axis", &build_axis, py::arg("anchor_recall"), py::arg("anchor_inference"),
        py::arg("min_distance") = 1e-9);
  m.def("save_axis", &save_axis, py::arg("axis"), py::arg("path"));
  m.def("load_axis", &load_axis, py::arg("path"));

  // -- scoring ---------------------------------------------------------------
  m.def("project_onto_axis", &project_onto_axis, py::arg("trace_embedding"), py::arg("axis"),
        "rho: signed distance of the denoised embedding along the axis.");
  m.def(
      "membership_score",
      [](const LatentVector& trace_embedding, const RecallInferenceAxis& axis) {
        return score_to_dict(membership_score(trace_embedding, axis));
      },
      py::arg("trace_embedding"), py::arg("axis"),
      "epsilon = 1 - rho/distance: 1 at the recall anchor, 0 at inference.");
  m.def(
      "decide",
      [](double score, double threshold) {
        MembershipScore s;
        s.score = score;
        return to_string(decide(s, threshold));
      },
      py::arg("score"), py::arg("threshold"),
      "'member' iff score >= threshold (boundary inclusive).");
  m.def(
      "edit_distance",
      [](const std::string& a, const std::string& b, const std::string& granularity) {
        return edit_distance(a, b, granularity_from_string(granularity));
      },
      py::arg("a"), py::arg("b"), py::arg("granularity") = "character");

  // -- evaluation -------------------------------------------------------------
  m.def(
      "roc_points",
      [](const std::vector<double>& member_scores,
         const std::vector<double>& non_member_scores) {
        py::list out;
        for (const RocPoint& p : roc_points(to_entries(member_scores, non_member_scores))) {
          out.append(py::make_tuple(p.threshold, p.fpr, p.tpr));
        }
        return out;
      },
      py::arg("member_scores"), py::arg("non_member_scores"),
      "(threshold, fpr, tpr) triples, thresholds descending from +inf.");
  m.def(
      "auc",
      [](const std::vector<double>& member_scores,
         const std::vector<double>& non_member_scores) {
        return auc(to_entries(member_scores, non_member_scores));
      },
      py::arg("member_scores"), py::arg("non_member_scores"));
  m.def(
      "balanced_accuracy",
      [](const std::vector<double>& member_scores,
         const std::vector<double>& non_member_scores) {
        BalancedAccuracyResult r =
            balanced_accuracy(to_entries(member_scores, non_member_scores));
        return py::make_tuple(r.acc, r.best_threshold);
      },
      py::arg("member_scores"), py::arg("non_member_scores"),
      "Best (tpr + tnr)/2 over thresholds, with the achieving threshold.");
  m.def(
      "tpr_at_fpr",
      [](const std::vector<double>& member_scores,
         const std::vector<double>& non_member_scores, double fpr_budget) {
        return tpr_at_fpr(to_entries(member_scores, non_member_scores), fpr_budget);
      },
      py::arg("member_scores"), py::arg("non_member_scores"), py::arg("fpr_budget") = 0.05);
  m.def(
      "welch_t_test",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        TTestResult r = welch_t_test(a, b);
        return py::make_tuple(r.t, r.p_value, r.df);
      },
      py::arg("a"), py::arg("b"), "(t, p_value, degrees_of_freedom).");
  m.def("effect_size", &effect_size, py::arg("a"), py::arg("b"),
        "Cohen's d with pooled sample standard deviation.");
  m.def(
      "compute_metrics",
      [](const std::vector<double>& member_scores,
         const std::vector<double>& non_member_scores, double fpr_budget) {
        MetricsReport r =
            compute_metrics(to_entries(member_scores, non_member_scores), fpr_budget);
        py::dict out;
        out["balanced_acc"] = r.balanced_acc;
        out["best_threshold"] = r.best_threshold;
        out["auc"] = r.auc;
        out["tpr_at_fpr"] = r.tpr_at_fpr;
        out["fpr_budget"] = r.fpr_budget;
        out["t_statistic"] = r.t_statistic;
        out["p_value"] = r.p_value;
        out["effect_size"] = r.effect_size;
        return out;
      },
      py::arg("member_scores"), py::arg("non_member_scores"), py::arg("fpr_budget") = 0.05);
  m.def(
      "aggregate_documents",
      [](const py::list& rows) {
        LabeledScores entries;
        for (const auto& item : rows) {
          py::dict row = item.cast<py::dict>();
          entries.push_back({row["sequence_id"].cast<std::string>(),
                             row["score"].cast<double>(),
                             label_from_string(row["label"].cast<std::string>()),
                             row["document_id"].cast<std::string>()});
        }
        py::list out;
        for (const LabeledEntry& e : aggregate_documents(entries)) {
          py::dict row;
          row["sequence_id"] = e.sequence_id;
          row["score"] = e.score;
          row["label"] = to_string(e.label);
          row["document_id"] = e.document_id;
          out.append(row);
        }
        return out;
      },
      py::arg("rows"),
      "Mean score per document; label conflicts raise MixedLabelsWithinDocument.");
  m.def(
      "pca_project",
      [](const std::vector<LatentVector>& vectors, int components) {
        PcaResult r = pca_project(vectors, components);
        py::dict out;
        out["projections"] = r.projections;
        out["components"] = r.components;
        out["explained_variance_ratios"] = r.explained_variance_ratios;
        return out;
      },
      py::arg("vectors"), py::arg("components") = 2);
  m.def("regularized_incomplete_beta", &regularized_incomplete_beta, py::arg("a"),
        py::arg("b"), py::arg("x"));

  // -- pipeline ----------------------------------------------------------------
  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config_path) {
        PipelineResult result = run_pipeline(load_run_config(config_path));
        py::dict out;
        out["exit_code"] = result.exit_code;
        out["manifest_path"] = result.manifest_path.string();
        out["manifest"] = json_to_py(result.manifest);
        return out;
      },
      py::arg("config_path"),
      "Full run (anchors, attacks, evaluation, exports) from a config file.");
  m.def("config_hash",
        [](const std::filesystem::path& config_path) {
          return config_hash(load_run_config(config_path));
        },
        py::arg("config_path"),
        "Hash of the run semantics; artifact locations and offline mode excluded.");
  m.def(
      "write_demo_inputs",
      [](const std::filesystem::path& dir, uint64_t seed, int docs_per_class,
         int segments_per_doc, int tokens_per_segment, int recall_anchor_count,
         int candidate_count, int gamma, double member_mix, double non_member_mix) {
        DemoParams p;
        p.seed = seed;
        p.docs_per_class = docs_per_class;
        p.segments_per_doc = segments_per_doc;
        p.tokens_per_segment = tokens_per_segment;
        p.recall_anchor_count = recall_anchor_count;
        p.candidate_count = candidate_count;
        p.gamma = gamma;
        p.member_mix = member_mix;
        p.non_member_mix = non_member_mix;
        return write_demo_inputs(dir, p).string();
      },
      py::arg("dir"), py::arg("seed") = 1, py::arg("docs_per_class") = 10,
      py::arg("segments_per_doc") = 10, py::arg("tokens_per_segment") = 32,
      py::arg("recall_anchor_count") = 5, py::arg("candidate_count") = 12,
      py::arg("gamma") = 5, py::arg("member_mix") = 0.15, py::arg("non_member_mix") = 0.85,
      "Write a self-contained simulator benchmark; returns the config path.");
  m.def("emit_report", [](const std::filesystem::path& output_dir) {
          return emit_report(output_dir);
        },
        py::arg("output_dir"), "Plain-text summary of the metrics in an output dir.");
}
