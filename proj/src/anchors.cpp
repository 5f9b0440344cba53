// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/anchors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "blackspectrum/errors.hpp"
#include "blackspectrum/io.hpp"

namespace blackspectrum {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(AnchorKind kind) {
  return kind == AnchorKind::verbatim_recall ? "verbatim_recall"
                                             : "low_information_synthetic";
}

AnchorKind anchor_kind_from_string(const std::string& s) {
  if (s == "verbatim_recall") return AnchorKind::verbatim_recall;
  if (s == "low_information_synthetic") return AnchorKind::low_information_synthetic;
  throw ConfigError("unknown anchor kind '" + s + "'");
}

double next_token_entropy(const NextTokenDistribution& distribution) {
  if (distribution.vocab_size < 1) {
    throw InvalidDistribution("vocab_size must be positive");
  }
  double sum = 0.0;
  double h = 0.0;
  for (const auto& [token, p] : distribution.probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw InvalidDistribution("probability of '" + token + "' is invalid");
    }
    sum += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw InvalidDistribution("probabilities sum to " + std::to_string(sum));
  }
  return h;
}

AnchorSequenceSet select_top_gamma(
    const std::vector<std::pair<QuerySequence, NextTokenDistribution>>& candidates,
    int gamma) {
  if (gamma < 1) throw std::invalid_argument("gamma must be >= 1");
  if (static_cast<size_t>(gamma) > candidates.size()) {
    throw GammaTooLarge("gamma " + std::to_string(gamma) + " exceeds " +
                        std::to_string(candidates.size()) + " candidates");
  }

  std::vector<std::pair<double, size_t>> ranked;  // (entropy, input position)
  ranked.reserve(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    ranked.emplace_back(next_token_entropy(candidates[i].second), i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return candidates[a.second].first.id < candidates[b.second].first.id;
  });

  std::vector<bool> keep(candidates.size(), false);
  for (int g = 0; g < gamma; ++g) keep[ranked[g].second] = true;

  AnchorSequenceSet set;
  set.kind = AnchorKind::low_information_synthetic;
  for (size_t i = 0; i < candidates.size(); ++i) {
    if (keep[i]) set.sequences.push_back(candidates[i].first);
  }
  return set;
}

LatentVector build_anchor(const std::vector<LatentVector>& traces) {
  if (traces.empty()) throw EmptyInput("anchor needs at least one trace vector");
  const size_t dim = traces.front().size();
  LatentVector mean(dim, 0.0);
  for (const LatentVector& v : traces) {
    if (v.size() != dim) {
      throw DimensionMismatch("anchor traces mix dims " + std::to_string(dim) +
                              " and " + std::to_string(v.size()));
    }
    for (size_t i = 0; i < dim; ++i) mean[i] += v[i];
  }
  for (double& x : mean) x /= static_cast<double>(traces.size());
  return mean;
}

RecallInferenceAxis build_axis(const LatentVector& anchor_recall,
                               const LatentVector& anchor_inference,
                               double min_distance) {
  if (anchor_recall.size() != anchor_inference.size()) {
    throw DimensionMismatch("anchor dims differ");
  }
  LatentVector u(anchor_recall.size());
  for (size_t i = 0; i < u.size(); ++i) u[i] = anchor_inference[i] - anchor_recall[i];
  double distance = l2_norm(u);
  if (distance < min_distance) {
    throw DegenerateAxis("anchors are " + std::to_string(distance) +
                         " apart (min " + std::to_string(min_distance) + ")");
  }
  RecallInferenceAxis axis;
  axis.anchor_recall = anchor_recall;
  axis.anchor_inference = anchor_inference;
  axis.direction = std::move(u);
  for (double& x : axis.direction) x /= distance;
  axis.distance = distance;
  return axis;
}

void save_axis(const RecallInferenceAxis& axis, const fs::path& path) {
  json provenance{{"k", axis.provenance.k},
                  {"l", axis.provenance.l},
                  {"gamma", axis.provenance.gamma},
                  {"traces_per_sequence", axis.provenance.traces_per_sequence}};
  if (axis.provenance.entropy_top_k) {
    provenance["entropy_top_k"] = *axis.provenance.entropy_top_k;
    provenance["entropy_approximate"] = true;
  }
  json j{{"encoder_id", axis.encoder_id},
         {"dim", axis.anchor_recall.size()},
         {"anchor_recall", axis.anchor_recall},
         {"anchor_inference", axis.anchor_inference},
         {"direction", axis.direction},
         {"distance", axis.distance},
         {"provenance", provenance}};
  atomic_write_file(path, j.dump(2) + "\n");
}

RecallInferenceAxis load_axis(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw IoError("invalid axis file " + path.string() + ": " + e.what());
  }

  RecallInferenceAxis axis;
  try {
    axis.encoder_id = j.at("encoder_id").get<std::string>();
    axis.anchor_recall = j.at("anchor_recall").get<LatentVector>();
    axis.anchor_inference = j.at("anchor_inference").get<LatentVector>();
    axis.direction = j.at("direction").get<LatentVector>();
    axis.distance = j.at("distance").get<double>();
    const json& p = j.at("provenance");
    axis.provenance.k = p.at("k").get<int>();
    axis.provenance.l = p.at("l").get<int>();
    axis.provenance.gamma = p.at("gamma").get<int>();
    axis.provenance.traces_per_sequence = p.at("traces_per_sequence").get<int>();
    if (p.contains("entropy_top_k")) {
      axis.provenance.entropy_top_k = p["entropy_top_k"].get<int>();
    }
  } catch (const json::exception& e) {
    throw IoError("axis file " + path.string() + " is missing fields: " + e.what());
  }

  size_t dim = j.value("dim", axis.anchor_recall.size());
  if (axis.anchor_recall.size() != dim || axis.anchor_inference.size() != dim ||
      axis.direction.size() != dim) {
    throw DimensionMismatch("axis file vectors disagree on dimension");
  }
  if (axis.distance <= 0.0 || std::abs(l2_norm(axis.direction) - 1.0) > 1e-9) {
    throw ParseError(1, "axis file violates direction/distance invariants");
  }
  return axis;
}

AnchorSequenceSet load_anchor_set(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open anchor set: " + path.string());

  AnchorSequenceSet set;
  std::optional<AnchorKind> kind;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j.contains("kind") ||
        !j["id"].is_string() || !j["text"].is_string() || !j["kind"].is_string()) {
      throw ParseError(line_no, "anchor rows need string id, text, kind");
    }
    AnchorKind row_kind;
    try {
      row_kind = anchor_kind_from_string(j["kind"].get<std::string>());
    } catch (const ConfigError& e) {
      throw ParseError(line_no, e.what());
    }
    if (kind && *kind != row_kind) {
      throw ParseError(line_no, "anchor set mixes kinds");
    }
    kind = row_kind;

    QuerySequence seq;
    seq.id = j["id"].get<std::string>();
    seq.text = j["text"].get<std::string>();
    if (seq.id.empty() || seq.text.empty()) throw ParseError(line_no, "empty id or text");
    seq.document_id = seq.id;
    seq.token_length = static_cast<int>(whitespace_tokenize(seq.text).size());
    set.sequences.push_back(std::move(seq));
  }
  if (set.sequences.empty()) throw EmptyInput("anchor set " + path.string() + " is empty");
  set.kind = *kind;
  return set;
}

void save_anchor_set(const AnchorSequenceSet& set, const fs::path& path) {
  std::string body;
  for (const QuerySequence& seq : set.sequences) {
    json j{{"id", seq.id}, {"text", seq.text}, {"kind", to_string(set.kind)}};
    body += j.dump();
    body.push_back('\n');
  }
  atomic_write_file(path, body);
}

}  // namespace blackspectrum
