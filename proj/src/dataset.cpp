// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/dataset.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "blackspectrum/errors.hpp"
#include "blackspectrum/io.hpp"

namespace blackspectrum {

using nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(Label label) {
  return label == Label::member ? "member" : "non_member";
}

Label label_from_string(const std::string& s) {
  if (s == "member") return Label::member;
  if (s == "non_member") return Label::non_member;
  throw ConfigError("unknown label '" + s + "' (expected member or non_member)");
}

std::vector<std::string> whitespace_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  size_t i = 0;
  auto is_space = [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::vector<QuerySequence> segment_text(const std::string& document,
                                        const std::string& document_id,
                                        const std::set<int>& token_lengths,
                                        const Tokenizer& tokenizer) {
  std::vector<std::string> tokens =
      tokenizer ? tokenizer(document) : whitespace_tokenize(document);
  if (tokens.empty()) throw EmptyDocument("document '" + document_id + "' has no tokens");

  std::vector<QuerySequence> out;
  for (int length : token_lengths) {
    if (length < 1) throw std::invalid_argument("segment length must be >= 1");
    size_t n_segments = tokens.size() / static_cast<size_t>(length);
    for (size_t s = 0; s < n_segments; ++s) {
      QuerySequence seq;
      seq.id = document_id + ":L" + std::to_string(length) + ":" + std::to_string(s);
      seq.document_id = document_id;
      seq.token_length = length;
      std::string text;
      for (size_t t = s * length; t < (s + 1) * static_cast<size_t>(length); ++t) {
        if (!text.empty()) text.push_back(' ');
        text += tokens[t];
      }
      seq.text = std::move(text);
      out.push_back(std::move(seq));
    }
  }
  return out;
}

namespace {

fs::path metadata_sidecar(const fs::path& path) {
  fs::path side = path;
  side += ".meta.json";
  return side;
}

}  // namespace

void save_dataset(const Dataset& dataset, const fs::path& path) {
  std::string body;
  for (const QuerySequence& seq : dataset.sequences) {
    json j;
    j["id"] = seq.id;
    j["text"] = seq.text;
    j["token_length"] = seq.token_length;
    j["document_id"] = seq.document_id;
    if (seq.label) j["label"] = to_string(*seq.label);
    if (seq.source) j["source"] = *seq.source;
    body += j.dump();
    body.push_back('\n');
  }
  atomic_write_file(path, body);

  fs::path side = metadata_sidecar(path);
  if (dataset.metadata.empty()) {
    std::error_code ec;
    fs::remove(side, ec);
  } else {
    atomic_write_file(side, json(dataset.metadata).dump(2) + "\n");
  }
}

Dataset load_dataset(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path.string());

  Dataset dataset;
  std::unordered_set<std::string> seen_ids;
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
    if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");

    auto require_string = [&](const char* key) -> std::string {
      if (!j.contains(key) || !j[key].is_string()) {
        throw ParseError(line_no, std::string("missing or non-string '") + key + "'");
      }
      std::string value = j[key].get<std::string>();
      if (value.empty()) throw ParseError(line_no, std::string("empty '") + key + "'");
      return value;
    };

    QuerySequence seq;
    seq.id = require_string("id");
    seq.text = require_string("text");
    seq.document_id = require_string("document_id");
    if (!j.contains("token_length") || !j["token_length"].is_number_integer()) {
      throw ParseError(line_no, "missing or non-integer 'token_length'");
    }
    seq.token_length = j["token_length"].get<int>();
    if (seq.token_length <= 0) throw ParseError(line_no, "'token_length' must be positive");

    if (j.contains("label")) {
      if (!j["label"].is_string()) throw ParseError(line_no, "non-string 'label'");
      std::string raw = j["label"].get<std::string>();
      if (raw == "member") {
        seq.label = Label::member;
      } else if (raw == "non_member") {
        seq.label = Label::non_member;
      } else {
        throw ParseError(line_no, "unknown label '" + raw + "'");
      }
    }
    if (j.contains("source")) {
      if (!j["source"].is_string()) throw ParseError(line_no, "non-string 'source'");
      seq.source = j["source"].get<std::string>();
    }

    if (!seen_ids.insert(seq.id).second) throw DuplicateId(line_no, seq.id);
    dataset.sequences.push_back(std::move(seq));
  }

  fs::path side = metadata_sidecar(path);
  if (fs::exists(side)) {
    json meta;
    try {
      meta = json::parse(read_file(side));
    } catch (const json::parse_error& e) {
      throw IoError("invalid metadata sidecar " + side.string() + ": " + e.what());
    }
    for (auto& [key, value] : meta.items()) {
      dataset.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
  }
  return dataset;
}

DatasetSummary validate_dataset(const Dataset& dataset) {
  DatasetSummary summary;
  summary.n_sequences = static_cast<int>(dataset.sequences.size());
  for (const QuerySequence& seq : dataset.sequences) {
    if (!seq.label) {
      ++summary.n_unlabeled;
    } else if (*seq.label == Label::member) {
      ++summary.n_member;
    } else {
      ++summary.n_non_member;
    }
  }

  if (summary.n_sequences == 0) summary.notes.push_back("dataset is empty");
  if (summary.n_member + summary.n_non_member == 0) {
    if (summary.n_sequences > 0) summary.notes.push_back("no labels present");
    return summary;
  }
  if (summary.n_unlabeled > 0) {
    summary.notes.push_back(std::to_string(summary.n_unlabeled) + " sequences unlabeled");
  }
  if (summary.n_member == 0) summary.notes.push_back("no member sequences");
  if (summary.n_non_member == 0) summary.notes.push_back("no non-member sequences");
  if (summary.n_member > 0 && summary.n_non_member > 0) {
    summary.imbalance_ratio =
        static_cast<double>(summary.n_member) / static_cast<double>(summary.n_non_member);
    double minority = std::min(summary.n_member, summary.n_non_member);
    double majority = std::max(summary.n_member, summary.n_non_member);
    if (minority / majority < 1.0 / 3.0) {
      std::ostringstream note;
      note << "imbalanced labels (member:non_member = " << summary.n_member << ":"
           << summary.n_non_member << ")";
      summary.notes.push_back(note.str());
    }
  }
  return summary;
}

}  // namespace blackspectrum
