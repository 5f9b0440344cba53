// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace blackspectrum {

enum class Label { member, non_member };

std::string to_string(Label label);
Label label_from_string(const std::string& s);  // throws ConfigError on unknown value

// One membership query unit: a fixed-length token span cut from a document.
struct QuerySequence {
  std::string id;
  std::string text;
  int token_length = 0;
  std::string document_id;
  std::optional<Label> label;
  std::optional<std::string> source;

  bool operator==(const QuerySequence&) const = default;
};

struct Dataset {
  std::vector<QuerySequence> sequences;
  // Free-form annotations (tokenizer id, source corpus, label counts, ...).
  std::map<std::string, std::string> metadata;

  bool operator==(const Dataset&) const = default;
};

struct DatasetSummary {
  int n_sequences = 0;
  int n_member = 0;
  int n_non_member = 0;
  int n_unlabeled = 0;
  // n_member / n_non_member, absent when either class is missing.
  std::optional<double> imbalance_ratio;
  std::vector<std::string> notes;
};

using Tokenizer = std::function<std::vector<std::string>(std::string_view)>;

// Splits on runs of ASCII whitespace; punctuation stays attached to words.
std::vector<std::string> whitespace_tokenize(std::string_view text);

// Cuts a document into consecutive, non-overlapping spans for each requested
// token length, dropping the tail shorter than the length. Segment ids are
// "<document_id>:L<length>:<index>". Tokenizer defaults to whitespace_tokenize.
// Throws EmptyDocument when the document has no tokens.
std::vector<QuerySequence> segment_text(const std::string& document,
                                        const std::string& document_id,
                                        const std::set<int>& token_lengths,
                                        const Tokenizer& tokenizer = nullptr);

// JSON Lines, one object per sequence, keys sorted, so saving is
// deterministic. Metadata, when present, lives in a "<path>.meta.json"
// sidecar; the sequence file itself stays plain JSONL.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

// Throws ParseError (with 1-based line number) on malformed lines and
// DuplicateId on repeated sequence ids.
Dataset load_dataset(const std::filesystem::path& path);

// Counts labels and flags imbalance (minority class below ~1/3 of the
// majority) or missing labels in the notes.
DatasetSummary validate_dataset(const Dataset& dataset);

}  // namespace blackspectrum
