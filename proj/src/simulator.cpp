// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "blackspectrum/errors.hpp"
#include "blackspectrum/rng.hpp"

namespace blackspectrum {

namespace {

// Phrases a model retrieving a memorized passage would produce.
const std::vector<std::string>& recall_core() {
  static const std::vector<std::string> bank{
      "I recognize this passage immediately.",
      "This text is familiar from material I have seen before.",
      "I can recall how the passage continues almost verbatim.",
      "The next word comes to mind at once, without any search.",
      "I am sure I have seen this exact sequence of words.",
      "The source of the passage is clear to me, so the continuation is too.",
      "I remember the stretch around \"{fragment}\" word for word.",
      "No real guessing is needed here because the continuation is memorized.",
      "The phrasing matches a text I know, down to the punctuation.",
      "My certainty about the next word is high.",
      "This reads like a quotation I can complete from memory.",
      "Recall settles the continuation before any analysis starts.",
  };
  return bank;
}

// Phrases a model reasoning about an unseen passage would produce.
const std::vector<std::string>& inference_core() {
  static const std::vector<std::string> bank{
      "Hmm, this passage does not look familiar to me.",
      "Wait, several different continuations seem about equally plausible.",
      "I am not sure I have ever seen this text.",
      "Perhaps the next word is something plain, or maybe something odd.",
      "Let me weigh a few different directions the sentence could take.",
      "The stretch around \"{fragment}\" gives me little to go on.",
      "So the continuation will have to come from general patterns, not memory.",
      "It is hard to tell where this text comes from.",
      "Alternatively, the sentence could swerve somewhere unexpected.",
      "My pick rests on style and rhythm rather than recognition.",
      "Actually, I keep second-guessing which word fits best.",
      "Without recognition, an estimate is the best I can offer.",
  };
  return bank;
}

std::string substitute_fragment(const std::string& phrase, const std::string& fragment) {
  static const std::string placeholder = "{fragment}";
  size_t pos = phrase.find(placeholder);
  if (pos == std::string::npos) return phrase;
  std::string out = phrase;
  out.replace(pos, placeholder.size(), fragment);
  return out;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

const std::vector<std::string>& shared_pool() {
  static const std::vector<std::string> pool{
      "The text to continue is \"{fragment}\".",
      "The task is to produce the single next word of the passage.",
      "The passage breaks off at \"{fragment}\".",
      "I will settle on one continuation and answer with that word.",
      "The register and rhythm of the passage are worth keeping in mind.",
      "Whatever the source, the answer must be a single word.",
  };
  return pool;
}

const std::vector<std::string>& recall_bank() {
  static const std::vector<std::string> bank = [] {
    std::vector<std::string> all = recall_core();
    const auto& pool = shared_pool();
    all.insert(all.end(), pool.begin(), pool.end());
    return all;
  }();
  return bank;
}

const std::vector<std::string>& inference_bank() {
  static const std::vector<std::string> bank = [] {
    std::vector<std::string> all = inference_core();
    const auto& pool = shared_pool();
    all.insert(all.end(), pool.begin(), pool.end());
    return all;
  }();
  return bank;
}

std::string simulate_trace(double mix, uint64_t seed, const std::string& source_text,
                           const SimulatorParams& params) {
  Rng rng(seed);

  std::vector<std::string> tokens = whitespace_tokenize(source_text);
  std::string fragment = "this passage";
  if (!tokens.empty()) {
    size_t span = static_cast<size_t>(rng.next_int(3, 6));
    span = std::min(span, tokens.size());
    size_t start =
        tokens.size() == span ? 0 : rng.next_index(tokens.size() - span + 1);
    fragment.clear();
    for (size_t t = start; t < start + span; ++t) {
      if (!fragment.empty()) fragment.push_back(' ');
      fragment += tokens[t];
    }
  }

  int n_phrases = rng.next_int(7, 9);
  std::string out = substitute_fragment(shared_pool()[0], fragment);
  for (int p = 1; p < n_phrases; ++p) {
    const std::vector<std::string>* bank;
    if (rng.next_double() < params.shared_rate) {
      bank = &shared_pool();
    } else if (rng.bernoulli(mix)) {
      bank = &inference_core();
    } else {
      bank = &recall_core();
    }
    const std::string& phrase = (*bank)[rng.next_index(bank->size())];
    out.push_back(' ');
    out += substitute_fragment(phrase, fragment);
  }
  return out;
}

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (current.empty() && is_space(c)) continue;
    current.push_back(c);
    if (c == '.' || c == '!' || c == '?') {
      if (i + 1 < text.size() && text[i + 1] == '"') {
        current.push_back('"');
        ++i;
      }
      if (i + 1 >= text.size() || is_space(text[i + 1])) {
        out.push_back(current);
        current.clear();
      }
    }
  }
  if (current.find_first_not_of(" \t\n\r") != std::string::npos) out.push_back(current);
  return out;
}

std::string simulate_compression(const std::string& trace_text, CompressionLevel level) {
  size_t keep;
  switch (level) {
    case CompressionLevel::mild:
      keep = 6;
      break;
    case CompressionLevel::strong:
      keep = 3;
      break;
    default:
      throw std::invalid_argument("compression level must be mild or strong");
  }
  std::vector<std::string> sentences = split_sentences(trace_text);
  keep = std::min(keep, sentences.size());
  std::string out;
  for (size_t i = 0; i < keep; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += sentences[i];
  }
  return out;
}

std::string simulate_judgement(const std::string& trace_text) {
  static const std::vector<std::string> confident{
      "recognize",      "recall",       "verbatim",     "memorized",
      "word for word",  "comes to mind", "clear to me",  "quotation",
      "from memory",    "certainty",    "sure i have seen",
  };
  static const std::vector<std::string> hesitant{
      "hmm",        "wait",          "not sure",        "perhaps",
      "maybe",      "weigh",         "little to go on", "hard to tell",
      "alternatively", "second-guessing", "estimate",   "general patterns",
      "does not look familiar",
  };

  std::string lower;
  lower.reserve(trace_text.size());
  for (char c : trace_text) {
    lower.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  auto count_all = [&](const std::vector<std::string>& markers) {
    int total = 0;
    for (const std::string& marker : markers) {
      size_t pos = 0;
      while ((pos = lower.find(marker, pos)) != std::string::npos) {
        ++total;
        pos += marker.size();
      }
    }
    return total;
  };

  int c = count_all(confident);
  int h = count_all(hesitant);
  int score = 5;
  if (c + h > 0) {
    score = 1 + static_cast<int>(std::lround(9.0 * c / (c + h)));
    score = std::clamp(score, 1, 10);
  }
  std::string tail = c >= h ? "reads as confident recall."
                            : "hedges and keeps exploring alternatives.";
  return "Certainty: " + std::to_string(score) + "/10. The reasoning " + tail;
}

std::string simulate_candidate(uint64_t seed, int sample_index) {
  static const std::vector<std::string> pool{
      "As is often said, things tend to follow their usual course",
      "It goes without saying that most days resemble one another",
      "In a certain sense, every beginning looks like another",
      "One might suppose that the rest continues in kind",
      "Generally speaking, such passages proceed as expected",
      "There is a saying that covers situations of this sort",
      "To put it another way, the matter stands as it stands",
      "For what it is worth, the usual pattern holds here",
      "At the end of the day, one thing follows another",
      "In any case, the account goes on in the same manner",
      "Be that as it may, the story keeps to its track",
      "So it goes with texts of this general kind",
      "As things stand, the continuation is much as before",
      "On the whole, the paragraph carries on evenly",
      "All things considered, nothing unusual comes next",
      "In other words, the passage continues in its own way",
      "As a rule, sentences like these end quietly",
      "By and large, the thread picks up where it left off",
      "More often than not, the next part mirrors the last",
      "Such is the way of ordinary prose, one line after another",
  };
  uint64_t rotation = mix_seed(seed, 0x63616e64ULL) % pool.size();
  size_t base = (static_cast<uint64_t>(sample_index) + rotation) % pool.size();
  std::string text = pool[base];
  int round = sample_index / static_cast<int>(pool.size());
  if (round > 0) text += ", round " + std::to_string(round);
  return text;
}

bool sentence_in_bank(const std::string& sentence, const std::vector<std::string>& bank) {
  static const std::string placeholder = "{fragment}";
  for (const std::string& phrase : bank) {
    size_t pos = phrase.find(placeholder);
    if (pos == std::string::npos) {
      if (sentence == phrase) return true;
      continue;
    }
    std::string prefix = phrase.substr(0, pos);
    std::string suffix = phrase.substr(pos + placeholder.size());
    if (sentence.size() >= prefix.size() + suffix.size() &&
        sentence.compare(0, prefix.size(), prefix) == 0 &&
        sentence.compare(sentence.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return true;
    }
  }
  return false;
}

}  // namespace blackspectrum
