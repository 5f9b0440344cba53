// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>

#include "blackspectrum/errors.hpp"

namespace blackspectrum {

const std::set<std::string>& builtin_stopwords() {
  static const std::set<std::string> words{
      "a",    "an",   "the",  "of",   "in",   "on",    "at",   "to",
      "and",  "or",   "is",   "are",  "was",  "were",  "be",   "been",
      "it",   "its",  "this", "that", "as",   "by",    "for",  "with",
      "from", "into", "over", "under", "than", "then",  "there", "here",
  };
  return words;
}

namespace {

std::string lowercase_strip(const std::string& raw) {
  size_t begin = 0;
  size_t end = raw.size();
  auto keep = [](unsigned char c) { return std::isalnum(c) || c == '\'' || c >= 0x80; };
  while (begin < end && !keep(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && !keep(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string out = raw.substr(begin, end - begin);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> read_word_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    size_t last = line.find_last_not_of(" \t\r");
    lines.push_back(line.substr(first, last - first + 1));
  }
  return lines;
}

}  // namespace

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::set<std::string> words;
  for (const std::string& line : read_word_lines(path)) {
    std::string w = line;
    for (char& c : w) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    words.insert(w);
  }
  return words;
}

ThinkingTokenSeedSet load_seed_set(const std::filesystem::path& path,
                                   double similarity_threshold) {
  ThinkingTokenSeedSet set;
  set.seeds = read_word_lines(path);
  set.similarity_threshold = similarity_threshold;
  if (set.seeds.empty()) throw EmptyInput("seed set " + path.string() + " is empty");
  return set;
}

const ThinkingTokenSeedSet& builtin_seed_set() {
  static const ThinkingTokenSeedSet set{
      {"hmm", "wait", "so", "maybe", "perhaps", "alternatively", "actually",
       "let me think", "hold on", "on second thought"},
      0.8};
  return set;
}

std::vector<std::string> extract_candidates(const std::string& text,
                                            const std::set<std::string>& stopwords) {
  std::vector<std::string> words;
  for (const std::string& raw : whitespace_tokenize(text)) {
    std::string w = lowercase_strip(raw);
    if (!w.empty() && stopwords.find(w) == stopwords.end()) words.push_back(std::move(w));
  }

  std::vector<std::string> candidates = words;
  for (size_t n = 2; n <= 3; ++n) {
    if (words.size() < n) break;
    for (size_t i = 0; i + n <= words.size(); ++i) {
      std::string gram = words[i];
      for (size_t k = 1; k < n; ++k) {
        gram.push_back(' ');
        gram += words[i + k];
      }
      candidates.push_back(std::move(gram));
    }
  }
  return candidates;
}

MembershipScore thinking_token_score(const ReasoningTrace& trace,
                                     const ThinkingTokenSeedSet& seeds, Embedder& encoder,
                                     const std::set<std::string>& stopwords) {
  if (trace.trace_text.empty()) throw EmptyText("trace is empty");
  if (seeds.seeds.empty()) throw EmptyInput("seed set is empty");

  std::vector<LatentVector> seed_vecs = encoder.embed_batch(seeds.seeds);
  std::vector<std::string> candidates = extract_candidates(trace.trace_text, stopwords);

  int count = 0;
  if (!candidates.empty()) {
    std::vector<LatentVector> cand_vecs = encoder.embed_batch(candidates);
    for (const LatentVector& c : cand_vecs) {
      double best = -1.0;
      for (const LatentVector& s : seed_vecs) {
        best = std::max(best, cosine_similarity(c, s));
      }
      if (best >= seeds.similarity_threshold) ++count;
    }
  }

  MembershipScore score;
  score.sequence_id = trace.sequence_id;
  score.attack_id = "thinking_token";
  score.raw_projection = static_cast<double>(count);
  score.score = -static_cast<double>(count);
  score.n_samples = 1;
  return score;
}

MembershipScore compression_rate_score(const ReasoningTrace& trace, ReferenceScorer& scorer) {
  std::vector<double> nlls = scorer.token_nlls(trace.trace_text);
  if (nlls.empty()) {
    throw ScorerError("trace yields no tokens under scorer " + scorer.scorer_id());
  }
  for (double v : nlls) {
    if (!std::isfinite(v)) throw ScorerError("non-finite NLL from " + scorer.scorer_id());
  }
  double mean = std::accumulate(nlls.begin(), nlls.end(), 0.0) /
                static_cast<double>(nlls.size());

  MembershipScore score;
  score.sequence_id = trace.sequence_id;
  score.attack_id = "compression_rate";
  score.raw_projection = mean;
  score.score = -mean;
  score.n_samples = 1;
  return score;
}

namespace {

// Two-row Levenshtein over arbitrary unit sequences.
template <typename T>
int levenshtein(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty()) return static_cast<int>(b.size());
  if (b.empty()) return static_cast<int>(a.size());

  std::vector<int> prev(b.size() + 1);
  std::vector<int> curr(b.size() + 1);
  std::iota(prev.begin(), prev.end(), 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    curr[0] = static_cast<int>(i);
    for (size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      curr[j] = std::min({prev[j] + 1, curr[j - 1] + 1, sub});
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

// Decodes UTF-8 into codepoints; bytes of invalid sequences pass through
// one by one so the distance stays well-defined on arbitrary input.
std::vector<uint32_t> codepoints(const std::string& s) {
  std::vector<uint32_t> out;
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = s[i];
    int extra = 0;
    uint32_t cp = c;
    if (c >= 0xf0) {
      extra = 3;
      cp = c & 0x07;
    } else if (c >= 0xe0) {
      extra = 2;
      cp = c & 0x0f;
    } else if (c >= 0xc0) {
      extra = 1;
      cp = c & 0x1f;
    }
    if (i + extra >= s.size() && extra > 0) {
      out.push_back(c);
      ++i;
      continue;
    }
    bool valid = true;
    for (int k = 1; k <= extra; ++k) {
      unsigned char cc = s[i + k];
      if ((cc & 0xc0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3f);
    }
    if (!valid) {
      out.push_back(c);
      ++i;
    } else {
      out.push_back(cp);
      i += extra + 1;
    }
  }
  return out;
}

}  // namespace

int edit_distance(const std::string& a, const std::string& b, Granularity granularity) {
  if (granularity == Granularity::character) {
    return levenshtein(codepoints(a), codepoints(b));
  }
  return levenshtein(whitespace_tokenize(a), whitespace_tokenize(b));
}

MembershipScore trace_consistency_score(const std::vector<ReasoningTrace>& traces,
                                        Granularity granularity) {
  if (traces.size() < 2) {
    throw InsufficientTraces("consistency needs >= 2 traces, got " +
                             std::to_string(traces.size()));
  }
  for (const ReasoningTrace& t : traces) {
    if (t.sequence_id != traces.front().sequence_id) {
      throw std::invalid_argument("consistency traces must share a sequence_id");
    }
  }

  auto length_of = [&](const ReasoningTrace& t) -> size_t {
    if (granularity == Granularity::character) return codepoints(t.trace_text).size();
    return whitespace_tokenize(t.trace_text).size();
  };

  double sum = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < traces.size(); ++i) {
    for (size_t j = i + 1; j < traces.size(); ++j) {
      size_t longer = std::max(length_of(traces[i]), length_of(traces[j]));
      int d = edit_distance(traces[i].trace_text, traces[j].trace_text, granularity);
      sum += longer == 0 ? 0.0 : static_cast<double>(d) / static_cast<double>(longer);
      ++pairs;
    }
  }
  double mean = sum / static_cast<double>(pairs);

  MembershipScore score;
  score.sequence_id = traces.front().sequence_id;
  score.attack_id = granularity == Granularity::character ? "tr_consistency_char"
                                                          : "tr_consistency_token";
  score.raw_projection = mean;
  score.score = -mean;
  score.n_samples = static_cast<int>(traces.size());
  return score;
}

double parse_judgement_reply(const std::string& reply) {
  static const std::regex number(R"([-+]?\d+(\.\d+)?)");
  std::smatch match;
  if (!std::regex_search(reply, match, number)) {
    throw UnparseableJudgement("no number in judge reply: " + reply);
  }
  return std::stod(match.str());
}

MembershipScore llm_judgement_score(const ReasoningTrace& trace, const TraceProvider& judge,
                                    const std::string& judgement_template,
                                    const FetchContext& ctx) {
  TraceRequest request;
  request.prompt = render_template(judgement_template, "{trace}", trace.trace_text);
  request.sample_index = trace.sample_index;
  request.task = TraceTask::judgement;
  request.sequence_id = trace.sequence_id;
  request.payload = trace.trace_text;

  ReasoningTrace reply = judge.fetch(request, ctx);
  double value = parse_judgement_reply(reply.trace_text);

  MembershipScore score;
  score.sequence_id = trace.sequence_id;
  score.attack_id = "llm_judgement";
  score.raw_projection = value;
  score.score = value;
  score.n_samples = 1;
  return score;
}

}  // namespace blackspectrum
