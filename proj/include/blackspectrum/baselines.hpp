// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "blackspectrum/attack.hpp"
#include "blackspectrum/embedding.hpp"
#include "blackspectrum/provider.hpp"
#include "blackspectrum/scorers.hpp"

namespace blackspectrum {

// All baselines share the blackspectrum orientation: higher score = more
// member-like. Where the underlying quantity runs the other way (thinking
// tokens, NLL, inconsistency), the score is sign-flipped and the value in
// its natural orientation is kept in raw_projection.

struct ThinkingTokenSeedSet {
  std::vector<std::string> seeds;
  double similarity_threshold = 0.8;
};

enum class Granularity { character, token };

// Built-in stopword list. Deliberately excludes hesitation words ("so",
// "wait", "well", "maybe") since those are exactly what the thinking-token
// attack must count.
const std::set<std::string>& builtin_stopwords();

// One word per line, '#' comments and blanks skipped, lowercased.
std::set<std::string> load_stopwords(const std::filesystem::path& path);

// One seed phrase per line, '#' comments and blanks skipped.
ThinkingTokenSeedSet load_seed_set(const std::filesystem::path& path,
                                   double similarity_threshold = 0.8);
const ThinkingTokenSeedSet& builtin_seed_set();

// Lowercased punctuation-stripped words plus sliding bigrams/trigrams,
// built after stopword removal.
std::vector<std::string> extract_candidates(const std::string& text,
                                            const std::set<std::string>& stopwords);

// Counts candidates whose max cosine similarity to any seed >= threshold.
// score = -count, raw_projection = count.
MembershipScore thinking_token_score(const ReasoningTrace& trace,
                                     const ThinkingTokenSeedSet& seeds, Embedder& encoder,
                                     const std::set<std::string>& stopwords = builtin_stopwords());

// Mean per-token NLL under the reference scorer. score = -NLL,
// raw_projection = NLL.
MembershipScore compression_rate_score(const ReasoningTrace& trace, ReferenceScorer& scorer);

// Levenshtein distance with unit costs at the chosen granularity.
int edit_distance(const std::string& a, const std::string& b, Granularity granularity);

// Mean pairwise Levenshtein distance normalized by the longer length.
// score = -mean, raw_projection = mean. attack_id is
// tr_consistency_char or tr_consistency_token.
MembershipScore trace_consistency_score(const std::vector<ReasoningTrace>& traces,
                                        Granularity granularity);

// First number in the reply text. Throws UnparseableJudgement.
double parse_judgement_reply(const std::string& reply);

// Asks the judge to rate the trace's certainty (1-10); the parsed rating is
// the score (already member-oriented). Cached like any provider call.
MembershipScore llm_judgement_score(const ReasoningTrace& trace, const TraceProvider& judge,
                                    const std::string& judgement_template,
                                    const FetchContext& ctx);

}  // namespace blackspectrum
