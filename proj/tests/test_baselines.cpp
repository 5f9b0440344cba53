// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "blackspectrum/baselines.hpp"
#include "blackspectrum/errors.hpp"
#include "blackspectrum/io.hpp"
#include "blackspectrum/scorers.hpp"
#include "test_util.hpp"

using namespace blackspectrum;
using blackspectrum::testing::TempDir;

namespace {

ReasoningTrace trace_of(const std::string& text, const std::string& id = "s",
                        int sample = 0) {
  ReasoningTrace t;
  t.sequence_id = id;
  t.trace_text = text;
  t.model_id = "unit";
  t.sample_index = sample;
  return t;
}

// Reference model that assigns probability 1 to every observed token.
class CertainScorer : public ReferenceScorer {
 public:
  std::string scorer_id() const override { return "certain-v1"; }
  std::vector<double> token_nlls(const std::string& text) override {
    return std::vector<double>(whitespace_tokenize(text).size(), 0.0);
  }
};

}  // namespace

TEST_CASE("candidate extraction") {
  std::set<std::string> stop{"the", "a"};
  auto c = extract_candidates("Wait, the answer", stop);
  // words after stopword removal: wait, answer; bigram: "wait answer"
  CHECK(std::count(c.begin(), c.end(), "wait") == 1);
  CHECK(std::count(c.begin(), c.end(), "answer") == 1);
  CHECK(std::count(c.begin(), c.end(), "wait answer") == 1);
  CHECK(std::count(c.begin(), c.end(), "the") == 0);

  auto tri = extract_candidates("alpha beta gamma delta", {});
  CHECK(std::count(tri.begin(), tri.end(), "alpha beta gamma") == 1);
  CHECK(std::count(tri.begin(), tri.end(), "beta gamma delta") == 1);
}

TEST_CASE("thinking token counting") {
  auto encoder = make_embedder(EncoderSpec{});

  ThinkingTokenSeedSet seeds;
  seeds.seeds = {"wait", "hmm", "so"};
  seeds.similarity_threshold = 0.8;

  MembershipScore exact =
      thinking_token_score(trace_of("Wait, hmm, so maybe..."), seeds, *encoder, {});
  CHECK(exact.raw_projection == doctest::Approx(3.0));
  CHECK(exact.score == doctest::Approx(-3.0));
  CHECK(exact.attack_id == "thinking_token");

  MembershipScore none = thinking_token_score(
      trace_of("granite pillars outline quiet courtyards"), seeds, *encoder, {});
  CHECK(none.raw_projection == doctest::Approx(0.0));
  CHECK(none.score == doctest::Approx(0.0));

  // Threshold 1.0 admits only exact-similarity matches; unrelated text has none.
  ThinkingTokenSeedSet strict = seeds;
  strict.similarity_threshold = 1.0;
  MembershipScore boundary = thinking_token_score(
      trace_of("completely unrelated filler words here"), strict, *encoder, {});
  CHECK(boundary.raw_projection == doctest::Approx(0.0));

  // Builtin stopwords keep hesitation words countable.
  const auto& stop = builtin_stopwords();
  CHECK(stop.count("the") == 1);
  CHECK(stop.count("wait") == 0);
  CHECK(stop.count("so") == 0);

  const ThinkingTokenSeedSet& builtin = builtin_seed_set();
  CHECK_FALSE(builtin.seeds.empty());
  CHECK(builtin.similarity_threshold == doctest::Approx(0.8));
}

TEST_CASE("seed and stopword files") {
  TempDir dir("seeds");
  atomic_write_file(dir / "seeds.txt", "# comment line\nhmm\nwait\n\nlet me think\n");
  ThinkingTokenSeedSet seeds = load_seed_set(dir / "seeds.txt", 0.75);
  CHECK(seeds.seeds == std::vector<std::string>{"hmm", "wait", "let me think"});
  CHECK(seeds.similarity_threshold == doctest::Approx(0.75));

  atomic_write_file(dir / "stop.txt", "the\nand\n# not this\n");
  std::set<std::string> stop = load_stopwords(dir / "stop.txt");
  CHECK(stop == std::set<std::string>{"the", "and"});
}

TEST_CASE("compression rate against reference models") {
  auto uniform = make_uniform_reference_scorer(8);
  MembershipScore u = compression_rate_score(trace_of("one two three four"), *uniform);
  CHECK(u.raw_projection == doctest::Approx(std::log(8.0)));
  CHECK(u.score == doctest::Approx(-std::log(8.0)));
  CHECK(u.attack_id == "compression_rate");

  CertainScorer certain;
  MembershipScore c = compression_rate_score(trace_of("one two three"), certain);
  CHECK(c.raw_projection == doctest::Approx(0.0));
  CHECK(c.score == doctest::Approx(0.0));

  // The builtin char-bigram model compresses its own corpus better than
  // alphabet soup.
  auto builtin = make_builtin_reference_scorer();
  double corpus_nll =
      compression_rate_score(trace_of(builtin_corpus().front()), *builtin).raw_projection;
  double soup_nll =
      compression_rate_score(trace_of("zq xv jk wq pz vx qj kz"), *builtin).raw_projection;
  CHECK(corpus_nll < soup_nll);

  CHECK_THROWS_AS(compression_rate_score(trace_of("   "), *uniform), ScorerError);
}

TEST_CASE("edit distance") {
  CHECK(edit_distance("", "abc", Granularity::character) == 3);
  CHECK(edit_distance("abc", "", Granularity::character) == 3);
  CHECK(edit_distance("same words here", "same words here", Granularity::character) == 0);
  CHECK(edit_distance("kitten", "sitting", Granularity::character) == 3);
  CHECK(edit_distance("flaw", "lawn", Granularity::character) == 2);

  CHECK(edit_distance("a b c", "a x c", Granularity::token) == 1);
  CHECK(edit_distance("a b", "a b c d", Granularity::token) == 2);

  // UTF-8 is measured in codepoints, not bytes.
  CHECK(edit_distance("café", "cafe", Granularity::character) == 1);
  CHECK(edit_distance("世界", "世", Granularity::character) == 1);
}

TEST_CASE("trace consistency") {
  std::vector<ReasoningTrace> identical{trace_of("same text", "s", 0),
                                        trace_of("same text", "s", 1),
                                        trace_of("same text", "s", 2)};
  MembershipScore zero = trace_consistency_score(identical, Granularity::character);
  CHECK(zero.raw_projection == doctest::Approx(0.0));
  CHECK(zero.score == doctest::Approx(0.0));
  CHECK(zero.attack_id == "tr_consistency_char");
  CHECK(zero.n_samples == 3);

  // Crafted pairwise normalized distances {0.2, 0.6, 0.4} -> mean 0.4.
  std::vector<ReasoningTrace> spread{trace_of("aaaaaaaaaa", "s", 0),
                                     trace_of("aaaaaaaabb", "s", 1),
                                     trace_of("aaaabbbbbb", "s", 2)};
  MembershipScore mean = trace_consistency_score(spread, Granularity::character);
  CHECK(mean.raw_projection == doctest::Approx(0.4));
  CHECK(mean.score == doctest::Approx(-0.4));

  MembershipScore tok = trace_consistency_score(identical, Granularity::token);
  CHECK(tok.attack_id == "tr_consistency_token");

  CHECK_THROWS_AS(trace_consistency_score({trace_of("x")}, Granularity::character),
                  InsufficientTraces);
  std::vector<ReasoningTrace> mixed{trace_of("x", "a", 0), trace_of("y", "b", 1)};
  CHECK_THROWS_AS(trace_consistency_score(mixed, Granularity::character),
                  std::invalid_argument);
}

TEST_CASE("judgement parsing") {
  CHECK(parse_judgement_reply("Certainty: 9/10") == doctest::Approx(9.0));
  CHECK(parse_judgement_reply("I would say 7 out of 10") == doctest::Approx(7.0));
  CHECK(parse_judgement_reply("score=4.5, leaning low") == doctest::Approx(4.5));
  CHECK(parse_judgement_reply("-2 if that is allowed") == doctest::Approx(-2.0));
  CHECK_THROWS_AS(parse_judgement_reply("no digits at all"), UnparseableJudgement);
}

TEST_CASE("llm judgement through the simulator judge") {
  TempDir dir("judge");
  CacheStore cache{dir / "cache"};
  CacheStats stats;
  FetchContext ctx{&cache, &stats, false};

  TraceProvider judge{ProviderConfig{}};
  ReasoningTrace confident = trace_of(
      "I recognize this passage immediately. The continuation comes to mind verbatim.",
      "seq-1", 0);
  ReasoningTrace hesitant = trace_of(
      "Hmm, this does not look familiar. Perhaps one of many continuations fits. "
      "It is hard to tell.",
      "seq-2", 0);

  MembershipScore high =
      llm_judgement_score(confident, judge, default_judgement_template(), ctx);
  MembershipScore low =
      llm_judgement_score(hesitant, judge, default_judgement_template(), ctx);
  CHECK(high.attack_id == "llm_judgement");
  CHECK(high.score > low.score);
  CHECK(high.score == high.raw_projection);  // already member-oriented

  // Warm cache: identical result, no network.
  int64_t writes = stats.writes.load();
  MembershipScore again =
      llm_judgement_score(confident, judge, default_judgement_template(), ctx);
  CHECK(again.score == doctest::Approx(high.score));
  CHECK(stats.writes.load() == writes);
  CHECK(stats.network.load() == 0);
}
