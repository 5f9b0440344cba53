// Copyright 2026 The BlackSpectrum Authors
// SPDX-License-Identifier: Apache-2.0

#include "blackspectrum/scorers.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>

#include "blackspectrum/dataset.hpp"
#include "blackspectrum/errors.hpp"
#include "http_util.hpp"

namespace blackspectrum {

using nlohmann::json;

const std::vector<std::string>& builtin_corpus() {
  static const std::vector<std::string> corpus{
      "The morning train left the station a few minutes late.",
      "She poured the tea and watched the rain against the window.",
      "A narrow path led through the garden to the old gate.",
      "The baker set the fresh loaves on the counter before dawn.",
      "He folded the letter twice and slid it into his coat pocket.",
      "The river ran slow and brown after a week of storms.",
      "Children played in the square until the lamps came on.",
      "The shop on the corner sold maps, ink, and paper by the sheet.",
      "A cold wind moved through the pines above the village.",
      "The clock in the hall struck nine as supper ended.",
      "They walked along the harbor wall and counted the boats.",
      "The field beyond the fence was full of late summer wheat.",
      "Her notebook held lists of birds seen from the kitchen window.",
      "The road climbed slowly toward the pass and the thin air.",
      "Lamplight fell across the table and the unfinished game of cards.",
      "The ferry crossed twice a day, once at dawn and once at dusk.",
      "He repaired the fence post and leaned on it to test the set.",
      "The library smelled of dust, glue, and quiet afternoons.",
      "A kettle whistled somewhere down the corridor.",
      "The orchard gave small apples that tasted of October.",
      "She traced the coastline on the map with one finger.",
      "The miller ground the grain while the wheel turned in the race.",
      "Snow settled on the roofs and softened every sound.",
      "The committee met on Tuesdays in the room above the bank.",
      "He whistled an old tune while he swept the steps.",
      "The tide left ribbons of weed along the gray sand.",
      "A letter arrived with a stamp from a country she had never seen.",
      "The carpenter measured the plank twice and cut it once.",
      "Evening settled over the town like a well-worn blanket.",
      "The students copied the theorem from the board into their books.",
      "Rain filled the barrels under the eaves by morning.",
      "The old dog slept in the doorway and ignored the hens.",
      "Market day brought carts, noise, and the smell of bread.",
      "She mended the net while the boats rode at anchor.",
      "The lighthouse turned its slow white eye across the water.",
      "A bell rang in the valley and the workers stopped for lunch.",
      "The printer set the type by hand, letter after letter.",
      "Frost drew ferns on the inside of the window glass.",
      "He kept the accounts in a ledger bound in green cloth.",
      "The train slowed at the junction and took the northern line.",
      "Bees worked the clover until the shadows grew long.",
      "The museum kept the old charts in a drawer that stuck.",
      "She learned the names of the stars from her grandfather.",
      "The bridge creaked under the cart but held as it always had.",
      "Morning fog lifted off the meadow in slow gray sheets.",
      "The cobbler tapped at his bench behind the half-open door.",
      "A long shelf of jars lined the cellar wall.",
      "The choir practiced on Thursday and the sound carried far.",
  };
  return corpus;
}

namespace {

std::string strip_token(const std::string& raw) {
  size_t begin = 0;
  size_t end = raw.size();
  auto is_word = [](unsigned char c) {
    return std::isalnum(c) || c == '\'' || c >= 0x80;
  };
  while (begin < end && !is_word(static_cast<unsigned char>(raw[begin]))) ++begin;
  while (end > begin && !is_word(static_cast<unsigned char>(raw[end - 1]))) --end;
  std::string out = raw.substr(begin, end - begin);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::vector<std::string> word_tokens(const std::string& text) {
  std::vector<std::string> out;
  for (const std::string& raw : whitespace_tokenize(text)) {
    std::string t = strip_token(raw);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

class BuiltinValidationScorer final : public ValidationScorer {
 public:
  BuiltinValidationScorer() {
    for (const std::string& sentence : builtin_corpus()) {
      std::vector<std::string> tokens = word_tokens(sentence);
      std::string prev = kStart;
      for (const std::string& t : tokens) {
        vocab_.insert(t);
        ++bigram_[prev][t];
        ++row_total_[prev];
        prev = t;
      }
    }
  }

  std::string scorer_id() const override { return "builtin-word-bigram-v1"; }

  NextTokenDistribution next_token_distribution(const std::string& prefix) override {
    std::vector<std::string> tokens = word_tokens(prefix);
    std::string prev = tokens.empty() ? kStart : tokens.back();

    const double alpha = 0.5;
    double v = static_cast<double>(vocab_.size());
    auto row = bigram_.find(prev);
    double total = row == bigram_.end() ? 0.0 : row_total_.at(prev);

    NextTokenDistribution dist;
    dist.vocab_size = static_cast<int>(vocab_.size());
    for (const std::string& w : vocab_) {
      double count = 0.0;
      if (row != bigram_.end()) {
        auto it = row->second.find(w);
        if (it != row->second.end()) count = it->second;
      }
      dist.probabilities[w] = (count + alpha) / (total + alpha * v);
    }
    return dist;
  }

 private:
  static constexpr const char* kStart = "<s>";
  std::set<std::string> vocab_;
  std::unordered_map<std::string, std::unordered_map<std::string, double>> bigram_;
  std::unordered_map<std::string, double> row_total_;
};

class RemoteValidationScorer final : public ValidationScorer {
 public:
  RemoteValidationScorer(std::string endpoint, std::string auth_env, int top_k,
                         int timeout_ms)
      : endpoint_(std::move(endpoint)), auth_env_(std::move(auth_env)),
        top_k_(top_k), timeout_ms_(timeout_ms) {
    if (top_k_ < 1) throw ConfigError("validation scorer top_k must be >= 1");
  }

  std::string scorer_id() const override { return "remote-validation:" + endpoint_; }

  std::optional<int> top_k() const override { return top_k_; }

  NextTokenDistribution next_token_distribution(const std::string& prefix) override {
    json body{{"prefix", prefix}, {"top_k", top_k_}};
    json reply = detail::post_json(endpoint_, body, auth_env_, timeout_ms_,
                                   detail::RetryPolicy{});
    if (!reply.contains("tokens") || !reply.contains("probabilities") ||
        !reply["tokens"].is_array() || !reply["probabilities"].is_array() ||
        reply["tokens"].size() != reply["probabilities"].size() ||
        reply["tokens"].empty()) {
      throw ScorerError("scorer reply must carry parallel tokens/probabilities arrays");
    }

    NextTokenDistribution dist;
    double sum = 0.0;
    for (size_t i = 0; i < reply["tokens"].size(); ++i) {
      if (!reply["tokens"][i].is_string() || !reply["probabilities"][i].is_number()) {
        throw ScorerError("malformed scorer reply entry");
      }
      double p = reply["probabilities"][i].get<double>();
      if (!std::isfinite(p) || p < 0.0) throw ScorerError("invalid probability in reply");
      dist.probabilities[reply["tokens"][i].get<std::string>()] += p;
      sum += p;
    }
    if (sum <= 0.0) throw ScorerError("scorer probabilities sum to zero");
    for (auto& [token, p] : dist.probabilities) p /= sum;
    dist.vocab_size = static_cast<int>(dist.probabilities.size());
    return dist;
  }

 private:
  std::string endpoint_;
  std::string auth_env_;
  int top_k_;
  int timeout_ms_;
};

class UniformReferenceScorer final : public ReferenceScorer {
 public:
  explicit UniformReferenceScorer(int vocab_size) : vocab_size_(vocab_size) {
    if (vocab_size_ < 1) throw ConfigError("uniform scorer vocab size must be >= 1");
  }

  std::string scorer_id() const override {
    return "uniform-v" + std::to_string(vocab_size_);
  }

  std::vector<double> token_nlls(const std::string& text) override {
    size_t n = whitespace_tokenize(text).size();
    return std::vector<double>(n, std::log(static_cast<double>(vocab_size_)));
  }

 private:
  int vocab_size_;
};

class CharBigramReferenceScorer final : public ReferenceScorer {
 public:
  CharBigramReferenceScorer() {
    for (const std::string& sentence : builtin_corpus()) {
      unsigned char prev = kStart;
      for (unsigned char c : sentence) {
        ++counts_[prev][c];
        ++totals_[prev];
        prev = c;
      }
    }
  }

  std::string scorer_id() const override { return "builtin-char-bigram-v1"; }

  std::vector<double> token_nlls(const std::string& text) override {
    const double alpha = 0.05;
    std::vector<double> nlls;
    nlls.reserve(text.size());
    unsigned char prev = kStart;
    for (unsigned char c : text) {
      double count = counts_[prev][c];
      double total = totals_[prev];
      double p = (count + alpha) / (total + alpha * 256.0);
      nlls.push_back(-std::log(p));
      prev = c;
    }
    return nlls;
  }

 private:
  static constexpr unsigned char kStart = 0x02;
  std::array<std::array<double, 256>, 256> counts_{};
  std::array<double, 256> totals_{};
};

class RemoteReferenceScorer final : public ReferenceScorer {
 public:
  RemoteReferenceScorer(std::string endpoint, std::string auth_env, int timeout_ms)
      : endpoint_(std::move(endpoint)), auth_env_(std::move(auth_env)),
        timeout_ms_(timeout_ms) {}

  std::string scorer_id() const override { return "remote-reference:" + endpoint_; }

  std::vector<double> token_nlls(const std::string& text) override {
    json reply = detail::post_json(endpoint_, json{{"text", text}}, auth_env_,
                                   timeout_ms_, detail::RetryPolicy{});
    if (!reply.contains("nlls") || !reply["nlls"].is_array()) {
      throw ScorerError("scorer reply must carry an nlls array");
    }
    std::vector<double> nlls;
    nlls.reserve(reply["nlls"].size());
    for (const auto& entry : reply["nlls"]) {
      if (!entry.is_number()) throw ScorerError("non-numeric NLL in reply");
      double v = entry.get<double>();
      if (!std::isfinite(v)) throw ScorerError("non-finite NLL in reply");
      nlls.push_back(v);
    }
    return nlls;
  }

 private:
  std::string endpoint_;
  std::string auth_env_;
  int timeout_ms_;
};

}  // namespace

std::unique_ptr<ValidationScorer> make_builtin_validation_scorer() {
  return std::make_unique<BuiltinValidationScorer>();
}

std::unique_ptr<ValidationScorer> make_remote_validation_scorer(
    const std::string& endpoint, const std::string& auth_env, int top_k, int timeout_ms) {
  return std::make_unique<RemoteValidationScorer>(endpoint, auth_env, top_k, timeout_ms);
}

std::unique_ptr<ReferenceScorer> make_uniform_reference_scorer(int vocab_size) {
  return std::make_unique<UniformReferenceScorer>(vocab_size);
}

std::unique_ptr<ReferenceScorer> make_builtin_reference_scorer() {
  return std::make_unique<CharBigramReferenceScorer>();
}

std::unique_ptr<ReferenceScorer> make_remote_reference_scorer(
    const std::string& endpoint, const std::string& auth_env, int timeout_ms) {
  return std::make_unique<RemoteReferenceScorer>(endpoint, auth_env, timeout_ms);
}

}  // namespace blackspectrum
