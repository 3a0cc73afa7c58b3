// Copyright 2026 The vidsum Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vidsum/timing.hpp"

namespace vidsum {

/// Word vectors of one fixed dimension. Immutable after load.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(std::size_t dimension) : dimension_(dimension) {}

  /// Throws PreconditionError on a dimension mismatch or an invalid word.
  void add(std::string word, std::vector<double> vector);

  std::optional<std::span<const double>> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return index_.size(); }

 private:
  std::size_t dimension_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

/// Plain-text embeddings, one "word c1 ... cd" per line (GloVe layout).
/// Words are lowercased on load; with `restrict_to`, only those words are
/// kept. Throws ParseError naming the line for a dimension change or an
/// unparseable component.
EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               const std::optional<std::set<std::string>>& restrict_to = {});
EmbeddingStore parse_embeddings(std::string_view text,
                                const std::optional<std::set<std::string>>& restrict_to = {});

/// dot(a, b) / (|a| |b|). PreconditionError on a zero vector or a
/// dimension mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

/// The shipped English stopword list (NLTK's 179 words), normalised like
/// preprocess() normalises text. "it's" and "its" coincide after
/// normalisation, leaving 178 entries.
const std::set<std::string>& default_stopwords();
std::set<std::string> load_stopwords(const std::filesystem::path& path);

/// Lowercase, delete ASCII punctuation, split on whitespace, drop stopwords.
/// Order and duplicates are preserved.
std::vector<std::string> preprocess(std::string_view text, const std::set<std::string>& stopwords);

inline constexpr double kDefaultMatchThreshold = 0.6;

struct WordPair {
  std::string generated;
  std::string truth;
  double score = 0.0;
  friend bool operator==(const WordPair&, const WordPair&) = default;
};

struct SimilarityResult {
  std::size_t matched = 0;             // M
  std::size_t ground_truth_count = 0;  // G
  double percentage = 0.0;             // 100 * M / G
  std::vector<WordPair> pairs;
};

/// Greedy one-to-one matching in ground-truth order: each truth token takes
/// the unmatched generated token with the highest cosine strictly above
/// `threshold` (lowest index on ties). Tokens missing from the store match
/// only an identical string, scored 1. PreconditionError on empty truth or
/// a threshold outside (0, 1).
SimilarityResult match_words(std::span<const std::string> generated,
                             std::span<const std::string> truth, const EmbeddingStore& store,
                             double threshold = kDefaultMatchThreshold);

struct TextPair {
  std::string generated;
  std::string truth;
};

struct BatchScore {
  std::vector<SimilarityResult> results;
  double mean_percentage = 0.0;
};

/// Scores every pair; PreconditionError naming the index of a pair whose
/// truth text has no tokens left after preprocessing.
BatchScore score_batch(std::span<const TextPair> pairs, const EmbeddingStore& store,
                       const std::set<std::string>& stopwords,
                       double threshold = kDefaultMatchThreshold);

/// JSON Lines, one {"generated": "...", "truth": "..."} object per line;
/// blank lines are skipped. ParseError naming the line.
std::vector<TextPair> parse_text_pairs(std::string_view text);
std::vector<TextPair> load_text_pairs(const std::filesystem::path& path);

/// Per-pair and aggregate results as a JSON document.
std::string batch_to_json(std::span<const TextPair> pairs, const BatchScore& score,
                          double threshold);
/// One "pair <i>: <pct>% (M/G)" line per pair, then the mean.
std::string batch_to_text(const BatchScore& score);

/// Adds one latency sample. PreconditionError for negative seconds.
void record_latency(TimingStats& stats, Stage stage, double seconds);

}  // namespace vidsum
