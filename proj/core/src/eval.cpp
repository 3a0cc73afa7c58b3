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

#include "vidsum/eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "encoding.hpp"
#include "json.hpp"
#include "vidsum/errors.hpp"

namespace vidsum {

namespace detail {
extern const std::string_view kStopwordsEnglish;
}

namespace {

std::string normalise_word(std::string_view word) {
  std::string out;
  out.reserve(word.size());
  for (unsigned char c : word) {
    if (std::ispunct(c)) continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

bool valid_word(std::string_view word) {
  return !word.empty() && std::none_of(word.begin(), word.end(), [](unsigned char c) {
    return std::isspace(c) || std::isupper(c);
  });
}

std::set<std::string> parse_stopword_text(std::string_view text) {
  std::set<std::string> words;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) {
    auto n = normalise_word(w);
    if (!n.empty()) words.insert(std::move(n));
  }
  return words;
}

}  // namespace

void EmbeddingStore::add(std::string word, std::vector<double> vector) {
  if (!valid_word(word)) throw PreconditionError("invalid embedding word '" + word + "'");
  if (dimension_ == 0) dimension_ = vector.size();
  if (vector.size() != dimension_ || dimension_ == 0) {
    throw PreconditionError("embedding for '" + word + "' has dimension " +
                            std::to_string(vector.size()) + ", expected " +
                            std::to_string(dimension_));
  }
  auto [it, inserted] = index_.emplace(std::move(word), data_.size() / dimension_);
  if (!inserted) {
    std::copy(vector.begin(), vector.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dimension_));
    return;
  }
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::span<const double>> EmbeddingStore::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return std::span<const double>(data_.data() + it->second * dimension_, dimension_);
}

EmbeddingStore parse_embeddings(std::string_view text,
                                const std::optional<std::set<std::string>>& restrict_to) {
  EmbeddingStore store;
  std::size_t dimension = 0;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
      const auto s = line.find_first_not_of(" \t", pos);
      if (s == std::string_view::npos) break;
      const auto e = std::min(line.find_first_of(" \t", s), line.size());
      fields.push_back(line.substr(s, e - s));
      pos = e;
    }
    if (fields.size() < 2) {
      throw ParseError("embedding line " + std::to_string(line_no) + ": no vector components");
    }
    const std::size_t d = fields.size() - 1;
    if (dimension == 0) {
      dimension = d;
    } else if (d != dimension) {
      throw ParseError("embedding line " + std::to_string(line_no) + ": dimension " +
                       std::to_string(d) + " differs from " + std::to_string(dimension));
    }

    std::string word(fields[0]);
    std::transform(word.begin(), word.end(), word.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (restrict_to && !restrict_to->contains(word)) continue;

    std::vector<double> vec(d);
    for (std::size_t i = 0; i < d; ++i) {
      const auto f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[i]);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(vec[i])) {
        throw ParseError("embedding line " + std::to_string(line_no) + ": unparseable component '" +
                         std::string(f) + "'");
      }
    }
    store.add(std::move(word), std::move(vec));
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               const std::optional<std::set<std::string>>& restrict_to) {
  return parse_embeddings(detail::read_file(path.string()), restrict_to);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw PreconditionError("cosine of vectors with different dimensions");
  double dot = 0;
  double na = 0;
  double nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) throw PreconditionError("cosine of a zero vector");
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> words = parse_stopword_text(detail::kStopwordsEnglish);
  return words;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  return parse_stopword_text(detail::read_file(path.string()));
}

std::vector<std::string> preprocess(std::string_view text, const std::set<std::string>& stopwords) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::vector<std::string> tokens;
  std::istringstream in(cleaned);
  for (std::string w; in >> w;) {
    if (!stopwords.contains(w)) tokens.push_back(std::move(w));
  }
  return tokens;
}

SimilarityResult match_words(std::span<const std::string> generated,
                             std::span<const std::string> truth, const EmbeddingStore& store,
                             double threshold) {
  if (truth.empty()) throw PreconditionError("ground truth has no tokens (G = 0)");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw PreconditionError("match threshold must lie in (0, 1)");
  }

  std::vector<std::optional<std::span<const double>>> gen_vectors;
  gen_vectors.reserve(generated.size());
  for (const auto& g : generated) gen_vectors.push_back(store.find(g));

  std::vector<bool> used(generated.size(), false);
  SimilarityResult result;
  result.ground_truth_count = truth.size();

  for (const auto& t : truth) {
    const auto tv = store.find(t);
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t j = 0; j < generated.size(); ++j) {
      if (used[j]) continue;
      double score;
      if (tv && gen_vectors[j]) {
        score = cosine(*tv, *gen_vectors[j]);
      } else if (generated[j] == t) {
        score = 1.0;
      } else {
        continue;
      }
      if (score > threshold && (!best || score > best_score)) {
        best = j;
        best_score = score;
      }
    }
    if (best) {
      used[*best] = true;
      ++result.matched;
      result.pairs.push_back({generated[*best], t, best_score});
    }
  }
  result.percentage =
      100.0 * static_cast<double>(result.matched) / static_cast<double>(result.ground_truth_count);
  return result;
}

BatchScore score_batch(std::span<const TextPair> pairs, const EmbeddingStore& store,
                       const std::set<std::string>& stopwords, double threshold) {
  BatchScore batch;
  batch.results.reserve(pairs.size());
  double sum = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto truth = preprocess(pairs[i].truth, stopwords);
    if (truth.empty()) {
      throw PreconditionError("pair " + std::to_string(i) +
                              ": ground truth has no tokens after preprocessing");
    }
    const auto generated = preprocess(pairs[i].generated, stopwords);
    batch.results.push_back(match_words(generated, truth, store, threshold));
    sum += batch.results.back().percentage;
  }
  if (!pairs.empty()) batch.mean_percentage = sum / static_cast<double>(pairs.size());
  return batch;
}

std::vector<TextPair> parse_text_pairs(std::string_view text) {
  std::vector<TextPair> pairs;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      pairs.push_back({j.at("generated").get<std::string>(), j.at("truth").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

std::vector<TextPair> load_text_pairs(const std::filesystem::path& path) {
  return parse_text_pairs(detail::read_file(path.string()));
}

std::string batch_to_json(std::span<const TextPair> pairs, const BatchScore& score,
                          double threshold) {
  nlohmann::json results = nlohmann::json::array();
  for (std::size_t i = 0; i < score.results.size(); ++i) {
    const auto& r = score.results[i];
    nlohmann::json matches = nlohmann::json::array();
    for (const auto& p : r.pairs) {
      matches.push_back({{"generated", p.generated}, {"truth", p.truth}, {"score", p.score}});
    }
    nlohmann::json item{{"index", i},
                        {"matched", r.matched},
                        {"ground_truth_count", r.ground_truth_count},
                        {"percentage", r.percentage},
                        {"pairs", matches}};
    if (i < pairs.size()) {
      item["generated"] = pairs[i].generated;
      item["truth"] = pairs[i].truth;
    }
    results.push_back(std::move(item));
  }
  return nlohmann::json{{"threshold", threshold},
                        {"pair_count", score.results.size()},
                        {"mean_percentage", score.mean_percentage},
                        {"results", results}}
             .dump(2) +
         "\n";
}

std::string batch_to_text(const BatchScore& score) {
  std::ostringstream out;
  char buf[128];
  for (std::size_t i = 0; i < score.results.size(); ++i) {
    const auto& r = score.results[i];
    std::snprintf(buf, sizeof buf, "pair %zu: %.2f%% (%zu/%zu)\n", i, r.percentage, r.matched,
                  r.ground_truth_count);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "mean: %.2f%% over %zu pairs\n", score.mean_percentage,
                score.results.size());
  out << buf;
  return out.str();
}

void record_latency(TimingStats& stats, Stage stage, double seconds) {
  if (!(seconds >= 0.0) || !std::isfinite(seconds)) {
    throw PreconditionError("latency must be a finite value >= 0");
  }
  auto& t = stats.stages[stage];
  if (t.count == 0) {
    t.min_s = seconds;
    t.max_s = seconds;
  } else {
    t.min_s = std::min(t.min_s, seconds);
    t.max_s = std::max(t.max_s, seconds);
  }
  ++t.count;
  t.sum_s += seconds;
  t.mean_s = std::clamp(t.sum_s / static_cast<double>(t.count), t.min_s, t.max_s);
}

}  // namespace vidsum
