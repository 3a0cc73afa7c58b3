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


#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "vidsum/eval.hpp"

namespace {

// Random unit vectors for a synthetic vocabulary "w0".."w{n-1}".
vidsum::EmbeddingStore synthetic_store(std::size_t words, std::size_t dimension) {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> component;
  vidsum::EmbeddingStore store(dimension);
  for (std::size_t i = 0; i < words; ++i) {
    std::vector<double> v(dimension);
    for (auto& x : v) x = component(rng);
    store.add("w" + std::to_string(i), std::move(v));
  }
  return store;
}

std::vector<std::string> draw(std::mt19937_64& rng, std::size_t n, std::size_t vocab) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("w" + std::to_string(rng() % vocab));
  return out;
}

void BM_MatchWords(benchmark::State& state) {
  const auto tokens = static_cast<std::size_t>(state.range(0));
  const auto store = synthetic_store(2000, 300);
  std::mt19937_64 rng(7);
  const auto generated = draw(rng, tokens, 2000);
  const auto truth = draw(rng, tokens, 2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(vidsum::match_words(generated, truth, store, 0.6));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MatchWords)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_Preprocess(benchmark::State& state) {
  std::string text;
  while (text.size() < static_cast<std::size_t>(state.range(0))) {
    text += "A motorcycle, moving fast, collides with the white van near the crossing. ";
  }
  const auto& stopwords = vidsum::default_stopwords();
  for (auto _ : state) benchmark::DoNotOptimize(vidsum::preprocess(text, stopwords));
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Preprocess)->Range(256, 64 << 10);

}  // namespace
