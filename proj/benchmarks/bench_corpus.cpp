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

#include <string>
#include <vector>

#include "vidsum/corpus.hpp"
#include "vidsum/report.hpp"

namespace {

std::vector<vidsum::FrameDescription> descriptions(std::size_t n) {
  std::vector<vidsum::FrameDescription> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({i, static_cast<double>(i), "Cars and a bus move through the junction under clear skies.",
                   0.8, i % 17 == 0, {}});
    if (out.back().blocked) out.back().text.clear();
  }
  return out;
}

vidsum::AnalysisRun run(std::size_t frames) {
  vidsum::AnalysisRun r;
  r.run_id = "bench";
  r.created_at = "2026-01-01T00:00:00Z";
  r.status = vidsum::RunStatus::complete;
  r.sampled_frames = frames;
  r.gated_frames = frames;
  r.duration_s = static_cast<double>(frames);
  r.descriptions = descriptions(frames);
  r.summary = "Steady traffic with one collision near the end.";
  for (std::size_t i = 1; i < frames; i += 5) {
    r.incidents.push_back({vidsum::format_mmss(static_cast<double>(i)), i, "vehicle | pedestrian, \"close\""});
  }
  return r;
}

void BM_BuildParagraph(benchmark::State& state) {
  const auto d = descriptions(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(vidsum::build_paragraph(d));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildParagraph)->Range(32, 4096);

void BM_RenderReport(benchmark::State& state) {
  const auto r = run(static_cast<std::size_t>(state.range(0)));
  const auto format = static_cast<vidsum::ReportFormat>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(vidsum::render_report(r, format));
}
BENCHMARK(BM_RenderReport)
    ->ArgsProduct({{30, 600},
                   {static_cast<int>(vidsum::ReportFormat::markdown),
                    static_cast<int>(vidsum::ReportFormat::csv_table),
                    static_cast<int>(vidsum::ReportFormat::structured_json)}});

}  // namespace
