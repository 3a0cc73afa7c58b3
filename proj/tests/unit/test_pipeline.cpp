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

#include <gtest/gtest.h>

#include <regex>


#include "doubles.hpp"
#include "fixtures.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/pipeline.hpp"
#include "vidsum/report.hpp"

namespace vidsum {
namespace {

namespace fs = std::filesystem;
using std::chrono::milliseconds;

const std::set<std::uint64_t> kTrafficGated = {2, 10, 14, 15, 17, 18, 20, 23, 24, 27};

fs::path traffic(const char* name) { return testing::fixtures_dir() / "traffic" / name; }

struct Harness {
  testing::TempDir dir;
  RunStore store{dir.path() / "data"};
  std::unique_ptr<MockProvider> vision_mock = MockProvider::from_file(traffic("vision.json"));
  std::unique_ptr<MockProvider> text_mock = MockProvider::from_file(traffic("text.json"));
  testing::RecordingProvider vision;
  testing::RecordingProvider text{*text_mock};

  explicit Harness(milliseconds jitter = {}, std::set<std::uint64_t> fail_on = {})
      : vision(*vision_mock, jitter, std::move(fail_on)) {}

  AnalysisRun run(DetectorBackend& detector, const PipelineConfig& config, AnalyzeOptions options,
                  int frames = 29) {
    VectorFrameSource source(testing::synthetic_samples(frames));
    return analyze(source, config, {detector, vision, text}, store, options);
  }
};

MockDetector gate_on(const std::set<std::uint64_t>& frames) {
  return MockDetector::from_json(testing::detection_fixture(frames));
}

std::set<std::uint64_t> first_frames(const testing::RecordingProvider& p) {
  std::set<std::uint64_t> out;
  for (const auto& r : p.requests()) out.insert(r.frame_numbers.front());
  return out;
}

TEST(Pipeline, TrafficEndToEnd) {
  Harness h;
  auto detector = MockDetector::from_file(traffic("detections.json"));
  const auto run = h.run(detector, PipelineConfig{}, {"run-traffic", "traffic.mp4", "key incidents"});
  EXPECT_EQ(run.status, RunStatus::complete);
  EXPECT_EQ(run.sampled_frames, 29u);
  EXPECT_EQ(run.gated_frames, 10u);
  EXPECT_EQ(h.vision.calls(), 10u);
  EXPECT_EQ(first_frames(h.vision), kTrafficGated);
  ASSERT_EQ(run.descriptions.size(), 10u);
  EXPECT_EQ(run.descriptions[3].frame_number, 15u);
  EXPECT_EQ(run.descriptions[3].text, "Shows a motorcycle accident");
  ASSERT_TRUE(run.summary.has_value());
  EXPECT_TRUE(run.summary->starts_with("The video shows a busy road"));
  ASSERT_EQ(run.incidents.size(), 7u);
  EXPECT_EQ(run.incidents[0], (IncidentRecord{"00:02", 2, "Shows the general traffic conditions during the day"}));
  EXPECT_EQ(run.duration_s, 29.0);
  EXPECT_EQ(run.stats.at(Stage::vision).count, 10u);
  EXPECT_EQ(run.stats.at(Stage::text).count, 2u);

  const auto loaded = h.store.load_run("run-traffic");
  EXPECT_EQ(loaded, run);
  std::size_t stills = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(h.store.frames_dir("run-traffic"))) ++stills;
  EXPECT_EQ(stills, 29u);
  EXPECT_TRUE(h.store.frame_path("run-traffic", 15).has_value());

  const auto written = write_reports(h.store, run);
  ASSERT_EQ(written.size(), 3u);
  const auto md = testing::read_text(h.store.reports_dir("run-traffic") / "report.md");
  EXPECT_NE(md.find("| 00:02 | 2 | Shows the general traffic conditions during the day |"),
            std::string::npos);
}

TEST(Pipeline, GatingEconomy) {
  for (std::size_t k : {0u, 7u, 29u}) {
    std::set<std::uint64_t> gated;
    for (std::uint64_t f = 0; gated.size() < k; f += 29 / std::max<std::size_t>(k, 1) ) gated.insert(f);
    if (k == 29) for (std::uint64_t f = 0; f < 29; ++f) gated.insert(f);
    Harness h;
    auto detector = gate_on(gated);
    const auto run = h.run(detector, PipelineConfig{}, {"run-k" + std::to_string(k), "", std::nullopt});
    EXPECT_EQ(gated.size(), k);
    EXPECT_EQ(h.vision.calls(), k) << "k=" << k;
    EXPECT_EQ(first_frames(h.vision), gated);
    EXPECT_EQ(run.gated_frames, k);
    EXPECT_EQ(run.sampled_frames, 29u);
    EXPECT_EQ(run.status, RunStatus::complete);
    EXPECT_EQ(h.text.calls(), k == 0 ? 0u : 1u);
    EXPECT_EQ(run.summary.has_value(), k != 0);
  }
}

TEST(Pipeline, FrameOrderedCommitUnderJitter) {
  Harness h(milliseconds(15));
  auto detector = gate_on({1, 3, 4, 5, 8, 9, 11, 12, 13, 20, 21, 22, 25, 28});
  PipelineConfig config;
  config.max_parallel_calls = 6;
  const auto run = h.run(detector, config, {"run-jitter", "", std::nullopt});
  ASSERT_EQ(run.descriptions.size(), 14u);
  std::istringstream log(testing::read_text(h.store.run_dir("run-jitter") / "descriptions.jsonl"));
  std::vector<std::uint64_t> order;
  for (std::string line; std::getline(log, line);) order.push_back(description_from_line(line).frame_number);
  EXPECT_TRUE(std::is_sorted(order.begin(), order.end()));
  EXPECT_EQ(order.size(), 14u);
}

TEST(Pipeline, DeterministicArtifacts) {
  std::vector<std::string> json_reports, md_reports;
  for (int i = 0; i < 2; ++i) {
    Harness h(milliseconds(10));
    auto detector = MockDetector::from_file(traffic("detections.json"));
    PipelineConfig config;
    config.max_parallel_calls = 4;
    const std::string id = "run-det-" + std::to_string(i);
    const auto run = h.run(detector, config, {id, "traffic.mp4", "accidents"});
    write_reports(h.store, run);
    json_reports.push_back(testing::normalise_json_report(
        testing::read_text(h.store.reports_dir(id) / "report.json")));
    md_reports.push_back(testing::normalise_markdown_report(
        testing::read_text(h.store.reports_dir(id) / "report.md"), id));
  }
  EXPECT_EQ(json_reports[0], json_reports[1]);
  EXPECT_EQ(md_reports[0], md_reports[1]);
}

TEST(Pipeline, ParallelismDoesNotChangeResults) {
  std::vector<AnalysisRun> runs;
  for (int parallel : {1, 2, 8}) {
    Harness h(milliseconds(8));
    auto detector = MockDetector::from_file(traffic("detections.json"));
    PipelineConfig config;
    config.max_parallel_calls = parallel;
    runs.push_back(h.run(detector, config, {"run-p", "", "accidents"}));
  }
  for (const auto& r : runs) {
    ASSERT_EQ(r.descriptions.size(), runs[0].descriptions.size());
    for (std::size_t i = 0; i < r.descriptions.size(); ++i) {
      EXPECT_EQ(r.descriptions[i].frame_number, runs[0].descriptions[i].frame_number);
      EXPECT_EQ(r.descriptions[i].text, runs[0].descriptions[i].text);
    }
    EXPECT_EQ(r.summary, runs[0].summary);
    EXPECT_EQ(r.incidents, runs[0].incidents);
  }
}

TEST(Pipeline, DescribeFailureIsStageNamedAndKeepsEarlierWork) {
  Harness h({}, {15});
  auto detector = MockDetector::from_file(traffic("detections.json"));
  PipelineConfig config;
  config.max_parallel_calls = 1;
  try {
    h.run(detector, config, {"run-fail", "", std::nullopt});
    FAIL() << "expected PipelineError";
  } catch (const PipelineError& e) {
    EXPECT_EQ(e.stage(), "describe");
    EXPECT_NE(std::string(e.what()).find("frame 15"), std::string::npos);
  }
  const auto loaded = h.store.load_run("run-fail");
  EXPECT_EQ(loaded.status, RunStatus::failed);
  EXPECT_NE(loaded.failure.find("stage 'describe' failed"), std::string::npos);
  std::vector<std::uint64_t> kept;
  for (const auto& d : loaded.descriptions) kept.push_back(d.frame_number);
  EXPECT_EQ(kept, (std::vector<std::uint64_t>{2, 10, 14}));
  EXPECT_EQ(h.text.calls(), 0u);
}

class ThrowingDetector : public DetectorBackend {
 public:
  std::vector<Detection> detect(const FrameSample& frame) override {
    if (frame.frame_number == 5) throw DetectorError("detector crashed");
    return {};
  }
};

class ThrowingSource : public FrameSource {
 public:
  std::optional<FrameSample> next() override {
    if (n_ == 3) throw DecodeError("truncated stream");
    return testing::synthetic_samples(n_ + 1).at(n_++);
  }

 private:
  int n_ = 0;
};

TEST(Pipeline, DetectAndSampleFailures) {
  {
    Harness h;
    ThrowingDetector detector;
    try {
      h.run(detector, PipelineConfig{}, {"run-detect", "", std::nullopt});
      FAIL();
    } catch (const PipelineError& e) {
      EXPECT_EQ(e.stage(), "detect");
    }
    EXPECT_EQ(h.store.load_run("run-detect").status, RunStatus::failed);
  }
  {
    Harness h;
    auto detector = gate_on({0, 1, 2});
    ThrowingSource source;
    PipelineConfig config;
    config.max_parallel_calls = 1;
    try {
      analyze(source, config, {detector, h.vision, h.text}, h.store, {"run-sample", "", std::nullopt});
      FAIL();
    } catch (const PipelineError& e) {
      EXPECT_EQ(e.stage(), "sample");
    }
    const auto loaded = h.store.load_run("run-sample");
    EXPECT_EQ(loaded.status, RunStatus::failed);
    EXPECT_NE(loaded.failure.find("truncated stream"), std::string::npos);
    // Frames 0 and 1 were committed before frame 3 failed to decode; frame 2
    // was still in flight and is dropped.
    ASSERT_EQ(loaded.descriptions.size(), 2u);
    EXPECT_EQ(loaded.descriptions[1].frame_number, 1u);
  }
}

TEST(Pipeline, SequenceMode) {
  Harness h;
  auto detector = MockDetector::from_file(traffic("detections.json"));
  PipelineConfig config;
  config.submission_mode = SubmissionMode::sequence;
  config.batch_size = 3;
  const auto run = h.run(detector, config, {"run-seq", "", std::nullopt});
  const auto requests = h.vision.requests();
  ASSERT_EQ(requests.size(), 4u);
  std::vector<std::uint64_t> all;
  for (const auto& r : requests) {
    EXPECT_EQ(r.images.size(), r.frame_numbers.size());
    EXPECT_LE(r.images.size(), 3u);
    all.insert(all.end(), r.frame_numbers.begin(), r.frame_numbers.end());
  }
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<std::uint64_t>(kTrafficGated.begin(), kTrafficGated.end())));
  ASSERT_EQ(run.descriptions.size(), 4u);
  EXPECT_EQ(run.descriptions[0].frame_number, 2u);
  EXPECT_EQ(run.descriptions[0].covered_frames, (std::vector<std::uint64_t>{2, 10, 14}));
  EXPECT_EQ(run.descriptions[3].covered_frames, (std::vector<std::uint64_t>{27}));
}

TEST(Pipeline, CollageMode) {
  Harness h;
  auto detector = MockDetector::from_file(traffic("detections.json"));
  PipelineConfig config;
  config.submission_mode = SubmissionMode::collage;
  config.batch_size = 4;
  config.collage_columns = 2;
  const auto run = h.run(detector, config, {"run-collage", "", std::nullopt});
  auto requests = h.vision.requests();
  std::sort(requests.begin(), requests.end(), [](const auto& a, const auto& b) {
    return a.frame_numbers.front() < b.frame_numbers.front();
  });
  ASSERT_EQ(requests.size(), 3u);
  for (const auto& r : requests) ASSERT_EQ(r.images.size(), 1u);
  EXPECT_EQ(image_size(requests[0].images[0]), (ImageSize{320, 240}));
  EXPECT_EQ(image_size(requests[2].images[0]), (ImageSize{320, 120}));
  EXPECT_EQ(requests[0].frame_numbers, (std::vector<std::uint64_t>{2, 10, 14, 15}));
  ASSERT_EQ(run.descriptions.size(), 3u);
  EXPECT_EQ(run.descriptions[1].covered_frames, (std::vector<std::uint64_t>{17, 18, 20, 23}));
}

TEST(Pipeline, CropToStrongestDetection) {
  Harness h;
  auto detector = MockDetector::from_json(R"({"frames": {"4": [
      {"label": "person", "confidence": 0.5, "bbox": [0, 0, 20, 20]},
      {"label": "person", "confidence": 0.9, "bbox": [40, 30, 100, 90]},
      {"label": "car", "confidence": 0.99, "bbox": [0, 0, 160, 120]}]}})");
  PipelineConfig config;
  config.crop_to_detection = true;
  h.run(detector, config, {"run-crop", "", std::nullopt}, 6);
  const auto requests = h.vision.requests();
  ASSERT_EQ(requests.size(), 1u);
  const auto expected = crop_rect({40, 30, 100, 90}, {160, 120}, config.crop_margin);
  EXPECT_EQ(image_size(requests[0].images[0]), (ImageSize{expected.width, expected.height}));
}

TEST(Pipeline, DirectMode) {
  PipelineConfig config;
  config.prompting_mode = PromptingMode::direct;
  config.describe_prompt = std::string(kDefaultDirectDescribePrompt);
  {
    Harness h;
    auto detector = gate_on({1, 2});
    EXPECT_THROW(h.run(detector, config, {"run-direct-x", "", std::nullopt}), PreconditionError);
    EXPECT_FALSE(h.store.exists("run-direct-x"));
  }
  Harness h;
  auto detector = gate_on({1, 2, 3});
  const auto run = h.run(detector, config, {"run-direct", "", "accident"});
  ASSERT_EQ(h.vision.calls(), 3u);
  for (const auto& r : h.vision.requests()) {
    EXPECT_EQ(r.prompt, "Describe if there is accident happening in the image.");
  }
  EXPECT_TRUE(run.incident_query.has_value());
}

TEST(Pipeline, RunIdsAreImmutable) {
  Harness h;
  auto detector = gate_on({});
  h.run(detector, PipelineConfig{}, {"run-once", "", std::nullopt}, 3);
  EXPECT_THROW(h.run(detector, PipelineConfig{}, {"run-once", "", std::nullopt}, 3), StoreError);
}

TEST(Pipeline, EmptySource) {
  Harness h;
  auto detector = gate_on({});
  const auto run = h.run(detector, PipelineConfig{}, {"run-empty", "", std::nullopt}, 0);
  EXPECT_EQ(run.status, RunStatus::complete);
  EXPECT_EQ(run.sampled_frames, 0u);
  EXPECT_FALSE(run.summary.has_value());
  EXPECT_TRUE(write_reports(h.store, run).empty());
}

TEST(Pipeline, GeneratedRunIds) {
  const std::regex pattern(R"(run-\d{8}T\d{6}-[0-9a-f]{6})");
  const auto a = generate_run_id();
  EXPECT_TRUE(std::regex_match(a, pattern)) << a;
  EXPECT_NE(a, generate_run_id());
}

}  // namespace
}  // namespace vidsum
