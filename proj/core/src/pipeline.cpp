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

#include "vidsum/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <deque>
#include <future>
#include <random>

#include "encoding.hpp"
#include "vidsum/eval.hpp"
#include "vidsum/report.hpp"
#include "vidsum/summarize.hpp"

namespace vidsum {
namespace {

namespace fs = std::filesystem;

struct GateOutcome {
  FrameSample frame;
  GateDecision decision;
};

template <class F>
auto in_stage(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(stage, e.what());
  }
}

std::string frame_file_name(const FrameSample& frame) {
  char stem[32];
  std::snprintf(stem, sizeof stem, "%06llu", static_cast<unsigned long long>(frame.frame_number));
  return stem + extension_for(frame.image.media_type);
}

const Detection& strongest(const std::vector<Detection>& detections) {
  return *std::max_element(detections.begin(), detections.end(),
                           [](const Detection& a, const Detection& b) {
                             return a.confidence < b.confidence;
                           });
}

FrameDescription describe_batch(const std::vector<GateOutcome>& batch, const PipelineConfig& config,
                                const std::string& prompt, Provider& vision) {
  ProviderRequest request;
  request.prompt = prompt;
  request.params = config.vision_params;
  for (const auto& g : batch) request.frame_numbers.push_back(g.frame.frame_number);

  switch (config.submission_mode) {
    case SubmissionMode::per_frame: {
      const auto& g = batch.front();
      request.images.push_back(config.crop_to_detection
                                   ? crop(g.frame, strongest(g.decision.detections),
                                          config.crop_margin)
                                   : g.frame.image);
      break;
    }
    case SubmissionMode::sequence:
      for (const auto& g : batch) request.images.push_back(g.frame.image);
      break;
    case SubmissionMode::collage: {
      std::vector<FrameSample> frames;
      frames.reserve(batch.size());
      for (const auto& g : batch) frames.push_back(g.frame);
      request.images.push_back(build_collage(frames, config.collage_columns));
      break;
    }
  }

  const auto response = describe(vision, request);
  FrameDescription d;
  d.frame_number = batch.front().frame.frame_number;
  d.timestamp_s = batch.front().frame.timestamp_s;
  d.blocked = response.blocked;
  d.text = response.blocked ? std::string() : response.text;
  d.latency_s = response.latency_s;
  if (config.submission_mode != SubmissionMode::per_frame) d.covered_frames = request.frame_numbers;
  return d;
}

}  // namespace

std::string generate_run_id() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%S", &utc);
  std::random_device rd;
  char suffix[8];
  std::snprintf(suffix, sizeof suffix, "%06x", static_cast<unsigned>(rd() & 0xffffffu));
  return std::string("run-") + stamp + "-" + suffix;
}

AnalysisRun analyze(FrameSource& frames, const PipelineConfig& config,
                    const PipelineBackends& backends, RunStore& store,
                    const AnalyzeOptions& options) {
  validate(config);
  std::map<std::string, std::string> bindings;
  if (config.prompting_mode == PromptingMode::direct) {
    if (!options.query || options.query->empty()) {
      throw PreconditionError("direct prompting needs a query");
    }
    bindings["query"] = *options.query;
  }
  const std::string describe_prompt = render_prompt(config.describe_prompt, bindings);

  AnalysisRun run;
  run.run_id = options.run_id.empty() ? generate_run_id() : options.run_id;
  if (!is_valid_run_id(run.run_id)) throw PreconditionError("invalid run id '" + run.run_id + "'");
  run.created_at = detail::utc_timestamp();
  run.source = options.source;
  run.config_snapshot = config;
  store.create(run);
  auto log = store.open_log(run.run_id);

  const fs::path frames_dir = store.frames_dir(run.run_id);
  const std::size_t parallel = static_cast<std::size_t>(config.max_parallel_calls);
  const std::size_t batch_limit =
      config.submission_mode == SubmissionMode::per_frame ? 1 : static_cast<std::size_t>(config.batch_size);

  std::deque<std::future<GateOutcome>> gates;
  std::deque<std::future<FrameDescription>> describes;
  std::vector<GateOutcome> batch;

  auto commit_front = [&] {
    FrameDescription d = describes.front().get();
    describes.pop_front();
    in_stage("persist", [&] { log->append(d); });
    record_latency(run.stats, Stage::vision, d.latency_s);
    run.descriptions.push_back(std::move(d));
  };
  auto submit_batch = [&] {
    describes.push_back(std::async(std::launch::async, [&, b = std::move(batch)] {
      return in_stage("describe", [&] { return describe_batch(b, config, describe_prompt, backends.vision); });
    }));
    batch.clear();
  };
  auto settle_gate_front = [&] {
    GateOutcome g = gates.front().get();
    gates.pop_front();
    if (!g.decision.passed) return;
    ++run.gated_frames;
    batch.push_back(std::move(g));
    if (batch.size() >= batch_limit) submit_batch();
  };
  auto make_room = [&] {
    while (gates.size() + describes.size() >= parallel) {
      if (!describes.empty() &&
          (gates.empty() ||
           describes.front().wait_for(std::chrono::seconds(0)) == std::future_status::ready)) {
        commit_front();
      } else {
        settle_gate_front();
      }
    }
  };

  double last_timestamp = 0.0;
  try {
    while (auto sample = in_stage("sample", [&] { return frames.next(); })) {
      ++run.sampled_frames;
      last_timestamp = sample->timestamp_s;
      make_room();
      gates.push_back(std::async(std::launch::async, [&, frame = std::move(*sample)]() mutable {
        in_stage("persist", [&] { write_image_file(frames_dir / frame_file_name(frame), frame.image); });
        auto detections = in_stage("detect", [&] { return backends.detector.detect(frame); });
        GateDecision decision = apply_gate(detections, config, frame.frame_number);
        return GateOutcome{std::move(frame), std::move(decision)};
      }));
    }
    while (!gates.empty()) settle_gate_front();
    if (!batch.empty()) {
      while (describes.size() >= parallel) commit_front();
      submit_batch();
    }
    while (!describes.empty()) commit_front();

    const double step = static_cast<double>(config.frame_rate.den) / config.frame_rate.num;
    run.duration_s = frames.duration_s().value_or(
        run.sampled_frames == 0 ? 0.0 : last_timestamp + step);

    const std::string paragraph = build_paragraph(run.descriptions);
    if (!paragraph.empty()) {
      run.summary = in_stage("summarize", [&] {
        return summarize_run(paragraph, config, backends.text, &run.stats);
      });
      if (options.query) {
        QueryResult q = in_stage("query", [&] {
          return query_incidents(paragraph, *options.query, config, backends.text,
                                 run.descriptions, &run.stats);
        });
        run.incidents = q.incidents;
        run.incident_query = std::move(q);
      }
    }
  } catch (const PipelineError& e) {
    // Keep whatever finished in order; later failures are dropped.
    for (auto& g : gates) {
      try {
        if (g.valid()) g.get();
      } catch (const std::exception&) {
      }
    }
    while (!describes.empty()) {
      try {
        commit_front();
      } catch (const std::exception&) {
        if (!describes.empty() && !describes.front().valid()) describes.pop_front();
      }
    }
    run.status = RunStatus::failed;
    run.failure = e.what();
    try {
      store.write_manifest(run);
    } catch (const std::exception&) {
    }
    throw;
  }

  run.status = RunStatus::complete;
  store.write_manifest(run);
  return run;
}

std::vector<fs::path> write_reports(const RunStore& store, const AnalysisRun& run) {
  if (!run.summary && run.incidents.empty() && !run.incident_query) return {};
  const auto report = make_report(run);
  const auto dir = store.reports_dir(run.run_id);
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (auto [format, name] : {std::pair{ReportFormat::markdown, "report.md"},
                              std::pair{ReportFormat::structured_json, "report.json"},
                              std::pair{ReportFormat::csv_table, "incidents.csv"}}) {
    const auto path = dir / name;
    const std::string body = render(report, format);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw StoreError("cannot write " + path.string());
    const bool ok = std::fwrite(body.data(), 1, body.size(), f) == body.size();
    std::fclose(f);
    if (!ok) throw StoreError("short write to " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace vidsum
