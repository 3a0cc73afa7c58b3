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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vidsum/config.hpp"
#include "vidsum/corpus.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/gate.hpp"
#include "vidsum/ingest.hpp"
#include "vidsum/vlm.hpp"

namespace vidsum {

/// Failure of one pipeline stage: "sample", "detect", "persist",
/// "describe", "summarize" or "query".
class PipelineError : public Error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct AnalyzeOptions {
  std::string run_id;  // empty: generated
  std::string source;  // recorded in the manifest
  /// Incident query answered after summarizing. Required in direct mode,
  /// where it is also embedded in every describe prompt.
  std::optional<std::string> query;
};

struct PipelineBackends {
  DetectorBackend& detector;
  Provider& vision;
  Provider& text;
};

/// "run-<utc yyyymmddThhmmss>-<6 hex>".
std::string generate_run_id();

/// Sample, detect, gate, describe and persist every frame of `frames`, then
/// summarize and optionally query. Detection and description run on up to
/// config.max_parallel_calls concurrent tasks; descriptions are committed
/// to the run log in frame order whatever order the calls finish in.
///
/// On a stage failure the manifest is marked failed with the diagnostic,
/// descriptions committed so far stay on disk, and PipelineError is thrown.
/// StoreError if the run id is taken.
AnalysisRun analyze(FrameSource& frames, const PipelineConfig& config,
                    const PipelineBackends& backends, RunStore& store,
                    const AnalyzeOptions& options = {});

/// Renders the run's markdown and structured reports into its reports/
/// directory. Returns the written paths; empty when the run has neither a
/// summary nor incidents.
std::vector<std::filesystem::path> write_reports(const RunStore& store, const AnalysisRun& run);

}  // namespace vidsum
