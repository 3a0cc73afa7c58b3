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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vidsum/config.hpp"
#include "vidsum/corpus.hpp"
#include "vidsum/timing.hpp"

namespace vidsum {

enum class ReportFormat { structured_json, csv_table, markdown };

ReportFormat report_format_from_string(std::string_view text);  // "json", "csv", "md"
std::string_view content_type(ReportFormat format);
std::string_view file_extension(ReportFormat format);

inline constexpr std::string_view kIncidentColumns[] = {"Timestamp", "Frame Number",
                                                        "Information"};

struct RawOutput {
  std::string kind;  // "query"
  std::string prompt_or_query;
  std::string text;
  friend bool operator==(const RawOutput&, const RawOutput&) = default;
};

/// Everything a rendered report shows. Every format derives from one of
/// these.
struct RunReport {
  std::string run_id;
  std::string title;
  std::optional<std::string> summary;
  std::optional<std::string> query;  // set when the table answers a query
  std::vector<IncidentRecord> incidents;
  std::vector<FrameDescription> descriptions;
  TimingStats stats;
  PipelineConfig config_snapshot;
  std::vector<RawOutput> raw_outputs;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Report of the run's own incident table, or of `query` when given.
/// PreconditionError when there is neither a summary nor any incident
/// table to show.
RunReport make_report(const AnalysisRun& run, const QueryResult* query = nullptr);

std::string render(const RunReport& report, ReportFormat format);
std::string render_report(const AnalysisRun& run, ReportFormat format,
                          const QueryResult* query = nullptr);

/// Parses the structured_json rendering back. ParseError on bad input.
RunReport parse_structured_report(std::string_view text);

}  // namespace vidsum
