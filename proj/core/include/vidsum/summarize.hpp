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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidsum/config.hpp"
#include "vidsum/corpus.hpp"
#include "vidsum/ingest.hpp"
#include "vidsum/timing.hpp"
#include "vidsum/vlm.hpp"

namespace vidsum {

/// Appended to every incident query so answers come back one per line as
/// "FRAME <n>: <information>".
inline constexpr std::string_view kIncidentInstruction =
    "Answer with one line per relevant frame, formatted exactly as\n"
    "FRAME <frame number>: <what happens in that frame>\n"
    "Use the frame numbers given below. If no frame is relevant, answer NONE.";

/// Whole-video summary: the summarize prompt followed by the paragraph
/// (or substituted for a {descriptions} placeholder). The provider text is
/// returned verbatim; a blocked reply yields an empty string. Latency goes
/// into `stats` when given.
std::string summarize_run(std::string_view paragraph, const PipelineConfig& config,
                          Provider& text_provider, TimingStats* stats = nullptr);

/// Full prompt sent by query_incidents.
std::string build_query_prompt(std::string_view paragraph, std::string_view query,
                               const PipelineConfig& config);

struct ParsedIncidents {
  std::vector<IncidentRecord> incidents;
  std::vector<std::string> unparsed_lines;
  bool explicit_none = false;  // the reply was exactly NONE
};

/// Parses "FRAME <n>: <text>" lines. Lines naming a frame absent from
/// `descriptions` are returned as unparsed. Blank lines are ignored.
ParsedIncidents parse_incident_lines(std::string_view raw,
                                     std::span<const FrameDescription> descriptions);

/// Inverse of parse_incident_lines on well-formed input.
std::string render_incident_lines(std::span<const IncidentRecord> incidents);

/// Specific-incident query over the description corpus.
QueryResult query_incidents(std::string_view paragraph, std::string_view query,
                            const PipelineConfig& config, Provider& text_provider,
                            std::span<const FrameDescription> descriptions,
                            TimingStats* stats = nullptr);

/// Direct prompting: one vision call whose prompt embeds the query.
/// PreconditionError unless config.prompting_mode is direct.
ProviderResponse direct_describe_query(const FrameSample& frame, std::string_view query,
                                       const PipelineConfig& config, Provider& vision_provider);

}  // namespace vidsum
