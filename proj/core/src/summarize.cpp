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

#include "vidsum/summarize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "encoding.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/eval.hpp"

namespace vidsum {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "FRAME <digits>: <text>" with optional surrounding whitespace and markdown
// bullets/emphasis stripped from the front.
struct FrameLine {
  std::uint64_t frame = 0;
  std::string_view text;
};

std::optional<FrameLine> match_frame_line(std::string_view line) {
  line = trim(line);
  while (!line.empty() && (line.front() == '-' || line.front() == '*')) {
    line.remove_prefix(1);
    line = trim(line);
  }
  if (!line.starts_with("FRAME")) return std::nullopt;
  line.remove_prefix(5);
  if (line.empty() || !std::isspace(static_cast<unsigned char>(line.front()))) return std::nullopt;
  line = trim(line);
  std::uint64_t frame = 0;
  auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), frame);
  if (ec != std::errc{} || ptr == line.data()) return std::nullopt;
  line.remove_prefix(static_cast<std::size_t>(ptr - line.data()));
  line = trim(line);
  if (line.empty() || line.front() != ':') return std::nullopt;
  line.remove_prefix(1);
  line = trim(line);
  if (line.empty()) return std::nullopt;
  return FrameLine{frame, line};
}

const FrameDescription* find_description(std::span<const FrameDescription> descriptions,
                                         std::uint64_t frame) {
  auto it = std::find_if(descriptions.begin(), descriptions.end(),
                         [frame](const FrameDescription& d) { return d.frame_number == frame; });
  return it == descriptions.end() ? nullptr : &*it;
}

}  // namespace

std::string summarize_run(std::string_view paragraph, const PipelineConfig& config,
                          Provider& text_provider, TimingStats* stats) {
  if (trim(paragraph).empty()) throw PreconditionError("cannot summarize an empty paragraph");
  std::string prompt;
  if (prompt_placeholders(config.summarize_prompt).contains("descriptions")) {
    prompt = render_prompt(config.summarize_prompt, {{"descriptions", std::string(paragraph)}});
  } else {
    prompt = render_prompt(config.summarize_prompt, {});
    prompt += "\n\n";
    prompt += paragraph;
  }
  const auto response = generate_text(text_provider, std::move(prompt), config.text_params);
  if (stats) record_latency(*stats, Stage::text, response.latency_s);
  return response.blocked ? std::string() : response.text;
}

std::string build_query_prompt(std::string_view paragraph, std::string_view query,
                               const PipelineConfig& config) {
  std::string prompt = render_prompt(config.effective_query_prompt(),
                                     {{"query", std::string(query)},
                                      {"descriptions", std::string(paragraph)}});
  prompt += "\n";
  prompt += kIncidentInstruction;
  if (!prompt_placeholders(config.effective_query_prompt()).contains("descriptions")) {
    prompt += "\n\n";
    prompt += paragraph;
  }
  return prompt;
}

ParsedIncidents parse_incident_lines(std::string_view raw,
                                     std::span<const FrameDescription> descriptions) {
  ParsedIncidents parsed;
  if (trim(raw) == "NONE") {
    parsed.explicit_none = true;
    return parsed;
  }
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find('\n', start);
    if (end == std::string_view::npos) end = raw.size();
    const std::string_view line = raw.substr(start, end - start);
    start = end + 1;
    if (trim(line).empty()) {
      if (end == raw.size()) break;
      continue;
    }
    const auto match = match_frame_line(line);
    const FrameDescription* d = match ? find_description(descriptions, match->frame) : nullptr;
    if (match && d) {
      parsed.incidents.push_back(
          IncidentRecord{format_mmss(d->timestamp_s), match->frame, std::string(match->text)});
    } else {
      parsed.unparsed_lines.emplace_back(trim(line));
    }
    if (end == raw.size()) break;
  }
  return parsed;
}

std::string render_incident_lines(std::span<const IncidentRecord> incidents) {
  std::string out;
  for (const auto& r : incidents) {
    if (!out.empty()) out += '\n';
    out += "FRAME " + std::to_string(r.frame_number) + ": " + r.information;
  }
  return out;
}

QueryResult query_incidents(std::string_view paragraph, std::string_view query,
                            const PipelineConfig& config, Provider& text_provider,
                            std::span<const FrameDescription> descriptions, TimingStats* stats) {
  if (trim(paragraph).empty()) throw PreconditionError("cannot query an empty corpus");
  if (trim(query).empty()) throw PreconditionError("query is empty");

  const auto response = generate_text(text_provider, build_query_prompt(paragraph, query, config),
                                      config.text_params);
  if (stats) record_latency(*stats, Stage::text, response.latency_s);

  QueryResult result;
  result.query = std::string(query);
  result.raw_text = response.text;
  result.blocked = response.blocked;
  result.created_at = detail::utc_timestamp();
  auto parsed = parse_incident_lines(response.text, descriptions);
  result.incidents = std::move(parsed.incidents);
  result.unparsed_lines = std::move(parsed.unparsed_lines);
  result.parse_warning =
      result.incidents.empty() && !parsed.explicit_none && !trim(response.text).empty();
  return result;
}

ProviderResponse direct_describe_query(const FrameSample& frame, std::string_view query,
                                       const PipelineConfig& config, Provider& vision_provider) {
  if (config.prompting_mode != PromptingMode::direct) {
    throw PreconditionError("direct_describe_query requires prompting_mode = direct");
  }
  if (trim(query).empty()) throw PreconditionError("query is empty");
  ProviderRequest request;
  request.images.push_back(frame.image);
  request.frame_numbers.push_back(frame.frame_number);
  request.prompt = render_prompt(config.describe_prompt, {{"query", std::string(query)}});
  request.params = config.vision_params;
  return describe(vision_provider, request);
}

}  // namespace vidsum
