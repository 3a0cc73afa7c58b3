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

#include "serialization.hpp"

#include "vidsum/errors.hpp"

namespace vidsum {

std::string_view to_string(Stage stage) { return stage == Stage::vision ? "vision" : "text"; }

const StageTiming& TimingStats::at(Stage stage) const {
  static const StageTiming empty;
  auto it = stages.find(stage);
  return it == stages.end() ? empty : it->second;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::in_progress: return "in_progress";
    case RunStatus::complete: return "complete";
    case RunStatus::failed: return "failed";
  }
  return "?";
}

namespace detail {

json to_json(const FrameDescription& d) {
  json j{{"frame_number", d.frame_number},
         {"timestamp_s", d.timestamp_s},
         {"text", d.text},
         {"latency_s", d.latency_s},
         {"blocked", d.blocked}};
  if (!d.covered_frames.empty()) j["covered_frames"] = d.covered_frames;
  return j;
}

FrameDescription description_from_json(const json& j) {
  FrameDescription d;
  d.frame_number = j.at("frame_number").get<std::uint64_t>();
  d.timestamp_s = j.at("timestamp_s").get<double>();
  d.text = j.at("text").get<std::string>();
  d.latency_s = j.at("latency_s").get<double>();
  d.blocked = j.at("blocked").get<bool>();
  if (j.contains("covered_frames")) {
    d.covered_frames = j.at("covered_frames").get<std::vector<std::uint64_t>>();
  }
  if (d.blocked && !d.text.empty()) throw ParseError("blocked description carries text");
  if (d.timestamp_s < 0 || d.latency_s < 0) throw ParseError("negative time in description");
  return d;
}

json to_json(const IncidentRecord& r) {
  return json{{"timestamp", r.timestamp},
              {"frame_number", r.frame_number},
              {"information", r.information}};
}

IncidentRecord incident_from_json(const json& j) {
  return IncidentRecord{j.at("timestamp").get<std::string>(),
                        j.at("frame_number").get<std::uint64_t>(),
                        j.at("information").get<std::string>()};
}

json to_json(const QueryResult& q) {
  json incidents = json::array();
  for (const auto& r : q.incidents) incidents.push_back(to_json(r));
  return json{{"query", q.query},
              {"incidents", incidents},
              {"raw_text", q.raw_text},
              {"unparsed_lines", q.unparsed_lines},
              {"parse_warning", q.parse_warning},
              {"blocked", q.blocked},
              {"created_at", q.created_at}};
}

QueryResult query_result_from_json(const json& j) {
  QueryResult q;
  q.query = j.at("query").get<std::string>();
  for (const auto& r : j.at("incidents")) q.incidents.push_back(incident_from_json(r));
  q.raw_text = j.at("raw_text").get<std::string>();
  q.unparsed_lines = j.at("unparsed_lines").get<std::vector<std::string>>();
  q.parse_warning = j.at("parse_warning").get<bool>();
  q.blocked = j.value("blocked", false);
  q.created_at = j.value("created_at", std::string());
  return q;
}

json to_json(const TimingStats& stats) {
  json j = json::object();
  for (const auto& [stage, t] : stats.stages) {
    j[std::string(to_string(stage))] = {{"count", t.count},
                                        {"sum_s", t.sum_s},
                                        {"mean_s", t.mean_s},
                                        {"min_s", t.min_s},
                                        {"max_s", t.max_s}};
  }
  return j;
}

TimingStats timing_from_json(const json& j) {
  TimingStats stats;
  for (const auto& [key, value] : j.items()) {
    Stage stage;
    if (key == "vision") {
      stage = Stage::vision;
    } else if (key == "text") {
      stage = Stage::text;
    } else {
      throw ParseError("unknown timing stage '" + key + "'");
    }
    stats.stages[stage] = StageTiming{value.at("count").get<std::uint64_t>(),
                                      value.at("sum_s").get<double>(),
                                      value.at("mean_s").get<double>(),
                                      value.at("min_s").get<double>(),
                                      value.at("max_s").get<double>()};
  }
  return stats;
}

json config_to_json(const PipelineConfig& config) { return json::parse(serialize_config(config)); }

PipelineConfig config_from_json(const json& j) { return parse_config(j.dump()); }

RunStatus run_status_from_string(std::string_view text) {
  if (text == "in_progress") return RunStatus::in_progress;
  if (text == "complete") return RunStatus::complete;
  if (text == "failed") return RunStatus::failed;
  throw ParseError("unknown run status '" + std::string(text) + "'");
}

}  // namespace detail
}  // namespace vidsum
