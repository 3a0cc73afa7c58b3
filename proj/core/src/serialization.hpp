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

#include "json.hpp"
#include "vidsum/corpus.hpp"
#include "vidsum/timing.hpp"

// JSON mappings shared by the run store, the report renderer and the HTTP
// service. Field names here are the on-disk and wire schema.
namespace vidsum::detail {

using json = nlohmann::json;

json to_json(const FrameDescription& d);
FrameDescription description_from_json(const json& j);

json to_json(const IncidentRecord& r);
IncidentRecord incident_from_json(const json& j);

json to_json(const QueryResult& q);
QueryResult query_result_from_json(const json& j);

json to_json(const TimingStats& stats);
TimingStats timing_from_json(const json& j);

json config_to_json(const PipelineConfig& config);
PipelineConfig config_from_json(const json& j);

RunStatus run_status_from_string(std::string_view text);

}  // namespace vidsum::detail
