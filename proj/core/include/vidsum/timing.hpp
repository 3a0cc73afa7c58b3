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

#include <cstdint>
#include <map>
#include <string_view>

namespace vidsum {

enum class Stage { vision, text };

std::string_view to_string(Stage stage);

struct StageTiming {
  std::uint64_t count = 0;
  double sum_s = 0.0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;

  friend bool operator==(const StageTiming&, const StageTiming&) = default;
};

/// Per-stage latency statistics; updates are not synchronised, callers
/// serialise them.
struct TimingStats {
  std::map<Stage, StageTiming> stages;

  const StageTiming& at(Stage stage) const;
  friend bool operator==(const TimingStats&, const TimingStats&) = default;
};

}  // namespace vidsum
