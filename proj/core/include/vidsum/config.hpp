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

#include <chrono>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace vidsum {

/// Exact positive rational, used for frame rates such as 30000/1001.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  /// Accepts "2", "0.5", "30000/1001". Result is reduced.
  static Rational parse(std::string_view text);
  std::string str() const;

  friend bool operator==(const Rational&, const Rational&) = default;
};

enum class SubmissionMode { per_frame, sequence, collage };
enum class PromptingMode { direct, indirect };
enum class HarmCategory { harassment, hate_speech, sexual_content, dangerous_content };
enum class BlockThreshold { block_none, block_few, block_some, block_most };

std::string_view to_string(SubmissionMode);
std::string_view to_string(PromptingMode);
std::string_view to_string(HarmCategory);
std::string_view to_string(BlockThreshold);

inline constexpr HarmCategory kAllHarmCategories[] = {
    HarmCategory::harassment, HarmCategory::hate_speech, HarmCategory::sexual_content,
    HarmCategory::dangerous_content};

using SafetySettings = std::map<HarmCategory, BlockThreshold>;

SafetySettings default_safety_settings();

struct GenerationParams {
  double temperature = 0.0;
  SafetySettings safety = default_safety_settings();
  int max_output_tokens = 1024;

  friend bool operator==(const GenerationParams&, const GenerationParams&) = default;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  double jitter = 0.2;  // fraction of the nominal delay

  friend bool operator==(const RetryPolicy&, const RetryPolicy&) = default;
};

inline constexpr std::string_view kDefaultDescribePrompt = "Describe the image.";
inline constexpr std::string_view kDefaultDirectDescribePrompt =
    "Describe if there is {query} happening in the image.";
inline constexpr std::string_view kDefaultSummarizePrompt =
    "These are image descriptions of a video. Understand, remove redundant information and "
    "give a summary.";
inline constexpr std::string_view kDefaultQueryPrompt =
    "These are frame-wise descriptions of a video. Understand and describe the frames "
    "containing {query}.";

/// Immutable after load; shared freely between workers.
struct PipelineConfig {
  Rational frame_rate{1, 1};
  std::set<std::string> target_labels{"person"};
  double gate_confidence = 0.25;
  SubmissionMode submission_mode = SubmissionMode::per_frame;
  PromptingMode prompting_mode = PromptingMode::indirect;
  bool crop_to_detection = false;
  double crop_margin = 0.1;
  int batch_size = 4;
  int collage_columns = 2;
  GenerationParams vision_params;
  GenerationParams text_params;
  std::string describe_prompt{kDefaultDescribePrompt};
  std::string summarize_prompt{kDefaultSummarizePrompt};
  std::optional<std::string> query_prompt;
  int max_parallel_calls = 4;
  double requests_per_second = 0.0;  // 0 disables rate limiting
  RetryPolicy retry;

  /// query_prompt, or the built-in template when unset.
  std::string effective_query_prompt() const {
    return query_prompt ? *query_prompt : std::string(kDefaultQueryPrompt);
  }

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Throws ValidationError naming the first field that breaks an invariant.
void validate(const PipelineConfig& config);

/// Parses a JSON config document; missing keys take defaults. An empty or
/// whitespace-only document yields the defaults.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const PipelineConfig& config);

/// Substitutes `{name}` placeholders. Names match [A-Za-z_][A-Za-z0-9_]*;
/// any other brace is literal text. Extra bindings are ignored.
std::string render_prompt(std::string_view tmpl, const std::map<std::string, std::string>& bindings);

/// Distinct placeholder names in the template.
std::set<std::string> prompt_placeholders(std::string_view tmpl);

}  // namespace vidsum
