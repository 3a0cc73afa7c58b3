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

#include "vidsum/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "vidsum/errors.hpp"

namespace vidsum {
namespace {

using json = nlohmann::json;

template <typename Enum, std::size_t N>
Enum enum_from_string(std::string_view field, std::string_view text,
                      const Enum (&values)[N]) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  throw ValidationError(std::string(field), "unknown value '" + std::string(text) + "'");
}

constexpr SubmissionMode kSubmissionModes[] = {SubmissionMode::per_frame, SubmissionMode::sequence,
                                               SubmissionMode::collage};
constexpr PromptingMode kPromptingModes[] = {PromptingMode::direct, PromptingMode::indirect};
constexpr BlockThreshold kThresholds[] = {BlockThreshold::block_none, BlockThreshold::block_few,
                                          BlockThreshold::block_some, BlockThreshold::block_most};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of the placeholder starting at tmpl[i] == '{', or 0 if none.
std::size_t placeholder_length(std::string_view tmpl, std::size_t i) {
  if (i + 1 >= tmpl.size() || !is_ident_start(tmpl[i + 1])) return 0;
  std::size_t j = i + 2;
  while (j < tmpl.size() && is_ident_char(tmpl[j])) ++j;
  if (j >= tmpl.size() || tmpl[j] != '}') return 0;
  return j - i + 1;
}

std::string field_path(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : std::string(parent) + "." + std::string(key);
}

void reject_unknown_keys(const json& obj, std::string_view parent,
                         std::initializer_list<std::string_view> known) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError(field_path(parent, key), "unknown configuration key");
    }
  }
}

template <typename T>
T get_as(const json& obj, std::string_view parent, std::string_view key) {
  try {
    return obj.at(std::string(key)).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(field_path(parent, key), "wrong value type");
  }
}

GenerationParams parse_generation_params(const json& obj, std::string_view parent) {
  if (!obj.is_object()) throw ValidationError(std::string(parent), "expected an object");
  reject_unknown_keys(obj, parent, {"temperature", "safety", "max_output_tokens"});
  GenerationParams params;
  if (obj.contains("temperature")) params.temperature = get_as<double>(obj, parent, "temperature");
  if (obj.contains("max_output_tokens")) {
    params.max_output_tokens = get_as<int>(obj, parent, "max_output_tokens");
  }
  if (obj.contains("safety")) {
    const auto& safety = obj.at("safety");
    const std::string safety_path = field_path(parent, "safety");
    if (!safety.is_object()) throw ValidationError(safety_path, "expected an object");
    for (const auto& [key, value] : safety.items()) {
      const auto category =
          enum_from_string(field_path(safety_path, key), key, kAllHarmCategories);
      if (!value.is_string()) throw ValidationError(field_path(safety_path, key), "expected a string");
      params.safety[category] =
          enum_from_string(field_path(safety_path, key), value.get<std::string>(), kThresholds);
    }
  }
  return params;
}

json generation_params_to_json(const GenerationParams& params) {
  json safety = json::object();
  for (const auto& [category, threshold] : params.safety) {
    safety[std::string(to_string(category))] = std::string(to_string(threshold));
  }
  return json{{"temperature", params.temperature},
              {"safety", safety},
              {"max_output_tokens", params.max_output_tokens}};
}

void validate_generation_params(const GenerationParams& params, std::string_view parent) {
  if (!(params.temperature >= 0.0) || !std::isfinite(params.temperature)) {
    throw ValidationError(field_path(parent, "temperature"), "must be a finite value >= 0");
  }
  if (params.max_output_tokens <= 0) {
    throw ValidationError(field_path(parent, "max_output_tokens"), "must be positive");
  }
  for (HarmCategory category : kAllHarmCategories) {
    if (!params.safety.contains(category)) {
      throw ValidationError(field_path(field_path(parent, "safety"), to_string(category)),
                            "every harm category needs a threshold");
    }
  }
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  auto trimmed = text;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) {
    trimmed.remove_prefix(1);
  }
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) {
    trimmed.remove_suffix(1);
  }
  const std::string original(text);
  if (trimmed.empty()) throw ParseError("empty rational");

  std::int64_t num = 0;
  std::int64_t den = 1;
  if (auto slash = trimmed.find('/'); slash != std::string_view::npos) {
    auto a = trimmed.substr(0, slash);
    auto b = trimmed.substr(slash + 1);
    auto ra = std::from_chars(a.data(), a.data() + a.size(), num);
    auto rb = std::from_chars(b.data(), b.data() + b.size(), den);
    if (ra.ec != std::errc{} || ra.ptr != a.data() + a.size() || rb.ec != std::errc{} ||
        rb.ptr != b.data() + b.size()) {
      throw ParseError("malformed rational '" + original + "'");
    }
  } else if (auto dot = trimmed.find('.'); dot != std::string_view::npos) {
    auto whole = trimmed.substr(0, dot);
    auto frac = trimmed.substr(dot + 1);
    if (frac.size() > 9 || (whole.empty() && frac.empty())) {
      throw ParseError("malformed rational '" + original + "'");
    }
    std::int64_t w = 0;
    std::int64_t f = 0;
    if (!whole.empty()) {
      auto r = std::from_chars(whole.data(), whole.data() + whole.size(), w);
      if (r.ec != std::errc{} || r.ptr != whole.data() + whole.size()) {
        throw ParseError("malformed rational '" + original + "'");
      }
    }
    if (!frac.empty()) {
      auto r = std::from_chars(frac.data(), frac.data() + frac.size(), f);
      if (r.ec != std::errc{} || r.ptr != frac.data() + frac.size() || f < 0) {
        throw ParseError("malformed rational '" + original + "'");
      }
    }
    den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    num = w * den + (w < 0 ? -f : f);
  } else {
    auto r = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), num);
    if (r.ec != std::errc{} || r.ptr != trimmed.data() + trimmed.size()) {
      throw ParseError("malformed rational '" + original + "'");
    }
  }
  if (den == 0) throw ParseError("zero denominator in '" + original + "'");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const auto g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

std::string Rational::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

std::string_view to_string(SubmissionMode mode) {
  switch (mode) {
    case SubmissionMode::per_frame: return "per_frame";
    case SubmissionMode::sequence: return "sequence";
    case SubmissionMode::collage: return "collage";
  }
  return "?";
}

std::string_view to_string(PromptingMode mode) {
  return mode == PromptingMode::direct ? "direct" : "indirect";
}

std::string_view to_string(HarmCategory category) {
  switch (category) {
    case HarmCategory::harassment: return "harassment";
    case HarmCategory::hate_speech: return "hate_speech";
    case HarmCategory::sexual_content: return "sexual_content";
    case HarmCategory::dangerous_content: return "dangerous_content";
  }
  return "?";
}

std::string_view to_string(BlockThreshold threshold) {
  switch (threshold) {
    case BlockThreshold::block_none: return "block_none";
    case BlockThreshold::block_few: return "block_few";
    case BlockThreshold::block_some: return "block_some";
    case BlockThreshold::block_most: return "block_most";
  }
  return "?";
}

SafetySettings default_safety_settings() {
  SafetySettings settings;
  for (HarmCategory category : kAllHarmCategories) settings[category] = BlockThreshold::block_some;
  return settings;
}

std::set<std::string> prompt_placeholders(std::string_view tmpl) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{') continue;
    if (auto len = placeholder_length(tmpl, i); len > 0) {
      names.emplace(tmpl.substr(i + 1, len - 2));
      i += len - 1;
    }
  }
  return names;
}

std::string render_prompt(std::string_view tmpl,
                          const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(tmpl.size());
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      if (auto len = placeholder_length(tmpl, i); len > 0) {
        const std::string name(tmpl.substr(i + 1, len - 2));
        auto it = bindings.find(name);
        if (it == bindings.end()) {
          throw PreconditionError("missing binding for placeholder '{" + name + "}'");
        }
        out += it->second;
        i += len - 1;
        continue;
      }
    }
    out.push_back(tmpl[i]);
  }
  return out;
}

void validate(const PipelineConfig& config) {
  if (config.frame_rate.num <= 0 || config.frame_rate.den <= 0) {
    throw ValidationError("frame_rate", "must be > 0");
  }
  if (config.target_labels.empty()) {
    throw ValidationError("target_labels", "at least one label is required");
  }
  for (const auto& label : config.target_labels) {
    if (label.empty()) throw ValidationError("target_labels", "labels must be non-empty");
  }
  if (!(config.gate_confidence >= 0.0 && config.gate_confidence <= 1.0)) {
    throw ValidationError("gate_confidence", "must lie in [0, 1]");
  }
  if (config.crop_to_detection && config.submission_mode != SubmissionMode::per_frame) {
    throw ValidationError("crop_to_detection", "requires submission_mode = per_frame");
  }
  if (!(config.crop_margin >= 0.0) || !std::isfinite(config.crop_margin)) {
    throw ValidationError("crop_margin", "must be a finite value >= 0");
  }
  if (config.batch_size <= 0) throw ValidationError("batch_size", "must be positive");
  if (config.collage_columns <= 0) throw ValidationError("collage_columns", "must be positive");
  validate_generation_params(config.vision_params, "vision_params");
  validate_generation_params(config.text_params, "text_params");
  if (config.describe_prompt.empty()) throw ValidationError("describe_prompt", "must be non-empty");
  if (config.summarize_prompt.empty()) {
    throw ValidationError("summarize_prompt", "must be non-empty");
  }
  const bool describe_has_query = prompt_placeholders(config.describe_prompt).contains("query");
  if (config.prompting_mode == PromptingMode::direct && !describe_has_query) {
    throw ValidationError("describe_prompt", "direct prompting requires a {query} placeholder");
  }
  if (config.prompting_mode == PromptingMode::indirect && describe_has_query) {
    throw ValidationError("describe_prompt",
                          "indirect prompting keeps the query out of the describe prompt");
  }
  if (config.query_prompt && !prompt_placeholders(*config.query_prompt).contains("query")) {
    throw ValidationError("query_prompt", "must contain a {query} placeholder");
  }
  if (config.max_parallel_calls <= 0) {
    throw ValidationError("max_parallel_calls", "must be positive");
  }
  if (!(config.requests_per_second >= 0.0) || !std::isfinite(config.requests_per_second)) {
    throw ValidationError("requests_per_second", "must be a finite value >= 0");
  }
  if (config.retry.max_attempts <= 0) {
    throw ValidationError("retry.max_attempts", "must be positive");
  }
  if (config.retry.initial_backoff.count() < 0 ||
      config.retry.max_backoff < config.retry.initial_backoff) {
    throw ValidationError("retry.max_backoff_ms", "must be >= initial_backoff_ms >= 0");
  }
  if (!(config.retry.jitter >= 0.0 && config.retry.jitter <= 1.0)) {
    throw ValidationError("retry.jitter", "must lie in [0, 1]");
  }
}

PipelineConfig parse_config(std::string_view text) {
  PipelineConfig config;
  if (std::all_of(text.begin(), text.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
    validate(config);
    return config;
  }

  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config document must be a JSON object");

  reject_unknown_keys(doc, "",
                      {"frame_rate", "target_labels", "gate_confidence", "submission_mode",
                       "prompting_mode", "crop_to_detection", "crop_margin", "batch_size",
                       "collage_columns", "vision_params", "text_params", "describe_prompt",
                       "summarize_prompt", "query_prompt", "max_parallel_calls",
                       "requests_per_second", "retry"});

  if (doc.contains("frame_rate")) {
    const auto& v = doc.at("frame_rate");
    try {
      if (v.is_string()) {
        config.frame_rate = Rational::parse(v.get<std::string>());
      } else if (v.is_number_integer()) {
        config.frame_rate = Rational{v.get<std::int64_t>(), 1};
      } else if (v.is_number()) {
        std::ostringstream os;
        os.precision(9);
        os << std::fixed << v.get<double>();
        config.frame_rate = Rational::parse(os.str());
      } else {
        throw ValidationError("frame_rate", "expected a number or a \"num/den\" string");
      }
    } catch (const ParseError& e) {
      throw ValidationError("frame_rate", e.what());
    }
  }
  if (doc.contains("target_labels")) {
    const auto labels = get_as<std::vector<std::string>>(doc, "", "target_labels");
    config.target_labels = {labels.begin(), labels.end()};
  }
  if (doc.contains("gate_confidence")) {
    config.gate_confidence = get_as<double>(doc, "", "gate_confidence");
  }
  if (doc.contains("submission_mode")) {
    config.submission_mode = enum_from_string(
        "submission_mode", get_as<std::string>(doc, "", "submission_mode"), kSubmissionModes);
  }
  if (doc.contains("prompting_mode")) {
    config.prompting_mode = enum_from_string(
        "prompting_mode", get_as<std::string>(doc, "", "prompting_mode"), kPromptingModes);
  }
  if (doc.contains("crop_to_detection")) {
    config.crop_to_detection = get_as<bool>(doc, "", "crop_to_detection");
  }
  if (doc.contains("crop_margin")) config.crop_margin = get_as<double>(doc, "", "crop_margin");
  if (doc.contains("batch_size")) config.batch_size = get_as<int>(doc, "", "batch_size");
  if (doc.contains("collage_columns")) {
    config.collage_columns = get_as<int>(doc, "", "collage_columns");
  }
  if (doc.contains("vision_params")) {
    config.vision_params = parse_generation_params(doc.at("vision_params"), "vision_params");
  }
  if (doc.contains("text_params")) {
    config.text_params = parse_generation_params(doc.at("text_params"), "text_params");
  }
  if (doc.contains("describe_prompt")) {
    config.describe_prompt = get_as<std::string>(doc, "", "describe_prompt");
  } else if (config.prompting_mode == PromptingMode::direct) {
    config.describe_prompt = std::string(kDefaultDirectDescribePrompt);
  }
  if (doc.contains("summarize_prompt")) {
    config.summarize_prompt = get_as<std::string>(doc, "", "summarize_prompt");
  }
  if (doc.contains("query_prompt") && !doc.at("query_prompt").is_null()) {
    config.query_prompt = get_as<std::string>(doc, "", "query_prompt");
  }
  if (doc.contains("max_parallel_calls")) {
    config.max_parallel_calls = get_as<int>(doc, "", "max_parallel_calls");
  }
  if (doc.contains("requests_per_second")) {
    config.requests_per_second = get_as<double>(doc, "", "requests_per_second");
  }
  if (doc.contains("retry")) {
    const auto& retry = doc.at("retry");
    if (!retry.is_object()) throw ValidationError("retry", "expected an object");
    reject_unknown_keys(retry, "retry",
                        {"max_attempts", "initial_backoff_ms", "max_backoff_ms", "jitter"});
    if (retry.contains("max_attempts")) {
      config.retry.max_attempts = get_as<int>(retry, "retry", "max_attempts");
    }
    if (retry.contains("initial_backoff_ms")) {
      config.retry.initial_backoff =
          std::chrono::milliseconds(get_as<std::int64_t>(retry, "retry", "initial_backoff_ms"));
    }
    if (retry.contains("max_backoff_ms")) {
      config.retry.max_backoff =
          std::chrono::milliseconds(get_as<std::int64_t>(retry, "retry", "max_backoff_ms"));
    }
    if (retry.contains("jitter")) config.retry.jitter = get_as<double>(retry, "retry", "jitter");
  }

  validate(config);
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const PipelineConfig& config) {
  json doc{
      {"frame_rate", config.frame_rate.str()},
      {"target_labels", std::vector<std::string>(config.target_labels.begin(),
                                                 config.target_labels.end())},
      {"gate_confidence", config.gate_confidence},
      {"submission_mode", std::string(to_string(config.submission_mode))},
      {"prompting_mode", std::string(to_string(config.prompting_mode))},
      {"crop_to_detection", config.crop_to_detection},
      {"crop_margin", config.crop_margin},
      {"batch_size", config.batch_size},
      {"collage_columns", config.collage_columns},
      {"vision_params", generation_params_to_json(config.vision_params)},
      {"text_params", generation_params_to_json(config.text_params)},
      {"describe_prompt", config.describe_prompt},
      {"summarize_prompt", config.summarize_prompt},
      {"query_prompt", config.query_prompt ? json(*config.query_prompt) : json(nullptr)},
      {"max_parallel_calls", config.max_parallel_calls},
      {"requests_per_second", config.requests_per_second},
      {"retry",
       {{"max_attempts", config.retry.max_attempts},
        {"initial_backoff_ms", config.retry.initial_backoff.count()},
        {"max_backoff_ms", config.retry.max_backoff.count()},
        {"jitter", config.retry.jitter}}},
  };
  return doc.dump(2) + "\n";
}

}  // namespace vidsum
