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

#include "vidsum/vlm.hpp"

#include <algorithm>
#include <cmath>
#include <opencv2/imgproc.hpp>
#include <thread>

#include "encoding.hpp"
#include "httplib.h"
#include "image_codec.hpp"
#include "json.hpp"
#include "url.hpp"

namespace vidsum {
namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ProviderError::Kind kind_for_status(int status) {
  if (status == 401 || status == 403) return ProviderError::Kind::authentication;
  if (status == 408 || status == 429 || status >= 500) return ProviderError::Kind::transient;
  return ProviderError::Kind::invalid_request;
}

std::string_view gemini_category(HarmCategory category) {
  switch (category) {
    case HarmCategory::harassment: return "HARM_CATEGORY_HARASSMENT";
    case HarmCategory::hate_speech: return "HARM_CATEGORY_HATE_SPEECH";
    case HarmCategory::sexual_content: return "HARM_CATEGORY_SEXUALLY_EXPLICIT";
    case HarmCategory::dangerous_content: return "HARM_CATEGORY_DANGEROUS_CONTENT";
  }
  return "HARM_CATEGORY_UNSPECIFIED";
}

std::string_view gemini_threshold(BlockThreshold threshold) {
  switch (threshold) {
    case BlockThreshold::block_none: return "BLOCK_NONE";
    case BlockThreshold::block_few: return "BLOCK_ONLY_HIGH";
    case BlockThreshold::block_some: return "BLOCK_MEDIUM_AND_ABOVE";
    case BlockThreshold::block_most: return "BLOCK_LOW_AND_ABOVE";
  }
  return "HARM_BLOCK_THRESHOLD_UNSPECIFIED";
}

// POSTs a JSON body and maps transport/HTTP failures onto ProviderError.
struct PostResult {
  std::string body;
  double latency_s = 0;
};

PostResult post_json(const std::string& url, const std::string& body,
                     const httplib::Headers& headers, std::chrono::seconds timeout) {
  const auto target = detail::split_url(url);
  httplib::Client client(target.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  const auto start = Clock::now();
  auto res = client.Post(target.path, headers, body, "application/json");
  const double latency = seconds_since(start);
  if (!res) {
    throw ProviderError(ProviderError::Kind::transient,
                        "request to " + target.origin + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    std::string snippet = res->body.substr(0, 300);
    throw ProviderError(kind_for_status(res->status),
                        "HTTP " + std::to_string(res->status) + " from " + target.origin + ": " +
                            snippet);
  }
  return {res->body, latency};
}

void require_key(const RemoteSettings& settings) {
  if (settings.api_key.empty()) {
    throw ProviderError(ProviderError::Kind::authentication, "no API key configured");
  }
}

std::string trim_trailing_slash(std::string s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
  return s;
}

}  // namespace

void validate_request(const ProviderRequest& request) {
  if (request.prompt.empty()) throw PreconditionError("provider request prompt is empty");
  if (!request.frame_numbers.empty() &&
      !std::is_sorted(request.frame_numbers.begin(), request.frame_numbers.end())) {
    throw PreconditionError("request images must be ordered by frame number");
  }
  for (const auto& image : request.images) {
    if (image.empty()) throw PreconditionError("provider request carries an empty image");
  }
}

ProviderResponse describe(Provider& provider, const ProviderRequest& request) {
  validate_request(request);
  return provider.generate(request);
}

ProviderResponse generate_text(Provider& provider, std::string prompt,
                               const GenerationParams& params) {
  ProviderRequest request;
  request.prompt = std::move(prompt);
  request.params = params;
  validate_request(request);
  return provider.generate(request);
}

// --- MockProvider -----------------------------------------------------------

std::unique_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& fixture) {
  return from_json(detail::read_file(fixture.string()));
}

std::unique_ptr<MockProvider> MockProvider::from_json(std::string_view fixture) {
  auto mock = std::make_unique<MockProvider>();
  try {
    const auto doc = json::parse(fixture);
    mock->id_ = doc.value("provider_id", std::string("mock"));
    mock->default_text_ = doc.value("default", std::string());
    mock->echo_ = doc.value("echo", false);
    mock->fail_first_ = doc.value("fail_first", std::uint64_t{0});
    const auto kind = doc.value("failure_kind", std::string("transient"));
    if (kind == "transient") {
      mock->failure_kind_ = ProviderError::Kind::transient;
    } else if (kind == "authentication") {
      mock->failure_kind_ = ProviderError::Kind::authentication;
    } else {
      throw ParseError("unknown failure_kind '" + kind + "' in provider fixture");
    }
    if (doc.contains("frames")) {
      for (const auto& [key, value] : doc.at("frames").items()) {
        mock->frames_[std::stoull(key)] = value.get<std::string>();
      }
    }
    if (doc.contains("responses")) {
      for (const auto& item : doc.at("responses")) {
        Rule rule;
        if (item.contains("frame")) rule.frame = item.at("frame").get<std::uint64_t>();
        if (item.contains("prompt_contains")) {
          rule.prompt_contains = item.at("prompt_contains").get<std::string>();
        }
        if (item.contains("prompt_sha256")) {
          rule.prompt_sha256 = item.at("prompt_sha256").get<std::string>();
        }
        rule.blocked = item.value("blocked", false);
        rule.text = rule.blocked ? std::string() : item.value("text", std::string());
        mock->rules_.push_back(std::move(rule));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed provider fixture: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("provider fixture frame keys must be integers");
  }
  return mock;
}

std::unique_ptr<MockProvider> MockProvider::echo() {
  auto mock = std::make_unique<MockProvider>();
  mock->id_ = "mock-echo";
  mock->echo_ = true;
  return mock;
}

ProviderRequest MockProvider::last_request() const {
  std::lock_guard lock(last_mutex_);
  return last_;
}

ProviderResponse MockProvider::generate(const ProviderRequest& request) {
  const auto start = Clock::now();
  const auto call_index = calls_.fetch_add(1);
  {
    std::lock_guard lock(last_mutex_);
    last_ = request;
  }
  if (call_index < fail_first_) {
    throw ProviderError(failure_kind_, "scripted failure " + std::to_string(call_index + 1) +
                                           " of " + std::to_string(fail_first_));
  }

  ProviderResponse response;
  response.provider_id = id_;
  const std::optional<std::uint64_t> first_frame =
      request.frame_numbers.empty() ? std::nullopt
                                    : std::optional<std::uint64_t>(request.frame_numbers.front());

  bool matched = false;
  std::optional<std::string> prompt_hash;
  for (const auto& rule : rules_) {
    if (rule.frame && rule.frame != first_frame) continue;
    if (rule.prompt_contains && request.prompt.find(*rule.prompt_contains) == std::string::npos) {
      continue;
    }
    if (rule.prompt_sha256) {
      if (!prompt_hash) prompt_hash = detail::sha256_hex(request.prompt);
      if (*prompt_hash != *rule.prompt_sha256) continue;
    }
    response.text = rule.text;
    response.blocked = rule.blocked;
    matched = true;
    break;
  }
  if (!matched) {
    if (auto it = first_frame ? frames_.find(*first_frame) : frames_.end(); it != frames_.end()) {
      response.text = it->second;
    } else if (echo_) {
      response.text = request.prompt;
    } else {
      response.text = default_text_;
    }
  }
  response.latency_s = seconds_since(start);
  successes_.fetch_add(1);
  return response;
}

// --- GeminiProvider ---------------------------------------------------------

GeminiProvider::GeminiProvider(RemoteSettings settings) : settings_(std::move(settings)) {
  settings_.base_url = trim_trailing_slash(settings_.base_url);
}

std::string GeminiProvider::build_body(const ProviderRequest& request) {
  json parts = json::array();
  for (const auto& image : request.images) {
    parts.push_back({{"inline_data",
                      {{"mime_type", image.media_type},
                       {"data", detail::base64_encode(image.bytes)}}}});
  }
  parts.push_back({{"text", request.prompt}});
  json safety = json::array();
  for (const auto& [category, threshold] : request.params.safety) {
    safety.push_back({{"category", gemini_category(category)},
                      {"threshold", gemini_threshold(threshold)}});
  }
  const json body{{"contents", json::array({{{"role", "user"}, {"parts", parts}}})},
                  {"generationConfig",
                   {{"temperature", request.params.temperature},
                    {"maxOutputTokens", request.params.max_output_tokens}}},
                  {"safetySettings", safety}};
  return body.dump();
}

ProviderResponse GeminiProvider::parse_body(std::string_view body) {
  ProviderResponse response;
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Kind::transient,
                        std::string("malformed provider response: ") + e.what());
  }
  if (doc.contains("promptFeedback") && doc["promptFeedback"].contains("blockReason")) {
    response.blocked = true;
    return response;
  }
  if (!doc.contains("candidates") || doc["candidates"].empty()) {
    response.blocked = true;
    return response;
  }
  const auto& candidate = doc["candidates"][0];
  if (candidate.value("finishReason", std::string()) == "SAFETY") {
    response.blocked = true;
    return response;
  }
  if (candidate.contains("content") && candidate["content"].contains("parts")) {
    for (const auto& part : candidate["content"]["parts"]) {
      if (part.contains("text")) response.text += part["text"].get<std::string>();
    }
  }
  return response;
}

ProviderResponse GeminiProvider::generate(const ProviderRequest& request) {
  require_key(settings_);
  const std::string url =
      settings_.base_url + "/v1beta/models/" + settings_.model + ":generateContent";
  const auto result = post_json(url, build_body(request),
                                {{"x-goog-api-key", settings_.api_key}}, settings_.timeout);
  auto response = parse_body(result.body);
  response.latency_s = result.latency_s;
  response.provider_id = id();
  return response;
}

// --- ChatCompletionsProvider ------------------------------------------------

ChatCompletionsProvider::ChatCompletionsProvider(RemoteSettings settings)
    : settings_(std::move(settings)) {
  settings_.base_url = trim_trailing_slash(settings_.base_url);
}

std::string ChatCompletionsProvider::build_body(const ProviderRequest& request,
                                                std::string_view model) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  for (const auto& image : request.images) {
    content.push_back(
        {{"type", "image_url"},
         {"image_url",
          {{"url", "data:" + image.media_type + ";base64," + detail::base64_encode(image.bytes)}}}});
  }
  const json body{{"model", model},
                  {"temperature", request.params.temperature},
                  {"max_tokens", request.params.max_output_tokens},
                  {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
  return body.dump();
}

ProviderResponse ChatCompletionsProvider::parse_body(std::string_view body) {
  ProviderResponse response;
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Kind::transient,
                        std::string("malformed provider response: ") + e.what());
  }
  if (!doc.contains("choices") || doc["choices"].empty()) {
    throw ProviderError(ProviderError::Kind::transient, "provider response has no choices");
  }
  const auto& choice = doc["choices"][0];
  const auto& message = choice.value("message", json::object());
  if (choice.value("finish_reason", std::string()) == "content_filter" ||
      (message.contains("refusal") && !message["refusal"].is_null())) {
    response.blocked = true;
    return response;
  }
  if (message.contains("content") && message["content"].is_string()) {
    response.text = message["content"].get<std::string>();
  }
  return response;
}

ProviderResponse ChatCompletionsProvider::generate(const ProviderRequest& request) {
  require_key(settings_);
  const auto result = post_json(settings_.base_url + "/v1/chat/completions",
                                build_body(request, settings_.model),
                                {{"Authorization", "Bearer " + settings_.api_key}},
                                settings_.timeout);
  auto response = parse_body(result.body);
  response.latency_s = result.latency_s;
  response.provider_id = id();
  return response;
}

// --- RateLimiter / ResilientProvider ----------------------------------------

RateLimiter::RateLimiter(double per_second) {
  if (per_second > 0) {
    interval_ = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(1.0 / per_second));
  }
}

void RateLimiter::acquire() {
  if (interval_ == Clock::duration::zero()) return;
  Clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = Clock::now();
    slot = next_ && *next_ > now ? *next_ : now;
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt,
                                        std::mt19937_64& rng) {
  const double nominal = std::min(
      static_cast<double>(policy.max_backoff.count()),
      static_cast<double>(policy.initial_backoff.count()) * std::ldexp(1.0, std::max(0, attempt - 1)));
  std::uniform_real_distribution<double> jitter(1.0 - policy.jitter, 1.0 + policy.jitter);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(nominal * jitter(rng))));
}

ResilientProvider::ResilientProvider(std::shared_ptr<Provider> inner, RetryPolicy policy,
                                     std::shared_ptr<RateLimiter> limiter, Sleeper sleeper)
    : inner_(std::move(inner)),
      policy_(policy),
      limiter_(std::move(limiter)),
      sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

ProviderResponse ResilientProvider::generate(const ProviderRequest& request) {
  for (int attempt = 1;; ++attempt) {
    if (limiter_) limiter_->acquire();
    try {
      auto response = inner_->generate(request);
      response.attempts = attempt;
      return response;
    } catch (const ProviderError& e) {
      if (e.kind() != ProviderError::Kind::transient) throw;
      if (attempt >= policy_.max_attempts) {
        throw ProviderError(ProviderError::Kind::exhausted,
                            "gave up after " + std::to_string(attempt) + " attempts: " + e.what());
      }
      std::chrono::milliseconds delay;
      {
        std::lock_guard lock(rng_mutex_);
        delay = backoff_delay(policy_, attempt, rng_);
      }
      sleeper_(delay);
    }
  }
}

// --- collage ----------------------------------------------------------------

std::vector<PixelRect> collage_tiles(std::size_t count, int columns, ImageSize tile) {
  if (columns <= 0) throw PreconditionError("collage needs at least one column");
  std::vector<PixelRect> rects;
  rects.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int col = static_cast<int>(i % static_cast<std::size_t>(columns));
    const int row = static_cast<int>(i / static_cast<std::size_t>(columns));
    rects.push_back({col * tile.width, row * tile.height, tile.width, tile.height});
  }
  return rects;
}

ImagePayload build_collage(std::span<const FrameSample> frames, int columns) {
  if (frames.empty()) throw PreconditionError("collage needs at least one frame");
  if (columns <= 0) throw PreconditionError("collage needs at least one column");

  std::vector<cv::Mat> tiles;
  tiles.reserve(frames.size());
  for (const auto& frame : frames) tiles.push_back(detail::decode_image(frame.image));
  const cv::Size tile_size = tiles.front().size();
  for (const auto& t : tiles) {
    if (t.size() != tile_size) throw PreconditionError("collage frames have mixed dimensions");
  }

  const int cols = std::min<int>(columns, static_cast<int>(frames.size()));
  const int rows = static_cast<int>((frames.size() + cols - 1) / cols);
  cv::Mat canvas(rows * tile_size.height, cols * tile_size.width, CV_8UC3, cv::Scalar::all(0));
  const auto rects = collage_tiles(frames.size(), cols, {tile_size.width, tile_size.height});

  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& r = rects[i];
    cv::Mat roi = canvas(cv::Rect(r.x, r.y, r.width, r.height));
    tiles[i].copyTo(roi);

    const std::string label = std::to_string(frames[i].frame_number);
    const double scale = std::max(0.3, tile_size.height / 240.0);
    int baseline = 0;
    const cv::Size text = cv::getTextSize(label, cv::FONT_HERSHEY_SIMPLEX, scale, 1, &baseline);
    const cv::Rect box(0, 0, std::min(text.width + 4, r.width),
                       std::min(text.height + baseline + 4, r.height));
    cv::rectangle(roi, box, cv::Scalar::all(0), cv::FILLED);
    cv::putText(roi, label, cv::Point(2, text.height + 2), cv::FONT_HERSHEY_SIMPLEX, scale,
                cv::Scalar::all(255), 1, cv::LINE_AA);
  }
  return detail::encode_image(canvas, "image/png");
}

}  // namespace vidsum
