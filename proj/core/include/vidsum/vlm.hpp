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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidsum/config.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/image.hpp"
#include "vidsum/ingest.hpp"

namespace vidsum {

struct ProviderRequest {
  std::vector<ImagePayload> images;  // empty for text-only calls
  std::string prompt;
  GenerationParams params;
  /// Source frame of each image, ascending. Context for mocks and logs; the
  /// remote wire formats do not carry it.
  std::vector<std::uint64_t> frame_numbers;
};

struct ProviderResponse {
  std::string text;
  double latency_s = 0.0;  // network call only, successful attempt
  bool blocked = false;    // safety refusal; text is empty
  std::string provider_id;
  int attempts = 1;
};

class ProviderError : public Error {
 public:
  enum class Kind { transient, authentication, invalid_request, exhausted };

  ProviderError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A vision-language or text-generation backend. Implementations are
/// thread-safe.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderResponse generate(const ProviderRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Checks request invariants; throws PreconditionError.
void validate_request(const ProviderRequest& request);

/// Vision call over one frame, a frame sequence or a collage.
ProviderResponse describe(Provider& provider, const ProviderRequest& request);

/// Text-only call.
ProviderResponse generate_text(Provider& provider, std::string prompt,
                               const GenerationParams& params);

/// Fixture-driven provider. Fixture document:
///
///   {
///     "provider_id": "mock",            // optional
///     "default": "text",                // unmatched requests
///     "echo": false,                    // true: reply with the prompt
///     "fail_first": 0,                  // scripted transient failures
///     "failure_kind": "transient",      // or "authentication"
///     "frames": {"15": "text"},         // keyed on the first frame number
///     "responses": [                    // checked first, in order
///       {"frame": 15, "prompt_contains": "accident", "text": "..."},
///       {"prompt_sha256": "<hex>", "text": "..."},
///       {"frame": 3, "blocked": true}
///     ]
///   }
///
/// Safety settings and temperature are recorded but ignored.
class MockProvider : public Provider {
 public:
  struct Rule {
    std::optional<std::uint64_t> frame;
    std::optional<std::string> prompt_contains;
    std::optional<std::string> prompt_sha256;
    std::string text;
    bool blocked = false;
  };

  static std::unique_ptr<MockProvider> from_file(const std::filesystem::path& fixture);
  static std::unique_ptr<MockProvider> from_json(std::string_view fixture);
  static std::unique_ptr<MockProvider> echo();

  ProviderResponse generate(const ProviderRequest& request) override;
  std::string id() const override { return id_; }

  /// Every generate() call, failed ones included.
  std::uint64_t call_count() const { return calls_.load(); }
  std::uint64_t success_count() const { return successes_.load(); }
  /// Most recent request; for tests.
  ProviderRequest last_request() const;

 private:
  std::string id_ = "mock";
  std::string default_text_;
  bool echo_ = false;
  std::uint64_t fail_first_ = 0;
  ProviderError::Kind failure_kind_ = ProviderError::Kind::transient;
  std::vector<Rule> rules_;
  std::map<std::uint64_t, std::string> frames_;
  std::atomic<std::uint64_t> calls_{0};
  std::atomic<std::uint64_t> successes_{0};
  mutable std::mutex last_mutex_;
  ProviderRequest last_;
};

struct RemoteSettings {
  std::string base_url;
  std::string model;
  std::string api_key;
  std::chrono::seconds timeout{120};
};

/// generateContent-style JSON API (see docs/provider-http.md).
class GeminiProvider : public Provider {
 public:
  explicit GeminiProvider(RemoteSettings settings);
  ProviderResponse generate(const ProviderRequest& request) override;
  std::string id() const override { return "gemini:" + settings_.model; }

  /// Request body for `request`; exposed for wire-format tests.
  static std::string build_body(const ProviderRequest& request);
  /// Parses a response body into text/blocked.
  static ProviderResponse parse_body(std::string_view body);

 private:
  RemoteSettings settings_;
};

/// Chat-completions-style JSON API with data-URI images.
class ChatCompletionsProvider : public Provider {
 public:
  explicit ChatCompletionsProvider(RemoteSettings settings);
  ProviderResponse generate(const ProviderRequest& request) override;
  std::string id() const override { return "chat:" + settings_.model; }

  static std::string build_body(const ProviderRequest& request, std::string_view model);
  static ProviderResponse parse_body(std::string_view body);

 private:
  RemoteSettings settings_;
};

/// Spaces request starts at least 1/per_second apart across all threads.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second);
  void acquire();

 private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_{};
  std::optional<std::chrono::steady_clock::time_point> next_;
};

/// Exponential backoff with jitter: initial * 2^(attempt-1), capped at
/// max_backoff, then scaled by a uniform factor in [1 - jitter, 1 + jitter].
std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt, std::mt19937_64& rng);

/// Decorator adding retries and shared rate limiting to any provider.
/// Transient errors are retried up to policy.max_attempts; authentication
/// and invalid-request errors are not.
class ResilientProvider : public Provider {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  ResilientProvider(std::shared_ptr<Provider> inner, RetryPolicy policy,
                    std::shared_ptr<RateLimiter> limiter = nullptr, Sleeper sleeper = {});

  ProviderResponse generate(const ProviderRequest& request) override;
  std::string id() const override { return inner_->id(); }

 private:
  std::shared_ptr<Provider> inner_;
  RetryPolicy policy_;
  std::shared_ptr<RateLimiter> limiter_;
  Sleeper sleeper_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_{0x5eedULL};
};

/// Tile geometry for build_collage: row-major, `columns` wide.
std::vector<PixelRect> collage_tiles(std::size_t count, int columns, ImageSize tile);

/// Tiles frames row-major in frame order into one PNG; each tile carries its
/// frame number in the top-left corner; unused tiles stay black. Throws
/// PreconditionError on an empty list or mixed dimensions.
ImagePayload build_collage(std::span<const FrameSample> frames, int columns);

}  // namespace vidsum
