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

#include <memory>
#include <string>
#include <string_view>

#include "vidsum/config.hpp"
#include "vidsum/vlm.hpp"

namespace vidsum {

inline constexpr std::string_view kApiKeyVariable = "VIDSUM_API_KEY";
inline constexpr std::string_view kGeminiBaseUrl = "https://generativelanguage.googleapis.com";
inline constexpr std::string_view kChatBaseUrl = "https://api.openai.com";

struct ProviderOptions {
  std::string base_url;  // empty: the provider's public endpoint
  /// Shared by every provider built with these options; null builds one
  /// from config.requests_per_second.
  std::shared_ptr<RateLimiter> limiter;
};

/// Builds a provider from a spec string:
///
///   mock:<fixture.json>   MockProvider over the fixture
///   echo                  replies with its prompt
///   gemini:<model>        generateContent API
///   chat:<model>          chat-completions API
///
/// Every provider comes wrapped in retries and rate limiting from `config`.
/// Remote providers read the API key from VIDSUM_API_KEY and throw
/// PreconditionError at once when it is unset.
std::shared_ptr<Provider> make_provider(std::string_view spec, const PipelineConfig& config,
                                        const ProviderOptions& options = {});

}  // namespace vidsum
