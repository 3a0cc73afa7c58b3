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

#include "vidsum/providers.hpp"

#include <cstdlib>

#include "vidsum/errors.hpp"

namespace vidsum {

std::shared_ptr<Provider> make_provider(std::string_view spec, const PipelineConfig& config,
                                        const ProviderOptions& options) {
  const auto colon = spec.find(':');
  const std::string_view kind = spec.substr(0, colon);
  const std::string arg(colon == std::string_view::npos ? std::string_view() : spec.substr(colon + 1));

  std::shared_ptr<Provider> inner;
  if (kind == "echo" && arg.empty()) {
    inner = MockProvider::echo();
  } else if (kind == "mock" && !arg.empty()) {
    inner = MockProvider::from_file(arg);
  } else if ((kind == "gemini" || kind == "chat") && !arg.empty()) {
    const char* key = std::getenv(std::string(kApiKeyVariable).c_str());
    if (!key || !*key) {
      throw PreconditionError("provider '" + std::string(spec) + "' needs an API key in " +
                              std::string(kApiKeyVariable));
    }
    RemoteSettings settings;
    settings.model = arg;
    settings.api_key = key;
    if (kind == "gemini") {
      settings.base_url = options.base_url.empty() ? std::string(kGeminiBaseUrl) : options.base_url;
      inner = std::make_shared<GeminiProvider>(std::move(settings));
    } else {
      settings.base_url = options.base_url.empty() ? std::string(kChatBaseUrl) : options.base_url;
      inner = std::make_shared<ChatCompletionsProvider>(std::move(settings));
    }
  } else {
    throw PreconditionError("unknown provider '" + std::string(spec) +
                            "' (mock:<fixture>, echo, gemini:<model>, chat:<model>)");
  }

  auto limiter = options.limiter ? options.limiter
                                 : std::make_shared<RateLimiter>(config.requests_per_second);
  return std::make_shared<ResilientProvider>(std::move(inner), config.retry, std::move(limiter));
}

}  // namespace vidsum
