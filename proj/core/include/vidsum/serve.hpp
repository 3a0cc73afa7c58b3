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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "vidsum/vlm.hpp"

namespace vidsum {

struct ServeOptions {
  std::filesystem::path data_root;
  /// Answers POSTed queries; without one the query endpoint returns 503.
  std::shared_ptr<Provider> text_provider;
  /// Static files mounted at "/", e.g. a built analyst console.
  std::optional<std::filesystem::path> ui_dir;
  std::string host = "127.0.0.1";
};

/// Local HTTP/JSON service over a data root (endpoint list in
/// docs/serve-api.md). Read-only apart from query submission, which is
/// serialised per run and appended to the run's query log.
class Server {
 public:
  explicit Server(ServeOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds `port`, or any free port when 0. Returns the bound port; throws
  /// Error when the port is unavailable.
  int bind(int port);
  /// Serves until stop(). Call after bind().
  void listen();
  /// bind() then listen() on a background thread.
  int start(int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace vidsum
