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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vidsum::detail {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
};

/// fork/exec `argv` (PATH lookup on argv[0]); stdout captured, stderr inherited.
/// Throws Error when the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv);

/// Directory holding the running executable, for sibling-tool lookup.
std::string self_directory();

}  // namespace vidsum::detail
