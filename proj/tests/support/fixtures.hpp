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
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vidsum/ingest.hpp"

namespace vidsum::testing {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(std::string_view name) const { return path_ / name; }

 private:
  fs::path path_;
};

/// Checked-in fixtures (tests/fixtures).
fs::path fixtures_dir();
/// Directory holding the built executables.
fs::path bin_dir();

std::string read_text(const fs::path& path);
void write_text(const fs::path& path, std::string_view text);

/// `count` stills named <n padded to stem_width>.<ext>. Each has its own
/// background shade and its number drawn on it; frames in `marked` also
/// carry a pure red square, which the marker test detector reports as a
/// person.
void write_frame_sequence(const fs::path& dir, int count, const std::set<std::uint64_t>& marked = {},
                          int width = 160, int height = 120, std::string_view ext = ".png",
                          int stem_width = 3);

/// Where write_frame_sequence puts the red square.
struct MarkerBox {
  int x, y, width, height;
};
MarkerBox marker_box(int width, int height);

/// The same stills as write_frame_sequence, encoded as PNG in memory and
/// timestamped at one sample per second.
std::vector<FrameSample> synthetic_samples(int count, const std::set<std::uint64_t>& marked = {},
                                           int width = 160, int height = 120);

/// Motion-JPEG AVI of `frame_count` frames at `fps`.
void write_clip(const fs::path& path, int frame_count, double fps, int width = 96, int height = 72);

/// Mock detector fixture with one `label` detection on each frame of `frames`.
std::string detection_fixture(const std::set<std::uint64_t>& frames, std::string_view label = "person",
                              double confidence = 0.9);

/// Rendered reports with the fields that legitimately differ between two
/// runs over the same input removed: run id, creation time, latencies and
/// the timing section.
std::string normalise_json_report(std::string_view text);
std::string normalise_markdown_report(std::string_view text, std::string_view run_id);

}  // namespace vidsum::testing
