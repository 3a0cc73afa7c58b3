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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vidsum/config.hpp"
#include "vidsum/image.hpp"

namespace vidsum {

struct FrameSample {
  std::uint64_t frame_number = 0;  // position in the sampled sequence, 0-based
  double timestamp_s = 0.0;        // frame_number / frame_rate
  ImagePayload image;
  std::filesystem::path source_path;  // still on disk the payload came from
};

/// timestamp_s for a sampled frame index at `rate`.
double sample_timestamp(std::uint64_t frame_number, const Rational& rate);

/// Pull-style ordered stream of samples.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<FrameSample> next() = 0;
  /// Duration of the underlying material in seconds, when known.
  virtual std::optional<double> duration_s() const { return std::nullopt; }
};

/// Pass-through over samples already in memory.
class VectorFrameSource : public FrameSource {
 public:
  explicit VectorFrameSource(std::vector<FrameSample> samples) : samples_(std::move(samples)) {}
  std::optional<FrameSample> next() override;

 private:
  std::vector<FrameSample> samples_;
  std::size_t cursor_ = 0;
};

struct VideoInfo {
  double fps = 0.0;
  std::int64_t frame_count = 0;
  double duration_s() const { return fps > 0 ? static_cast<double>(frame_count) / fps : 0.0; }
};

/// Native frame indices picked when sampling a clip of `info` at `rate`:
/// one per t = i / rate with t < duration, each the nearest native frame.
std::vector<std::int64_t> sample_frame_indices(const VideoInfo& info, const Rational& rate);

/// External decoder process. The program implements two subcommands:
///
///   <program> probe <video>
///       prints {"fps": <double>, "frame_count": <int>} on stdout
///   <program> extract <video> <rate> <outdir>
///       writes <outdir>/000000.png, 000001.png, ... one per sample, in
///       order, and exits 0
///
/// The bundled `vidsum-frames` tool implements this contract.
struct VideoDecoder {
  std::string program = "vidsum-frames";

  VideoInfo probe(const std::filesystem::path& video) const;
  void extract(const std::filesystem::path& video, const Rational& rate,
               const std::filesystem::path& out_dir) const;
};

/// Samples `source` at `rate` through `decoder`, caching stills under
/// `work_dir`. Errors: DecodeError for undecodable input or a rate above the
/// native frame rate.
std::unique_ptr<FrameSource> sample_video(const std::filesystem::path& source,
                                          const Rational& rate,
                                          const std::filesystem::path& work_dir,
                                          const VideoDecoder& decoder = {});

/// Numbered stills (e.g. 000.png .. 028.png) sorted by numeric stem and
/// renumbered densely from 0. Gaps in the numbering are logged to stderr.
std::unique_ptr<FrameSource> load_image_sequence(const std::filesystem::path& dir,
                                                 const Rational& rate);

struct SequenceEntry {
  std::uint64_t stem = 0;
  std::filesystem::path path;
};

/// Directory scan used by load_image_sequence. Throws DecodeError on an
/// empty directory or a non-numeric raster filename.
std::vector<SequenceEntry> scan_image_sequence(const std::filesystem::path& dir);

/// Stems missing between consecutive entries, e.g. {0, 2} -> {1}.
std::vector<std::uint64_t> sequence_gaps(const std::vector<SequenceEntry>& entries);

}  // namespace vidsum
