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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vidsum/config.hpp"
#include "vidsum/image.hpp"
#include "vidsum/ingest.hpp"

namespace vidsum {

struct BoundingBox {
  double x_min = 0;
  double y_min = 0;
  double x_max = 0;
  double y_max = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct Detection {
  std::string label;
  double confidence = 0.0;
  BoundingBox bbox;
  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GateDecision {
  std::uint64_t frame_number = 0;
  bool passed = false;  // == !detections.empty()
  std::vector<Detection> detections;
};

/// Parses the detector wire format: either {"detections": [...]} or a bare
/// array of {"label", "confidence", "bbox": [x_min, y_min, x_max, y_max]}.
/// Throws DetectorError on malformed output or broken invariants.
std::vector<Detection> parse_detections(std::string_view text);
std::string serialize_detections(std::span<const Detection> detections);

/// Object detector behind the gate. Implementations must tolerate
/// concurrent detect() calls.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  /// All detections for the frame, unfiltered.
  virtual std::vector<Detection> detect(const FrameSample& frame) = 0;
};

/// Fixture-driven detector:
///   {"default": [...], "frames": {"5": [{"label": "person", ...}], ...}}
class MockDetector : public DetectorBackend {
 public:
  static MockDetector from_file(const std::filesystem::path& fixture);
  static MockDetector from_json(std::string_view fixture);

  std::vector<Detection> detect(const FrameSample& frame) override;

 private:
  std::vector<Detection> default_;
  std::map<std::uint64_t, std::vector<Detection>> frames_;
};

/// Runs an external detector per frame. `argv_template` elements equal to
/// "{image}" are replaced by the path of the frame's still; the program
/// prints the detector wire format on stdout.
class ProcessDetector : public DetectorBackend {
 public:
  ProcessDetector(std::vector<std::string> argv_template, std::filesystem::path scratch_dir);
  std::vector<Detection> detect(const FrameSample& frame) override;

 private:
  std::vector<std::string> argv_template_;
  std::filesystem::path scratch_dir_;
};

/// POSTs {"frame_number", "image": {"mime_type", "data"}} (base64 data) to
/// `url` and parses the detector wire format from the response body.
class HttpDetector : public DetectorBackend {
 public:
  explicit HttpDetector(std::string url);
  std::vector<Detection> detect(const FrameSample& frame) override;

 private:
  std::string url_;
};

/// "mock:<fixture>", "exec:<command line>", "http://..." or "https://...".
std::unique_ptr<DetectorBackend> make_detector(std::string_view spec,
                                               const std::filesystem::path& scratch_dir);

/// Keeps detections whose label is a target and whose confidence is at or
/// above gate_confidence (inclusive). Pure.
GateDecision apply_gate(std::span<const Detection> detections, const PipelineConfig& config,
                        std::uint64_t frame_number);

/// bbox grown by margin_frac of its width/height on each side, clamped to
/// the image, rounded outward to whole pixels.
PixelRect crop_rect(const BoundingBox& bbox, ImageSize image, double margin_frac);

/// Sub-image around `det`. Throws PreconditionError for a zero-area box or
/// one outside the image.
ImagePayload crop(const FrameSample& frame, const Detection& det, double margin_frac);

}  // namespace vidsum
