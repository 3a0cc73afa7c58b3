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

#include "vidsum/gate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "encoding.hpp"
#include "httplib.h"
#include "json.hpp"
#include "process.hpp"
#include "url.hpp"
#include "vidsum/errors.hpp"

namespace vidsum {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

Detection detection_from_json(const json& item) {
  Detection det;
  det.label = item.at("label").get<std::string>();
  det.confidence = item.at("confidence").get<double>();
  const auto box = item.at("bbox").get<std::vector<double>>();
  if (box.size() != 4) throw DetectorError("bbox must have four components");
  det.bbox = {box[0], box[1], box[2], box[3]};
  if (det.label.empty()) throw DetectorError("detection label is empty");
  if (!(det.confidence >= 0.0 && det.confidence <= 1.0)) {
    throw DetectorError("detection confidence outside [0, 1]");
  }
  if (!(det.bbox.x_min < det.bbox.x_max && det.bbox.y_min < det.bbox.y_max) ||
      det.bbox.x_min < 0 || det.bbox.y_min < 0) {
    throw DetectorError("detection bbox is degenerate or negative");
  }
  return det;
}

std::vector<Detection> detections_from_json(const json& doc) {
  const json& list = doc.is_object() ? doc.at("detections") : doc;
  if (!list.is_array()) throw DetectorError("detections must be an array");
  std::vector<Detection> out;
  out.reserve(list.size());
  for (const auto& item : list) out.push_back(detection_from_json(item));
  return out;
}

}  // namespace

std::vector<Detection> parse_detections(std::string_view text) {
  try {
    return detections_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw DetectorError(std::string("malformed detector output: ") + e.what());
  }
}

std::string serialize_detections(std::span<const Detection> detections) {
  json list = json::array();
  for (const auto& d : detections) {
    list.push_back({{"label", d.label},
                    {"confidence", d.confidence},
                    {"bbox", {d.bbox.x_min, d.bbox.y_min, d.bbox.x_max, d.bbox.y_max}}});
  }
  return json{{"detections", list}}.dump();
}

MockDetector MockDetector::from_file(const fs::path& fixture) {
  return from_json(detail::read_file(fixture.string()));
}

MockDetector MockDetector::from_json(std::string_view fixture) {
  MockDetector mock;
  try {
    const auto doc = json::parse(fixture);
    if (doc.contains("default")) mock.default_ = detections_from_json(doc.at("default"));
    if (doc.contains("frames")) {
      for (const auto& [key, value] : doc.at("frames").items()) {
        mock.frames_[std::stoull(key)] = detections_from_json(value);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed detection fixture: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("detection fixture frame keys must be integers");
  }
  return mock;
}

std::vector<Detection> MockDetector::detect(const FrameSample& frame) {
  auto it = frames_.find(frame.frame_number);
  return it != frames_.end() ? it->second : default_;
}

ProcessDetector::ProcessDetector(std::vector<std::string> argv_template, fs::path scratch_dir)
    : argv_template_(std::move(argv_template)), scratch_dir_(std::move(scratch_dir)) {
  if (argv_template_.empty()) throw PreconditionError("detector command is empty");
}

std::vector<Detection> ProcessDetector::detect(const FrameSample& frame) {
  fs::path image_path = frame.source_path;
  if (image_path.empty()) {
    fs::create_directories(scratch_dir_);
    image_path = scratch_dir_ / ("detect-" + std::to_string(frame.frame_number) +
                                 extension_for(frame.image.media_type));
    write_image_file(image_path, frame.image);
  }
  std::vector<std::string> argv = argv_template_;
  bool substituted = false;
  for (auto& arg : argv) {
    if (arg == "{image}") {
      arg = image_path.string();
      substituted = true;
    }
  }
  if (!substituted) argv.push_back(image_path.string());

  detail::ProcessResult result;
  try {
    result = detail::run_process(argv);
  } catch (const Error& e) {
    throw DetectorError(std::string("detector unavailable: ") + e.what());
  }
  if (result.exit_code != 0) {
    throw DetectorError("detector exited with status " + std::to_string(result.exit_code) +
                        " on frame " + std::to_string(frame.frame_number));
  }
  return parse_detections(result.out);
}

HttpDetector::HttpDetector(std::string url) : url_(std::move(url)) {}

std::vector<Detection> HttpDetector::detect(const FrameSample& frame) {
  const auto target = detail::split_url(url_);
  httplib::Client client(target.origin);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  const json body{{"frame_number", frame.frame_number},
                  {"image",
                   {{"mime_type", frame.image.media_type},
                    {"data", detail::base64_encode(frame.image.bytes)}}}};
  auto res = client.Post(target.path, body.dump(), "application/json");
  if (!res) {
    throw DetectorError("detector unavailable at " + url_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw DetectorError("detector at " + url_ + " returned HTTP " + std::to_string(res->status));
  }
  return parse_detections(res->body);
}

std::unique_ptr<DetectorBackend> make_detector(std::string_view spec, const fs::path& scratch_dir) {
  if (spec.starts_with("mock:")) {
    return std::make_unique<MockDetector>(MockDetector::from_file(std::string(spec.substr(5))));
  }
  if (spec.starts_with("exec:")) {
    std::istringstream words{std::string(spec.substr(5))};
    std::vector<std::string> argv;
    for (std::string w; words >> w;) argv.push_back(w);
    return std::make_unique<ProcessDetector>(std::move(argv), scratch_dir);
  }
  if (spec.starts_with("http://") || spec.starts_with("https://")) {
    return std::make_unique<HttpDetector>(std::string(spec));
  }
  throw PreconditionError("unknown detector spec '" + std::string(spec) +
                          "' (expected mock:<file>, exec:<command> or an http(s) URL)");
}

GateDecision apply_gate(std::span<const Detection> detections, const PipelineConfig& config,
                        std::uint64_t frame_number) {
  GateDecision decision;
  decision.frame_number = frame_number;
  for (const auto& det : detections) {
    if (config.target_labels.contains(det.label) && det.confidence >= config.gate_confidence) {
      decision.detections.push_back(det);
    }
  }
  decision.passed = !decision.detections.empty();
  return decision;
}

PixelRect crop_rect(const BoundingBox& bbox, ImageSize image, double margin_frac) {
  if (margin_frac < 0) throw PreconditionError("crop margin must be >= 0");
  const double w = bbox.x_max - bbox.x_min;
  const double h = bbox.y_max - bbox.y_min;
  if (!(w > 0 && h > 0)) throw PreconditionError("degenerate (zero-area) bounding box");
  if (bbox.x_min < 0 || bbox.y_min < 0 || bbox.x_max > image.width || bbox.y_max > image.height) {
    throw PreconditionError("bounding box lies outside the image");
  }
  const double x0 = std::max(0.0, bbox.x_min - margin_frac * w);
  const double y0 = std::max(0.0, bbox.y_min - margin_frac * h);
  const double x1 = std::min(static_cast<double>(image.width), bbox.x_max + margin_frac * w);
  const double y1 = std::min(static_cast<double>(image.height), bbox.y_max + margin_frac * h);
  const int px0 = static_cast<int>(std::floor(x0));
  const int py0 = static_cast<int>(std::floor(y0));
  const int px1 = static_cast<int>(std::ceil(x1));
  const int py1 = static_cast<int>(std::ceil(y1));
  if (px1 <= px0 || py1 <= py0) throw PreconditionError("degenerate (zero-area) bounding box");
  return PixelRect{px0, py0, px1 - px0, py1 - py0};
}

ImagePayload crop(const FrameSample& frame, const Detection& det, double margin_frac) {
  const auto size = image_size(frame.image);
  return crop_image(frame.image, crop_rect(det.bbox, size, margin_frac));
}

}  // namespace vidsum
