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

#include "fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include "json.hpp"

namespace vidsum::testing {

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (;;) {
    auto candidate = fs::temp_directory_path() /
                     ("vidsum-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path fixtures_dir() { return VIDSUM_TEST_FIXTURES; }
fs::path bin_dir() { return VIDSUM_BIN_DIR; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

MarkerBox marker_box(int width, int height) {
  return {width / 4, height / 4, width / 5, height / 3};
}

namespace {

cv::Mat frame_image(int index, bool marked, int width, int height) {
  cv::Mat img(height, width, CV_8UC3,
              cv::Scalar(40 + (index * 37) % 160, 60 + (index * 23) % 140, 30 + (index * 11) % 90));
  cv::putText(img, std::to_string(index), cv::Point(width / 2, height - 10),
              cv::FONT_HERSHEY_SIMPLEX, 0.6, cv::Scalar(255, 255, 255), 1);
  if (marked) {
    const auto m = marker_box(width, height);
    cv::rectangle(img, cv::Rect(m.x, m.y, m.width, m.height), cv::Scalar(0, 0, 255), cv::FILLED);
  }
  return img;
}

}  // namespace

void write_frame_sequence(const fs::path& dir, int count, const std::set<std::uint64_t>& marked,
                          int width, int height, std::string_view ext, int stem_width) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "%0*d", stem_width, i);
    const auto path = dir / (std::string(stem) + std::string(ext));
    const bool ok = cv::imwrite(path.string(), frame_image(i, marked.contains(i), width, height));
    if (!ok) throw std::runtime_error("cannot write " + path.string());
  }
}

std::vector<FrameSample> synthetic_samples(int count, const std::set<std::uint64_t>& marked,
                                           int width, int height) {
  std::vector<FrameSample> out;
  for (int i = 0; i < count; ++i) {
    FrameSample s;
    s.frame_number = static_cast<std::uint64_t>(i);
    s.timestamp_s = i;
    cv::imencode(".png", frame_image(i, marked.contains(i), width, height), s.image.bytes);
    s.image.media_type = "image/png";
    out.push_back(std::move(s));
  }
  return out;
}

void write_clip(const fs::path& path, int frame_count, double fps, int width, int height) {
  cv::VideoWriter writer(path.string(), cv::CAP_FFMPEG, cv::VideoWriter::fourcc('M', 'J', 'P', 'G'), fps,
                         cv::Size(width, height));
  if (!writer.isOpened()) throw std::runtime_error("cannot open video writer for " + path.string());
  for (int i = 0; i < frame_count; ++i) writer.write(frame_image(i, false, width, height));
}

std::string detection_fixture(const std::set<std::uint64_t>& frames, std::string_view label,
                              double confidence) {
  nlohmann::json by_frame = nlohmann::json::object();
  for (auto f : frames) {
    by_frame[std::to_string(f)] = nlohmann::json::array(
        {{{"label", label}, {"confidence", confidence}, {"bbox", {10, 10, 50, 60}}}});
  }
  return nlohmann::json{{"default", nlohmann::json::array()}, {"frames", by_frame}}.dump(2);
}

namespace {

void strip_volatile(nlohmann::json& j) {
  if (j.is_object()) {
    for (const char* key : {"run_id", "created_at", "latency_s", "stats", "title"}) j.erase(key);
    for (auto& [key, value] : j.items()) strip_volatile(value);
  } else if (j.is_array()) {
    for (auto& value : j) strip_volatile(value);
  }
}

}  // namespace

std::string normalise_json_report(std::string_view text) {
  auto j = nlohmann::json::parse(text);
  strip_volatile(j);
  return j.dump(2);
}

std::string normalise_markdown_report(std::string_view text, std::string_view run_id) {
  std::string out(text.substr(0, text.find("## Timing")));
  for (auto pos = out.find(run_id); !run_id.empty() && pos != std::string::npos;
       pos = out.find(run_id, pos)) {
    out.replace(pos, run_id.size(), "<run>");
  }
  return out;
}

}  // namespace vidsum::testing
