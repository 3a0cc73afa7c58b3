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

// vidsum-frames: the bundled external decoder.
//
//   vidsum-frames probe <video>
//   vidsum-frames extract <video> <rate> <outdir>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/videoio.hpp>

#include "json.hpp"
#include "vidsum/config.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/ingest.hpp"

namespace {

int usage() {
  std::cerr << "usage: vidsum-frames probe <video>\n"
               "       vidsum-frames extract <video> <rate> <outdir>\n";
  return 2;
}

cv::VideoCapture open(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw vidsum::DecodeError("no such file: " + path);
  cv::VideoCapture cap(path, cv::CAP_FFMPEG);
  if (!cap.isOpened()) throw vidsum::DecodeError("cannot decode " + path);
  return cap;
}

vidsum::VideoInfo probe(const std::string& path) {
  auto cap = open(path);
  vidsum::VideoInfo info;
  info.fps = cap.get(cv::CAP_PROP_FPS);
  info.frame_count = static_cast<std::int64_t>(cap.get(cv::CAP_PROP_FRAME_COUNT));
  if (info.fps <= 0) throw vidsum::DecodeError(path + ": container reports no frame rate");
  if (info.frame_count <= 0) {
    // Some containers omit the count; decode through once.
    info.frame_count = 0;
    while (cap.grab()) ++info.frame_count;
  }
  if (info.frame_count == 0) throw vidsum::DecodeError(path + ": no decodable frames");
  return info;
}

int extract(const std::string& path, const std::string& rate_text, const std::string& outdir) {
  const auto rate = vidsum::Rational::parse(rate_text);
  const auto info = probe(path);
  const auto indices = vidsum::sample_frame_indices(info, rate);
  std::filesystem::create_directories(outdir);

  auto cap = open(path);
  cv::Mat frame;
  std::int64_t position = 0;
  std::size_t written = 0;
  for (const auto wanted : indices) {
    while (position <= wanted) {
      if (!cap.grab()) {
        std::cerr << "vidsum-frames: " << path << " ended at frame " << position << "\n";
        return written > 0 ? 0 : 1;
      }
      ++position;
    }
    if (!cap.retrieve(frame) || frame.empty()) {
      throw vidsum::DecodeError(path + ": cannot decode frame " + std::to_string(wanted));
    }
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.png", written);
    if (!cv::imwrite((std::filesystem::path(outdir) / name).string(), frame)) {
      throw vidsum::DecodeError("cannot write " + std::string(name) + " in " + outdir);
    }
    ++written;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const std::string command = argc > 1 ? argv[1] : "";
    if (command == "probe" && argc == 3) {
      const auto info = probe(argv[2]);
      std::cout << nlohmann::json{{"fps", info.fps}, {"frame_count", info.frame_count}}.dump() << "\n";
      return 0;
    }
    if (command == "extract" && argc == 5) return extract(argv[2], argv[3], argv[4]);
    return usage();
  } catch (const std::exception& e) {
    std::cerr << "vidsum-frames: " << e.what() << "\n";
    return 1;
  }
}
