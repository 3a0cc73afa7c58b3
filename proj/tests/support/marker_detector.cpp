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

// Test detector for the exec: backend: reports the bounding box of pure
// red pixels as one "person" detection.
//
//   vidsum-test-marker-detector <image>

#include <iostream>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "vidsum/gate.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: vidsum-test-marker-detector <image>\n";
    return 2;
  }
  const cv::Mat img = cv::imread(argv[1], cv::IMREAD_COLOR);
  if (img.empty()) {
    std::cerr << "cannot read " << argv[1] << "\n";
    return 1;
  }
  cv::Mat mask;
  cv::inRange(img, cv::Scalar(0, 0, 250), cv::Scalar(5, 5, 255), mask);
  std::vector<vidsum::Detection> detections;
  if (cv::countNonZero(mask) > 0) {
    const cv::Rect r = cv::boundingRect(mask);
    detections.push_back({"person", 0.9,
                          {double(r.x), double(r.y), double(r.x + r.width), double(r.y + r.height)}});
  }
  std::cout << vidsum::serialize_detections(detections) << "\n";
  return 0;
}
