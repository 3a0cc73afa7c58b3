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

// vidsum-detect-hog: an external detector for the exec: backend.
//
//   vidsum-detect-hog <image>
//
// Runs OpenCV's HOG pedestrian detector and prints the detection wire
// format. HOG scores are SVM margins, so they are squashed through a
// logistic function to land in [0, 1].

#include <algorithm>
#include <cmath>
#include <iostream>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/objdetect.hpp>

#include "vidsum/gate.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: vidsum-detect-hog <image>\n";
    return 2;
  }
  const cv::Mat image = cv::imread(argv[1], cv::IMREAD_COLOR);
  if (image.empty()) {
    std::cerr << "vidsum-detect-hog: cannot read " << argv[1] << "\n";
    return 1;
  }

  cv::HOGDescriptor hog;
  hog.setSVMDetector(cv::HOGDescriptor::getDefaultPeopleDetector());
  std::vector<cv::Rect> boxes;
  std::vector<double> weights;
  if (image.cols >= hog.winSize.width && image.rows >= hog.winSize.height) {
    hog.detectMultiScale(image, boxes, weights);
  }

  std::vector<vidsum::Detection> detections;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const cv::Rect r = boxes[i] & cv::Rect(0, 0, image.cols, image.rows);
    if (r.area() == 0) continue;
    vidsum::Detection d;
    d.label = "person";
    d.confidence = 1.0 / (1.0 + std::exp(-(i < weights.size() ? weights[i] : 0.0)));
    d.bbox = {static_cast<double>(r.x), static_cast<double>(r.y), static_cast<double>(r.x + r.width),
              static_cast<double>(r.y + r.height)};
    detections.push_back(d);
  }
  std::cout << vidsum::serialize_detections(detections) << "\n";
  return 0;
}
