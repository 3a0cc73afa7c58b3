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

#include <gtest/gtest.h>

#include <random>
#include <thread>

#include <opencv2/imgcodecs.hpp>

#include "encoding.hpp"
#include "fixtures.hpp"
#include "httplib.h"
#include "json.hpp"
#include "process.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/gate.hpp"

namespace vidsum {
namespace {

namespace fs = std::filesystem;

Detection det(std::string label, double confidence, BoundingBox box = {1, 1, 5, 5}) {
  return Detection{std::move(label), confidence, box};
}

PipelineConfig gate_config(double confidence, std::set<std::string> targets = {"person"}) {
  PipelineConfig c;
  c.gate_confidence = confidence;
  c.target_labels = std::move(targets);
  return c;
}

ImagePayload gradient_png(int width, int height) {
  cv::Mat img(height, width, CV_8UC3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img.at<cv::Vec3b>(y, x) = cv::Vec3b(x % 256, y % 256, (x + y) % 256);
  }
  std::vector<std::uint8_t> bytes;
  cv::imencode(".png", img, bytes);
  return {bytes, "image/png"};
}

FrameSample sample_of(ImagePayload image, std::uint64_t n = 0) {
  FrameSample s;
  s.frame_number = n;
  s.image = std::move(image);
  return s;
}

TEST(ApplyGate, Examples) {
  const auto pass = apply_gate(std::vector{det("person", 0.9)}, gate_config(0.5), 3);
  EXPECT_TRUE(pass.passed);
  EXPECT_EQ(pass.frame_number, 3u);

  EXPECT_FALSE(apply_gate(std::vector{det("car", 0.9)}, gate_config(0.5), 0).passed);

  const auto boundary =
      apply_gate(std::vector{det("person", 0.49), det("person", 0.51)}, gate_config(0.5), 0);
  EXPECT_TRUE(boundary.passed);
  ASSERT_EQ(boundary.detections.size(), 1u);
  EXPECT_DOUBLE_EQ(boundary.detections[0].confidence, 0.51);
}

TEST(ApplyGate, ThresholdIsInclusive) {
  EXPECT_TRUE(apply_gate(std::vector{det("person", 0.5)}, gate_config(0.5), 0).passed);
  EXPECT_FALSE(apply_gate(std::vector{det("person", std::nextafter(0.5, 0.0))}, gate_config(0.5), 0)
                   .passed);
}

TEST(ApplyGate, EmptyDetectionsFail) {
  const auto d = apply_gate(std::vector<Detection>{}, gate_config(0.0), 0);
  EXPECT_FALSE(d.passed);
  EXPECT_TRUE(d.detections.empty());
}

TEST(ApplyGate, PassedIffDetectionsAndMonotoneInThreshold) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const char* labels[] = {"person", "car", "dog"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Detection> dets;
    const int n = static_cast<int>(rng() % 5);
    for (int i = 0; i < n; ++i) dets.push_back(det(labels[rng() % 3], unit(rng)));
    const double hi = unit(rng);
    const double lo = hi * unit(rng);
    const auto a = apply_gate(dets, gate_config(hi, {"person", "dog"}), 1);
    const auto b = apply_gate(dets, gate_config(lo, {"person", "dog"}), 1);
    EXPECT_EQ(a.passed, !a.detections.empty());
    if (a.passed) EXPECT_TRUE(b.passed);
    for (const auto& d : a.detections) {
      EXPECT_GE(d.confidence, hi);
      EXPECT_NE(d.label, "car");
    }
    // Pure: same inputs, same decision.
    const auto again = apply_gate(dets, gate_config(hi, {"person", "dog"}), 1);
    EXPECT_EQ(again.detections, a.detections);
  }
}

TEST(DetectionWireFormat, BothShapesParse) {
  const auto wrapped = parse_detections(
      R"({"detections": [{"label": "person", "confidence": 0.9, "bbox": [1, 2, 30, 40]}]})");
  const auto bare = parse_detections(R"([{"label": "person", "confidence": 0.9, "bbox": [1, 2, 30, 40]}])");
  ASSERT_EQ(wrapped.size(), 1u);
  EXPECT_EQ(wrapped, bare);
  EXPECT_EQ(wrapped[0].bbox, (BoundingBox{1, 2, 30, 40}));
  EXPECT_EQ(parse_detections(serialize_detections(wrapped)), wrapped);
  EXPECT_TRUE(parse_detections("[]").empty());
}

TEST(DetectionWireFormat, MalformedOrInvalidIsDetectorError) {
  EXPECT_THROW(parse_detections("nope"), DetectorError);
  EXPECT_THROW(parse_detections(R"([{"label": "person", "confidence": 1.5, "bbox": [0, 0, 1, 1]}])"),
               DetectorError);
  EXPECT_THROW(parse_detections(R"([{"label": "person", "confidence": 0.5, "bbox": [5, 0, 1, 1]}])"),
               DetectorError);
  EXPECT_THROW(parse_detections(R"([{"label": "person", "confidence": 0.5, "bbox": [0, 0, 1]}])"),
               DetectorError);
}

TEST(MockDetector, FixtureFrameAndDefault) {
  auto mock = MockDetector::from_json(R"({"default": [], "frames": {"5": [
      {"label": "person", "confidence": 0.9, "bbox": [10, 10, 40, 60]}]}})");
  const auto five = mock.detect(sample_of({}, 5));
  ASSERT_EQ(five.size(), 1u);
  EXPECT_EQ(five[0], (Detection{"person", 0.9, {10, 10, 40, 60}}));
  EXPECT_TRUE(mock.detect(sample_of(gradient_png(8, 8), 6)).empty());
}

TEST(MockDetector, SafeUnderConcurrentCalls) {
  auto mock = MockDetector::from_json(testing::detection_fixture({1, 3, 5, 7}));
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (std::uint64_t n = 0; n < 200; ++n) {
        const bool expected = n == 1 || n == 3 || n == 5 || n == 7;
        if (mock.detect(sample_of({}, n)).empty() == expected) ++mismatches;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST(ProcessDetector, MatchesTheBackendRunStandalone) {
  testing::TempDir dir;
  testing::write_frame_sequence(dir / "frames", 2, {1});
  const auto tool = (testing::bin_dir() / "vidsum-test-marker-detector").string();
  ProcessDetector detector({tool, "{image}"}, dir / "scratch");

  for (int n : {0, 1}) {
    const auto path = dir / "frames" / (n == 0 ? "000.png" : "001.png");
    const auto standalone = detail::run_process({tool, path.string()});
    ASSERT_EQ(standalone.exit_code, 0);
    const auto expected = parse_detections(standalone.out);
    FrameSample frame = sample_of(read_image_file(path), n);
    frame.source_path = path;
    EXPECT_EQ(detector.detect(frame), expected);
  }

  FrameSample marked = sample_of(read_image_file(dir / "frames" / "001.png"), 1);
  const auto found = detector.detect(marked);
  ASSERT_EQ(found.size(), 1u);
  const auto m = testing::marker_box(160, 120);
  EXPECT_EQ(found[0].label, "person");
  EXPECT_EQ(found[0].bbox, (BoundingBox{double(m.x), double(m.y), double(m.x + m.width),
                                        double(m.y + m.height)}));
}

TEST(ProcessDetector, FailuresAreDetectorErrors) {
  testing::TempDir dir;
  const auto frame = sample_of(gradient_png(16, 16), 0);
  ProcessDetector failing({"/bin/sh", "-c", "exit 3", "{image}"}, dir / "s1");
  EXPECT_THROW(failing.detect(frame), DetectorError);
  ProcessDetector garbage({"/bin/echo", "not-json", "{image}"}, dir / "s2");
  EXPECT_THROW(garbage.detect(frame), DetectorError);
  ProcessDetector missing({"/nonexistent/detector", "{image}"}, dir / "s3");
  EXPECT_THROW(missing.detect(frame), DetectorError);
}

TEST(HttpDetector, PostsTheImageAndParsesTheReply) {
  httplib::Server server;
  const auto image = gradient_png(12, 10);
  std::atomic<bool> image_ok{false};
  server.Post("/detect", [&](const httplib::Request& req, httplib::Response& res) {
    const auto body = nlohmann::json::parse(req.body);
    const auto bytes = detail::base64_decode(body["image"]["data"].get<std::string>());
    image_ok = bytes == image.bytes && body["image"]["mime_type"] == "image/png" &&
               body["frame_number"] == 4;
    res.set_content(R"({"detections": [{"label": "person", "confidence": 0.7, "bbox": [1, 1, 5, 5]}]})",
                    "application/json");
  });
  server.Post("/broken", [](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  auto detector = make_detector(base + "/detect", "unused");
  const auto found = detector->detect(sample_of(image, 4));
  ASSERT_EQ(found.size(), 1u);
  EXPECT_DOUBLE_EQ(found[0].confidence, 0.7);
  EXPECT_TRUE(image_ok.load());

  HttpDetector broken(base + "/broken");
  EXPECT_THROW(broken.detect(sample_of(image, 4)), DetectorError);

  server.stop();
  thread.join();
  HttpDetector gone(base + "/detect");
  EXPECT_THROW(gone.detect(sample_of(image, 4)), DetectorError);
}

TEST(MakeDetector, UnknownSpec) {
  EXPECT_THROW(make_detector("yolo", "x"), PreconditionError);
  EXPECT_THROW(make_detector("mock:/nonexistent.json", "x"), Error);
}

// Independent oracle: pixel column px belongs to the crop iff its unit
// square overlaps the clamped, expanded box.
PixelRect oracle_rect(const BoundingBox& b, ImageSize size, double margin) {
  const double w = b.x_max - b.x_min, h = b.y_max - b.y_min;
  const double x0 = b.x_min - margin * w, x1 = b.x_max + margin * w;
  const double y0 = b.y_min - margin * h, y1 = b.y_max + margin * h;
  int first_x = -1, last_x = -1, first_y = -1, last_y = -1;
  for (int px = 0; px < size.width; ++px) {
    if (px < x1 && px + 1 > x0) {
      if (first_x < 0) first_x = px;
      last_x = px;
    }
  }
  for (int py = 0; py < size.height; ++py) {
    if (py < y1 && py + 1 > y0) {
      if (first_y < 0) first_y = py;
      last_y = py;
    }
  }
  return {first_x, first_y, last_x - first_x + 1, last_y - first_y + 1};
}

TEST(CropRect, Examples) {
  EXPECT_EQ(crop_rect({25, 25, 75, 75}, {100, 100}, 0.0), (PixelRect{25, 25, 50, 50}));
  EXPECT_EQ(crop_rect({0, 0, 100, 100}, {100, 100}, 0.0), (PixelRect{0, 0, 100, 100}));
  // Near the right edge with a 10% margin: x grows 1.5 px each side and is
  // clamped at 100; y grows 3 px each side.
  EXPECT_EQ(crop_rect({85, 10, 100, 40}, {100, 100}, 0.1), (PixelRect{83, 7, 17, 36}));
  EXPECT_EQ(crop_rect({85, 10, 100, 40}, {100, 100}, 0.1),
            oracle_rect({85, 10, 100, 40}, {100, 100}, 0.1));
}

TEST(CropRect, MatchesPixelOverlapOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 3000; ++trial) {
    const ImageSize size{1 + static_cast<int>(rng() % 200), 1 + static_cast<int>(rng() % 200)};
    double xa = unit(rng) * size.width, xb = unit(rng) * size.width;
    double ya = unit(rng) * size.height, yb = unit(rng) * size.height;
    if (xa > xb) std::swap(xa, xb);
    if (ya > yb) std::swap(ya, yb);
    if (xb - xa < 1e-6 || yb - ya < 1e-6) continue;
    const double margin = unit(rng) * 0.5;
    const BoundingBox box{xa, ya, xb, yb};
    EXPECT_EQ(crop_rect(box, size, margin), oracle_rect(box, size, margin))
        << size.width << "x" << size.height << " " << xa << "," << ya << "," << xb << "," << yb
        << " m=" << margin;
  }
}

TEST(CropRect, DegenerateOrOutside) {
  EXPECT_THROW(crop_rect({10, 10, 10, 20}, {100, 100}, 0.1), PreconditionError);
  EXPECT_THROW(crop_rect({10, 10, 120, 20}, {100, 100}, 0.1), PreconditionError);
  EXPECT_THROW(crop_rect({10, 10, 20, 20}, {100, 100}, -0.1), PreconditionError);
}

TEST(Crop, IdentityAndHalfSize) {
  const auto image = gradient_png(100, 100);
  const auto frame = sample_of(image);
  const auto whole = crop(frame, det("person", 0.9, {0, 0, 100, 100}), 0.0);
  EXPECT_EQ(image_size(whole), (ImageSize{100, 100}));
  const cv::Mat a = cv::imdecode(image.bytes, cv::IMREAD_COLOR);
  const cv::Mat b = cv::imdecode(whole.bytes, cv::IMREAD_COLOR);
  EXPECT_EQ(cv::norm(a, b, cv::NORM_INF), 0.0);

  const auto half = crop(frame, det("person", 0.9, {25, 25, 75, 75}), 0.0);
  EXPECT_EQ(image_size(half), (ImageSize{50, 50}));
  EXPECT_EQ(half.media_type, "image/png");
  const cv::Mat c = cv::imdecode(half.bytes, cv::IMREAD_COLOR);
  EXPECT_EQ(cv::norm(a(cv::Rect(25, 25, 50, 50)), c, cv::NORM_INF), 0.0);

  EXPECT_THROW(crop(frame, det("person", 0.9, {5, 5, 5, 9}), 0.0), PreconditionError);
}

}  // namespace
}  // namespace vidsum
