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

#include <cmath>

#include <opencv2/imgcodecs.hpp>

#include "fixtures.hpp"
#include "process.hpp"
#include "vidsum/errors.hpp"
#include "vidsum/ingest.hpp"

namespace vidsum {
namespace {

namespace fs = std::filesystem;

std::vector<FrameSample> drain(FrameSource& source) {
  std::vector<FrameSample> out;
  while (auto s = source.next()) out.push_back(std::move(*s));
  return out;
}

// Background colour write_frame_sequence/write_clip give frame `k`.
cv::Vec3d expected_colour(int k) {
  return {40.0 + (k * 37) % 160, 60.0 + (k * 23) % 140, 30.0 + (k * 11) % 90};
}

// Synthetic frame among `candidates` whose background matches best.
int identify_frame(const ImagePayload& image, const std::vector<int>& candidates) {
  cv::Mat img = cv::imdecode(image.bytes, cv::IMREAD_COLOR);
  const cv::Scalar mean = cv::mean(img(cv::Rect(img.cols - 12, 2, 10, 10)));
  int best = -1;
  double best_dist = 1e18;
  for (int k : candidates) {
    const auto c = expected_colour(k);
    const double dist = std::hypot(mean[0] - c[0], mean[1] - c[1], mean[2] - c[2]);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

int identify_frame(const ImagePayload& image, int count) {
  std::vector<int> all(count);
  for (int k = 0; k < count; ++k) all[k] = k;
  return identify_frame(image, all);
}

TEST(SampleFrameIndices, NearestNativeFrameOracle) {
  for (double fps : {10.0, 25.0, 29.97}) {
    for (const char* r : {"1", "2", "0.5", "3/2"}) {
      const VideoInfo info{fps, 97};
      const Rational rate = Rational::parse(r);
      const auto got = sample_frame_indices(info, rate);
      std::vector<std::int64_t> want;
      for (int i = 0; static_cast<double>(i) / rate.value() < 97.0 / fps - 1e-12; ++i) {
        const double t = i / rate.value();
        std::int64_t best = 0;
        for (std::int64_t k = 1; k < 97; ++k) {
          if (std::abs(k / fps - t) < std::abs(best / fps - t) - 1e-12) best = k;
        }
        want.push_back(best);
      }
      ASSERT_EQ(got.size(), want.size()) << fps << " " << r;
      for (std::size_t i = 0; i < got.size(); ++i) {
        // Exact ties may resolve either way.
        EXPECT_NEAR(std::abs(got[i] / fps - i / rate.value()),
                    std::abs(want[i] / fps - i / rate.value()), 1e-9);
      }
    }
  }
}

TEST(SampleFrameIndices, CountBound) {
  for (std::int64_t frames : {1, 10, 29, 290, 1001}) {
    for (double fps : {1.0, 10.0, 24.0}) {
      for (const char* r : {"1", "0.5", "1/3"}) {
        const VideoInfo info{fps, frames};
        const Rational rate = Rational::parse(r);
        const double dr = info.duration_s() * rate.value();
        const auto n = static_cast<double>(sample_frame_indices(info, rate).size());
        EXPECT_TRUE(n == std::floor(dr) || n == std::floor(dr) + 1) << frames << " " << fps << " " << r;
      }
    }
  }
}

TEST(SampleVideo, TenFrameClipAtTwoFpsMatchesDecoderOutput) {
  testing::TempDir dir;
  testing::write_clip(dir / "clip.avi", 10, 10.0);

  // Oracle: run the decoder directly and count what it emits.
  const auto direct = detail::run_process({(testing::bin_dir() / "vidsum-frames").string(), "extract",
                                           (dir / "clip.avi").string(), "2",
                                           (dir / "direct").string()});
  ASSERT_EQ(direct.exit_code, 0);
  const auto emitted = static_cast<std::size_t>(
      std::distance(fs::directory_iterator(dir / "direct"), fs::directory_iterator{}));

  auto source = sample_video(dir / "clip.avi", Rational{2, 1}, dir / "work");
  const auto samples = drain(*source);
  EXPECT_EQ(samples.size(), emitted);
  ASSERT_GE(samples.size(), 2u);
  ASSERT_LE(samples.size(), 3u);
  EXPECT_DOUBLE_EQ(samples[0].timestamp_s, 0.0);
  EXPECT_DOUBLE_EQ(samples[1].timestamp_s, 0.5);
  EXPECT_EQ(identify_frame(samples[0].image, 10), 0);
  EXPECT_EQ(identify_frame(samples[1].image, 10), 5);
  ASSERT_TRUE(source->duration_s());
  EXPECT_DOUBLE_EQ(*source->duration_s(), 1.0);
}

TEST(SampleVideo, TwentyNineSecondClipAtOneFps) {
  testing::TempDir dir;
  testing::write_clip(dir / "clip.avi", 290, 10.0);
  auto source = sample_video(dir / "clip.avi", Rational{1, 1}, dir / "work");
  const auto samples = drain(*source);
  ASSERT_GE(samples.size(), 29u);
  ASSERT_LE(samples.size(), 30u);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(samples[i].frame_number, i);
    EXPECT_DOUBLE_EQ(samples[i].timestamp_s, static_cast<double>(i));
    const int native = static_cast<int>(10 * i);
    std::vector<int> neighbours{native};
    if (native > 0) neighbours.push_back(native - 1);
    if (native < 289) neighbours.push_back(native + 1);
    EXPECT_EQ(identify_frame(samples[i].image, neighbours), native);
  }
}

TEST(SampleVideo, NativeRateGivesEveryFrame) {
  testing::TempDir dir;
  testing::write_clip(dir / "clip.avi", 10, 10.0);
  auto source = sample_video(dir / "clip.avi", Rational{10, 1}, dir / "work");
  const auto samples = drain(*source);
  ASSERT_EQ(samples.size(), 10u);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(identify_frame(samples[k].image, 10), k);
}

TEST(SampleVideo, RateAboveNativeIsAnError) {
  testing::TempDir dir;
  testing::write_clip(dir / "clip.avi", 10, 10.0);
  EXPECT_THROW(sample_video(dir / "clip.avi", Rational{11, 1}, dir / "work"), DecodeError);
}

TEST(SampleVideo, UndecodableSourceIsAnError) {
  testing::TempDir dir;
  testing::write_text(dir / "clip.avi", "not a video");
  EXPECT_THROW(sample_video(dir / "clip.avi", Rational{1, 1}, dir / "work"), DecodeError);
  EXPECT_THROW(sample_video(dir / "missing.avi", Rational{1, 1}, dir / "work"), DecodeError);
}

TEST(SampleVideo, MissingDecoderIsAnError) {
  testing::TempDir dir;
  testing::write_clip(dir / "clip.avi", 10, 10.0);
  EXPECT_THROW(sample_video(dir / "clip.avi", Rational{1, 1}, dir / "work",
                            VideoDecoder{"vidsum-no-such-decoder"}),
               DecodeError);
}

TEST(ImageSequence, TwentyNineFiles) {
  testing::TempDir dir;
  testing::write_frame_sequence(dir.path(), 29);
  auto source = load_image_sequence(dir.path(), Rational{1, 1});
  const auto samples = drain(*source);
  ASSERT_EQ(samples.size(), 29u);
  EXPECT_DOUBLE_EQ(samples.back().timestamp_s, 28.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    EXPECT_EQ(samples[i].frame_number, i);
    EXPECT_EQ(samples[i].image.media_type, "image/png");
    EXPECT_EQ(identify_frame(samples[i].image, 29), static_cast<int>(i));
  }
}

TEST(ImageSequence, TimestampsFollowTheRate) {
  testing::TempDir dir;
  testing::write_frame_sequence(dir.path(), 4);
  const auto samples = drain(*load_image_sequence(dir.path(), Rational{2, 1}));
  ASSERT_EQ(samples.size(), 4u);
  EXPECT_DOUBLE_EQ(samples[3].timestamp_s, 1.5);
}

TEST(ImageSequence, EmptyDirectoryIsAnError) {
  testing::TempDir dir;
  EXPECT_THROW(load_image_sequence(dir.path(), Rational{1, 1}), DecodeError);
}

TEST(ImageSequence, NonNumericNameIsAnError) {
  testing::TempDir dir;
  testing::write_frame_sequence(dir.path(), 2);
  fs::copy_file(dir / "000.png", dir / "cover.png");
  EXPECT_THROW(load_image_sequence(dir.path(), Rational{1, 1}), DecodeError);
}

TEST(ImageSequence, NonRasterFilesAreIgnored) {
  testing::TempDir dir;
  testing::write_frame_sequence(dir.path(), 2);
  testing::write_text(dir / "notes.txt", "x");
  EXPECT_EQ(drain(*load_image_sequence(dir.path(), Rational{1, 1})).size(), 2u);
}

TEST(ImageSequence, GapsAreRenumberedDensely) {
  testing::TempDir dir;
  testing::write_frame_sequence(dir.path(), 3);
  fs::remove(dir / "001.png");
  EXPECT_EQ(sequence_gaps(scan_image_sequence(dir.path())), std::vector<std::uint64_t>{1});

  ::testing::internal::CaptureStderr();
  const auto samples = drain(*load_image_sequence(dir.path(), Rational{1, 1}));
  const std::string log = ::testing::internal::GetCapturedStderr();
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].frame_number, 0u);
  EXPECT_EQ(samples[1].frame_number, 1u);
  EXPECT_DOUBLE_EQ(samples[1].timestamp_s, 1.0);
  EXPECT_EQ(identify_frame(samples[1].image, 3), 2);
  EXPECT_NE(log.find("missing frame number"), std::string::npos) << log;
}

TEST(ImageSequence, Deterministic) {
  testing::TempDir dir;
  testing::write_frame_sequence(dir.path(), 5);
  const auto a = drain(*load_image_sequence(dir.path(), Rational{1, 1}));
  const auto b = drain(*load_image_sequence(dir.path(), Rational{1, 1}));
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].frame_number, b[i].frame_number);
    EXPECT_EQ(a[i].timestamp_s, b[i].timestamp_s);
    EXPECT_EQ(a[i].image, b[i].image);
  }
}

}  // namespace
}  // namespace vidsum
