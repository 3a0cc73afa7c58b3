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

#include "vidsum/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <iostream>

#include "json.hpp"
#include "process.hpp"
#include "vidsum/errors.hpp"

namespace vidsum {
namespace {

namespace fs = std::filesystem;

class FileSequenceSource : public FrameSource {
 public:
  FileSequenceSource(std::vector<fs::path> files, Rational rate, std::optional<double> duration)
      : files_(std::move(files)), rate_(rate), duration_(duration) {}

  std::optional<FrameSample> next() override {
    if (cursor_ >= files_.size()) return std::nullopt;
    const auto index = static_cast<std::uint64_t>(cursor_);
    FrameSample sample;
    sample.frame_number = index;
    sample.timestamp_s = sample_timestamp(index, rate_);
    sample.source_path = files_[cursor_];
    sample.image = read_image_file(files_[cursor_]);
    ++cursor_;
    return sample;
  }

  std::optional<double> duration_s() const override { return duration_; }

 private:
  std::vector<fs::path> files_;
  Rational rate_;
  std::optional<double> duration_;
  std::size_t cursor_ = 0;
};

std::string resolve_program(const std::string& program) {
  if (program.find('/') != std::string::npos) return program;
  const fs::path sibling = fs::path(detail::self_directory()) / program;
  std::error_code ec;
  if (fs::exists(sibling, ec)) return sibling.string();
  return program;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

double sample_timestamp(std::uint64_t frame_number, const Rational& rate) {
  return static_cast<double>(frame_number) * static_cast<double>(rate.den) /
         static_cast<double>(rate.num);
}

std::optional<FrameSample> VectorFrameSource::next() {
  if (cursor_ >= samples_.size()) return std::nullopt;
  return std::move(samples_[cursor_++]);
}

std::vector<std::int64_t> sample_frame_indices(const VideoInfo& info, const Rational& rate) {
  std::vector<std::int64_t> indices;
  if (info.frame_count <= 0 || info.fps <= 0) return indices;
  // i / rate < frame_count / fps  <=>  i * den * fps < frame_count * num
  const double limit = static_cast<double>(info.frame_count) * static_cast<double>(rate.num);
  const double tolerance = 1e-9 * limit;
  for (std::int64_t i = 0;; ++i) {
    const double lhs = static_cast<double>(i) * static_cast<double>(rate.den) * info.fps;
    if (lhs >= limit - tolerance) break;
    const double t = sample_timestamp(static_cast<std::uint64_t>(i), rate);
    auto nearest = static_cast<std::int64_t>(std::llround(t * info.fps));
    indices.push_back(std::min(nearest, info.frame_count - 1));
  }
  return indices;
}

namespace {

detail::ProcessResult run_decoder(const std::vector<std::string>& argv) {
  try {
    return detail::run_process(argv);
  } catch (const DecodeError&) {
    throw;
  } catch (const Error& e) {
    throw DecodeError(std::string("video decoder unavailable: ") + e.what());
  }
}

}  // namespace

VideoInfo VideoDecoder::probe(const fs::path& video) const {
  const auto result = run_decoder({resolve_program(program), "probe", video.string()});
  if (result.exit_code != 0) {
    throw DecodeError("decoder could not probe " + video.string() + " (exit " +
                      std::to_string(result.exit_code) + ")");
  }
  try {
    const auto doc = nlohmann::json::parse(result.out);
    VideoInfo info{doc.at("fps").get<double>(), doc.at("frame_count").get<std::int64_t>()};
    if (!(info.fps > 0) || info.frame_count <= 0) {
      throw DecodeError("decoder reported an empty or rateless video: " + video.string());
    }
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(std::string("malformed decoder probe output: ") + e.what());
  }
}

void VideoDecoder::extract(const fs::path& video, const Rational& rate,
                           const fs::path& out_dir) const {
  const auto result = run_decoder(
      {resolve_program(program), "extract", video.string(), rate.str(), out_dir.string()});
  if (result.exit_code != 0) {
    throw DecodeError("decoder failed to extract frames from " + video.string() + " (exit " +
                      std::to_string(result.exit_code) + ")");
  }
}

std::unique_ptr<FrameSource> sample_video(const fs::path& source, const Rational& rate,
                                          const fs::path& work_dir,
                                          const VideoDecoder& decoder) {
  if (rate.num <= 0 || rate.den <= 0) throw PreconditionError("frame rate must be > 0");
  if (!fs::is_regular_file(source)) throw DecodeError("no such video: " + source.string());

  const VideoInfo info = decoder.probe(source);
  if (rate.value() > info.fps * (1.0 + 1e-9)) {
    throw DecodeError("frame rate " + rate.str() + " exceeds the native rate " +
                      std::to_string(info.fps) + " of " + source.string());
  }

  fs::create_directories(work_dir);
  decoder.extract(source, rate, work_dir);

  std::vector<fs::path> files;
  for (const auto& entry : scan_image_sequence(work_dir)) files.push_back(entry.path);
  return std::make_unique<FileSequenceSource>(std::move(files), rate, info.duration_s());
}

std::vector<SequenceEntry> scan_image_sequence(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DecodeError("not a directory: " + dir.string());
  std::vector<SequenceEntry> entries;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || !is_raster_file(entry.path())) continue;
    const std::string stem = entry.path().stem().string();
    if (!all_digits(stem)) {
      throw DecodeError("non-numeric frame filename: " + entry.path().filename().string());
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), value);
    if (ec != std::errc{}) throw DecodeError("frame number out of range: " + stem);
    entries.push_back({value, entry.path()});
  }
  if (entries.empty()) throw DecodeError("no frames in " + dir.string());
  std::sort(entries.begin(), entries.end(),
            [](const SequenceEntry& a, const SequenceEntry& b) { return a.stem < b.stem; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].stem == entries[i - 1].stem) {
      throw DecodeError("duplicate frame number " + std::to_string(entries[i].stem) + " in " +
                        dir.string());
    }
  }
  return entries;
}

std::vector<std::uint64_t> sequence_gaps(const std::vector<SequenceEntry>& entries) {
  std::vector<std::uint64_t> missing;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    for (auto s = entries[i - 1].stem + 1; s < entries[i].stem; ++s) missing.push_back(s);
  }
  return missing;
}

std::unique_ptr<FrameSource> load_image_sequence(const fs::path& dir, const Rational& rate) {
  if (rate.num <= 0 || rate.den <= 0) throw PreconditionError("frame rate must be > 0");
  const auto entries = scan_image_sequence(dir);
  if (const auto gaps = sequence_gaps(entries); !gaps.empty()) {
    std::cerr << "warning: " << gaps.size() << " missing frame number(s) in " << dir.string()
              << " (first " << gaps.front() << "); renumbering densely\n";
  }
  std::vector<fs::path> files;
  files.reserve(entries.size());
  for (const auto& entry : entries) files.push_back(entry.path);
  return std::make_unique<FileSequenceSource>(std::move(files), rate, std::nullopt);
}

}  // namespace vidsum
