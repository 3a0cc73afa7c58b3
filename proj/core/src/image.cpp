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

#include "vidsum/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "image_codec.hpp"
#include "vidsum/errors.hpp"

namespace vidsum {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

std::string media_type_for(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".bmp") return "image/bmp";
  if (ext == ".webp") return "image/webp";
  throw DecodeError("unsupported image extension: " + path.string());
}

bool is_raster_file(const std::filesystem::path& path) {
  const auto ext = lower(path.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".webp";
}

std::string extension_for(std::string_view media_type) {
  if (media_type == "image/png") return ".png";
  if (media_type == "image/jpeg") return ".jpg";
  if (media_type == "image/bmp") return ".bmp";
  if (media_type == "image/webp") return ".webp";
  throw DecodeError("unsupported media type: " + std::string(media_type));
}

ImagePayload read_image_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot read image " + path.string());
  ImagePayload image;
  image.media_type = media_type_for(path);
  image.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return image;
}

void write_image_file(const std::filesystem::path& path, const ImagePayload& image) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write image " + path.string());
  out.write(reinterpret_cast<const char*>(image.bytes.data()),
            static_cast<std::streamsize>(image.bytes.size()));
  if (!out) throw Error("short write to " + path.string());
}

namespace detail {

cv::Mat decode_image(const ImagePayload& image) {
  if (image.bytes.empty()) throw DecodeError("empty image payload");
  cv::Mat raw(1, static_cast<int>(image.bytes.size()), CV_8UC1,
              const_cast<std::uint8_t*>(image.bytes.data()));
  cv::Mat mat = cv::imdecode(raw, cv::IMREAD_COLOR);
  if (mat.empty()) throw DecodeError("undecodable " + image.media_type + " payload");
  return mat;
}

ImagePayload encode_image(const cv::Mat& mat, std::string_view media_type) {
  std::vector<std::uint8_t> bytes;
  if (!cv::imencode(extension_for(media_type), mat, bytes)) {
    throw DecodeError("cannot encode image as " + std::string(media_type));
  }
  return ImagePayload{std::move(bytes), std::string(media_type)};
}

}  // namespace detail

ImageSize image_size(const ImagePayload& image) {
  const cv::Mat mat = detail::decode_image(image);
  return ImageSize{mat.cols, mat.rows};
}

ImagePayload crop_image(const ImagePayload& image, const PixelRect& rect) {
  const cv::Mat mat = detail::decode_image(image);
  if (rect.width <= 0 || rect.height <= 0) throw PreconditionError("crop rectangle has zero area");
  if (rect.x < 0 || rect.y < 0 || rect.x + rect.width > mat.cols ||
      rect.y + rect.height > mat.rows) {
    throw PreconditionError("crop rectangle exceeds image bounds");
  }
  const cv::Mat roi = mat(cv::Rect(rect.x, rect.y, rect.width, rect.height));
  return detail::encode_image(roi, image.media_type);
}

ImagePayload make_thumbnail(const ImagePayload& image, int max_side) {
  const cv::Mat mat = detail::decode_image(image);
  const int longest = std::max(mat.cols, mat.rows);
  if (longest <= max_side) return detail::encode_image(mat, "image/jpeg");
  const double scale = static_cast<double>(max_side) / longest;
  cv::Mat small;
  cv::resize(mat, small, cv::Size(), scale, scale, cv::INTER_AREA);
  return detail::encode_image(small, "image/jpeg");
}

}  // namespace vidsum
