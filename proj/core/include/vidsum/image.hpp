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
#include <span>
#include <string>
#include <vector>

namespace vidsum {

/// Encoded raster bytes (PNG, JPEG, ...) plus their media type. Payloads
/// stay encoded end to end; only the crop and collage paths decode them.
struct ImagePayload {
  std::vector<std::uint8_t> bytes;
  std::string media_type;

  bool empty() const { return bytes.empty(); }
  friend bool operator==(const ImagePayload&, const ImagePayload&) = default;
};

/// "image/png", "image/jpeg", ... from the file extension; throws DecodeError
/// for unsupported extensions.
std::string media_type_for(const std::filesystem::path& path);
bool is_raster_file(const std::filesystem::path& path);
std::string extension_for(std::string_view media_type);

ImagePayload read_image_file(const std::filesystem::path& path);
void write_image_file(const std::filesystem::path& path, const ImagePayload& image);

struct ImageSize {
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Integer pixel rectangle, [x, x + width) x [y, y + height).
struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Decodes just enough to report dimensions. Throws DecodeError.
ImageSize image_size(const ImagePayload& image);

/// Decodes, cuts `rect` and re-encodes in the source media type.
ImagePayload crop_image(const ImagePayload& image, const PixelRect& rect);

/// Downscales so the longer side is at most `max_side`; always JPEG.
ImagePayload make_thumbnail(const ImagePayload& image, int max_side);

}  // namespace vidsum
