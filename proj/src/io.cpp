// Copyright 2026 The faceir Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "faceir/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <vector>

#include <png.h>

#include "faceir/lambertian.hpp"

namespace faceir {
namespace {

struct Raw {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> bytes;
};

Raw ReadRaw(const std::string& path, bool gray) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw Error(ErrorCode::kIo, "cannot read png " + path + ": " + img.message);
  }
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Raw raw;
  raw.width = static_cast<int>(img.width);
  raw.height = static_cast<int>(img.height);
  raw.channels = gray ? 1 : 3;
  raw.bytes.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, raw.bytes.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::kIo, "cannot decode png " + path + ": " + img.message);
  }
  return raw;
}

void WriteRaw(const std::string& path, const Raw& raw) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(raw.width);
  img.height = static_cast<png_uint_32>(raw.height);
  img.format = raw.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, raw.bytes.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, "cannot write png " + path + ": " + img.message);
  }
}

std::uint8_t Quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void CheckGamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) ThrowInvalid("gamma must be positive");
}

}  // namespace

Image ReadImagePng(const std::string& path, double gamma) {
  CheckGamma(gamma);
  const Raw raw = ReadRaw(path, false);
  Image out(raw.width, raw.height);
  auto dst = out.values();
  for (std::size_t k = 0; k < raw.bytes.size(); ++k) {
    const double v = raw.bytes[k] / 255.0;
    dst[k] = gamma == 1.0 ? v : std::pow(v, gamma);
  }
  return out;
}

void WriteImagePng(const std::string& path, const Image& image, double gamma) {
  CheckGamma(gamma);
  Raw raw{image.width(), image.height(), 3, {}};
  raw.bytes.reserve(image.values().size());
  for (double v : image.values()) {
    const double c = std::clamp(v, 0.0, 1.0);
    raw.bytes.push_back(Quantize(gamma == 1.0 ? c : std::pow(c, 1.0 / gamma)));
  }
  WriteRaw(path, raw);
}

ShadingMap ReadGrayPng(const std::string& path) {
  const Raw raw = ReadRaw(path, true);
  ShadingMap out(raw.width, raw.height);
  for (std::size_t p = 0; p < raw.bytes.size(); ++p) out.at(p) = raw.bytes[p] / 255.0;
  return out;
}

void WriteGrayPng(const std::string& path, const ShadingMap& map) {
  Raw raw{map.width(), map.height(), 1, {}};
  for (double v : map.values()) raw.bytes.push_back(Quantize(v));
  WriteRaw(path, raw);
}

Mask ReadMaskPng(const std::string& path) {
  const Raw raw = ReadRaw(path, true);
  Mask out(raw.width, raw.height);
  for (std::size_t p = 0; p < raw.bytes.size(); ++p) out.set(p, raw.bytes[p] >= 128);
  return out;
}

void WriteMaskPng(const std::string& path, const Mask& mask) {
  Raw raw{mask.width(), mask.height(), 1, {}};
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) raw.bytes.push_back(mask.at(p) ? 255 : 0);
  WriteRaw(path, raw);
}

NormalMap ReadNormalPng(const std::string& path) {
  return DecodeNormalMap(ReadImagePng(path));
}

void WriteNormalPng(const std::string& path, const NormalMap& normals) {
  Raw raw{normals.width(), normals.height(), 3, {}};
  for (std::size_t p = 0; p < normals.pixel_count(); ++p) {
    if (!normals.valid(p)) {
      raw.bytes.insert(raw.bytes.end(), {0, 0, 0});
      continue;
    }
    const auto rgb = EncodeNormal(normals.at(p));
    raw.bytes.insert(raw.bytes.end(), rgb.begin(), rgb.end());
  }
  WriteRaw(path, raw);
}

}  // namespace faceir
