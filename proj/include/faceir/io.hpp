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

// 8-bit PNG input/output for the raster types.

#ifndef FACEIR_IO_HPP_
#define FACEIR_IO_HPP_

#include <string>

#include "faceir/grid.hpp"

namespace faceir {

// Color images are converted to linear values with v^gamma on read and
// v^(1/gamma) on write; gamma = 1 leaves values untouched. Grayscale files are
// expanded to three channels.
Image ReadImagePng(const std::string& path, double gamma = 1.0);
void WriteImagePng(const std::string& path, const Image& image, double gamma = 1.0);

// Single-channel maps are stored clamped to [0,1].
ShadingMap ReadGrayPng(const std::string& path);
void WriteGrayPng(const std::string& path, const ShadingMap& map);

// Gray value >= 128 is set.
Mask ReadMaskPng(const std::string& path);
void WriteMaskPng(const std::string& path, const Mask& mask);

NormalMap ReadNormalPng(const std::string& path);
void WriteNormalPng(const std::string& path, const NormalMap& normals);

}  // namespace faceir

#endif  // FACEIR_IO_HPP_
