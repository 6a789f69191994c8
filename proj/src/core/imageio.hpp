// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "raster.hpp"

namespace pano::io {

// 8-bit RGB PNG.
void save_png(const Panorama& img, const std::string& path);
Panorama load_png(const std::string& path);
void save_png(const PerspImage& img, const std::string& path);

// Depth: 16-bit grayscale PNG plus a sidecar "<path>.meta" text file with
// scale/offset so depth = scale * raw / 65535 + offset; raw 0 is the
// unknown sentinel.
void save_depth(const DepthPanorama& d, const std::string& path);
DepthPanorama load_depth(const std::string& path);

// Masks: 8-bit grayscale PNG, 255 = 1, 0 = 0.
void save_mask(const BinaryMask& m, const std::string& path);
BinaryMask load_mask(const std::string& path);

// In-memory PNG codecs for the HTTP service protocols.
std::vector<uint8_t> encode_rgb_png(const PerspImage& img);
PerspImage decode_rgb_png(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> encode_gray16_png(const PerspDepth& d, double& scale, double& offset);
PerspDepth decode_gray16_png(const std::vector<uint8_t>& bytes, double scale, double offset);
std::vector<uint8_t> encode_mask_png(const BinaryMask& m);
BinaryMask decode_mask_png(const std::vector<uint8_t>& bytes);

}  // namespace pano::io
