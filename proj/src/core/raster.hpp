// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vec3.hpp"

namespace pano {

// Camera position in world space. Orientation is always the fixed
// world-aligned panoramic frame, so only a translation is stored.
struct Pose {
    Vec3 position;
};

// Dense equirectangular RGB raster, channels in [0,1], width == 2*height.
struct Panorama {
    int width = 0, height = 0;
    std::vector<float> rgb;  // 3 * width * height, row-major, interleaved
    Pose pose;

    Panorama() = default;
    Panorama(int w, int h) : width(w), height(h), rgb(size_t(3) * w * h, 0.f) {
        if (w < 4 || w % 2 != 0 || h != w / 2)
            throw std::invalid_argument("panorama dims must be 2:1 with even width >= 4");
    }
    float* px(int i, int j) { return &rgb[3 * (size_t(j) * width + i)]; }
    const float* px(int i, int j) const { return &rgb[3 * (size_t(j) * width + i)]; }
};

// Per-pixel radial distance, world units. 0 means unknown.
struct DepthPanorama {
    int width = 0, height = 0;
    std::vector<double> depth;
    Pose pose;

    DepthPanorama() = default;
    DepthPanorama(int w, int h) : width(w), height(h), depth(size_t(w) * h, 0.0) {}
    double& at(int i, int j) { return depth[size_t(j) * width + i]; }
    double at(int i, int j) const { return depth[size_t(j) * width + i]; }
    bool known(int i, int j) const { return at(i, j) > 0.0; }
};

struct BinaryMask {
    int width = 0, height = 0;
    std::vector<uint8_t> bits;

    BinaryMask() = default;
    BinaryMask(int w, int h, uint8_t fill = 0)
        : width(w), height(h), bits(size_t(w) * h, fill) {}
    uint8_t& at(int i, int j) { return bits[size_t(j) * width + i]; }
    uint8_t at(int i, int j) const { return bits[size_t(j) * width + i]; }
    size_t count_ones() const {
        size_t n = 0;
        for (uint8_t b : bits) n += b;
        return n;
    }
};

struct PerspectiveCamera {
    Pose pose;
    Vec3 forward{0, 0, 1};
    Vec3 up{0, 1, 0};
    double fov_deg = 90.0;  // horizontal
    int width = 512, height = 512;

    Vec3 right() const { return forward.cross(up).normalized(); }
    double tan_half_h() const;
    double tan_half_v() const;
    // Unit direction through pixel center (u, v); continuous coords allowed.
    Vec3 pixel_direction(double u, double v) const;
    // Inverse: returns false if dir is behind the camera or outside the frustum.
    bool direction_to_pixel(const Vec3& dir, double& u, double& v) const;
};

// Perspective raster holding RGB or scalar values plus per-pixel validity.
struct PerspImage {
    int width = 0, height = 0;
    std::vector<float> rgb;       // 3 per pixel
    std::vector<uint8_t> valid;   // 1 per pixel

    PerspImage() = default;
    PerspImage(int w, int h)
        : width(w), height(h), rgb(size_t(3) * w * h, 0.f), valid(size_t(w) * h, 0) {}
    float* px(int i, int j) { return &rgb[3 * (size_t(j) * width + i)]; }
    const float* px(int i, int j) const { return &rgb[3 * (size_t(j) * width + i)]; }
};

struct PerspDepth {
    int width = 0, height = 0;
    std::vector<double> depth;  // radial distance from camera pose; 0 = unknown

    PerspDepth() = default;
    PerspDepth(int w, int h) : width(w), height(h), depth(size_t(w) * h, 0.0) {}
    double& at(int i, int j) { return depth[size_t(j) * width + i]; }
    double at(int i, int j) const { return depth[size_t(j) * width + i]; }
    bool known(int i, int j) const { return at(i, j) > 0.0; }
};

// RGBD panorama + pose admitted into the supervision set.
struct ReferenceView {
    Panorama rgb;
    DepthPanorama depth;
    Pose pose;
    BinaryMask supervision_mask;  // 1 = pixel participates in training
};

}  // namespace pano
