// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "raster.hpp"

namespace pano::geometry {

inline constexpr double kPi = 3.14159265358979323846;

// Equirectangular convention used everywhere in this project:
//   longitude theta = 2*pi*(i+0.5)/width - pi
//   latitude  phi   = pi/2 - pi*(j+0.5)/height
//   direction       = (cos(phi)*sin(theta), sin(phi), cos(phi)*cos(theta))
// Column 0 looks along -x at the equator; +z is theta = 0; +y is up.
Vec3 pixel_to_direction(double i, double j, int width, int height);

// Inverse mapping to continuous pixel coordinates. Column is wrapped into
// [-0.5, width-0.5); row may fall in [-0.5, height-0.5] at the poles and is
// clamped by callers that index the raster.
void direction_to_pixel(const Vec3& dir, int width, int height, double& i, double& j);

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit
    double t_near = 0, t_far = 0;
};

struct WarpSample {
    int dst_i, dst_j;       // nearest destination pixel
    double dst_u, dst_v;    // continuous destination coords
    double warped_depth;    // distance from dst pose to the world point
    int src_i, src_j;
};

struct WarpResult {
    std::vector<WarpSample> samples;
    size_t dropped = 0;  // world points coinciding with the destination pose
};

// Forward-warp every known src depth pixel into the destination view.
// Multiple samples may land on one destination pixel; all are returned.
WarpResult warp_depth(const DepthPanorama& src, const Pose& dst_pose);

// Bilinear resampling of an equirectangular panorama along perspective rays.
// The camera must share the panorama's pose; only the direction
// parameterization changes.
PerspImage project_panorama_to_perspective(const Panorama& pano, const PerspectiveCamera& cam);
// Depth variant: radial distances resample directly. Unknown pixels carry
// zero weight; a perspective pixel whose four neighbours are all unknown
// stays unknown.
PerspDepth project_panorama_to_perspective(const DepthPanorama& pano, const PerspectiveCamera& cam);
// Nearest-neighbour variant for masks (masks must stay binary).
BinaryMask project_mask_to_perspective(const BinaryMask& mask, const PerspectiveCamera& cam);

// Inverse resampling into an equirectangular raster; uncovered pixels are
// flagged 0 in the coverage mask.
void project_perspective_to_panorama(const PerspImage& persp, const PerspectiveCamera& cam,
                                     int pano_width, int pano_height,
                                     Panorama& out, BinaryMask& coverage);
void project_perspective_to_panorama(const PerspDepth& persp, const PerspectiveCamera& cam,
                                     int pano_width, int pano_height,
                                     DepthPanorama& out, BinaryMask& coverage);

// Pano pixels whose direction falls inside the camera frustum.
BinaryMask camera_footprint(const PerspectiveCamera& cam, int pano_width, int pano_height);

// Bilinear panorama sampling at continuous coords (column wraps, row clamps).
void sample_panorama(const Panorama& pano, double u, double v, float out_rgb[3]);
// Depth sampling: returns 0 if no known neighbour.
double sample_depth(const DepthPanorama& pano, double u, double v);

}  // namespace pano::geometry
