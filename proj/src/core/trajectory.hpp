// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "raster.hpp"

namespace pano::trajectory {

// Smoothed zero-elevation free-space contour around the input pose.
// samples[i] is the 2D point (x, z) for the longitude of panorama column i.
struct FreeSpaceCurve {
    Pose origin;
    std::vector<double> radii;  // per panorama column, after smoothing
    Vec3 point(size_t column) const;  // world-space point on the curve
};

// Takes the depth row at zero elevation (row height/2), fills unknown
// entries by circular linear interpolation, and applies circular 1D
// Gaussian smoothing with sigma = width/64 (kernel truncated at 3 sigma).
FreeSpaceCurve extract_curve(const DepthPanorama& depth);

// Uniform longitude samples on shrunk copies of the curve, ordered by
// increasing scale, fixed phase at longitude 0.
std::vector<Pose> sample_positions(const FreeSpaceCurve& curve,
                                   const std::vector<double>& scales, int per_curve);

void save_trajectory(const std::vector<Pose>& poses, const std::string& path);
std::vector<Pose> load_trajectory(const std::string& path);

}  // namespace pano::trajectory
