// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "raster.hpp"

namespace pano::synthscene {

// Axis-aligned box room with colored walls plus interior box occluders.
// Flat albedo, no lighting: the oracle renderer returns the hit-face color
// and the analytic intersection distance.
struct BoxScene {
    Aabb room;
    std::vector<Aabb> occluders;
    // face colors: room walls keyed "px","nx","py","ny","pz","nz";
    // occluder k keyed "occ<k>" (flat color for all six faces).
    std::map<std::string, std::array<float, 3>> face_colors;

    bool in_free_space(const Vec3& p) const;
};

struct Hit {
    double t;
    std::array<float, 3> color;
};

// Nearest surface along a unit ray from a point in free space.
std::optional<Hit> cast_ray(const BoxScene& scene, const Vec3& origin, const Vec3& dir);

// Exact panorama + radial depth map from a pose in free space.
void render_ground_truth(const BoxScene& scene, const Pose& pose, int width, int height,
                         Panorama& rgb, DepthPanorama& depth);

// Exact perspective render for ROI-level oracles.
void render_ground_truth(const BoxScene& scene, const PerspectiveCamera& cam,
                         PerspImage& rgb, PerspDepth& depth);

// True iff the segment from ref_pose to query_point hits scene geometry
// strictly before the query point.
bool oracle_occluded(const BoxScene& scene, const Pose& ref_pose, const Vec3& query_point);

// Plain-text scene format:
//   room min x y z max x y z
//   occluder min x y z max x y z
//   face <name> r g b
BoxScene load_scene(const std::string& path);
void save_scene(const BoxScene& scene, const std::string& path);

// Default test scene: [-1,1]^3 room, distinct wall colors, one occluder.
BoxScene make_default_scene(bool with_occluder = true);

}  // namespace pano::synthscene
