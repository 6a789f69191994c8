// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "synthscene.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pano::synthscene {

bool BoxScene::in_free_space(const Vec3& p) const {
    if (!room.contains_strict(p)) return false;
    for (const auto& oc : occluders)
        if (oc.contains(p)) return false;
    return true;
}

namespace {

const char* kWallNames[6] = {"nx", "px", "ny", "py", "nz", "pz"};

std::array<float, 3> color_of(const BoxScene& scene, const std::string& name) {
    auto it = scene.face_colors.find(name);
    if (it != scene.face_colors.end()) return it->second;
    return {0.5f, 0.5f, 0.5f};
}

// Which face of the box is hit at point p (nearest-plane classification).
int face_index(const Aabb& box, const Vec3& p) {
    double d[6] = {std::abs(p.x - box.lo.x), std::abs(p.x - box.hi.x),
                   std::abs(p.y - box.lo.y), std::abs(p.y - box.hi.y),
                   std::abs(p.z - box.lo.z), std::abs(p.z - box.hi.z)};
    int best = 0;
    for (int k = 1; k < 6; ++k)
        if (d[k] < d[best]) best = k;
    return best;
}

}  // namespace

std::optional<Hit> cast_ray(const BoxScene& scene, const Vec3& origin, const Vec3& dir) {
    double best_t = std::numeric_limits<double>::infinity();
    std::string best_face;

    // Room walls: the ray exits the room box at t_exit.
    double t0, t1;
    if (intersect_ray_box(origin, dir, scene.room, t0, t1) && t1 > 1e-12) {
        best_t = t1;
        best_face = kWallNames[face_index(scene.room, origin + dir * t1)];
    }

    for (size_t k = 0; k < scene.occluders.size(); ++k) {
        if (intersect_ray_box(origin, dir, scene.occluders[k], t0, t1) && t0 > 1e-12 && t0 < best_t) {
            best_t = t0;
            best_face = "occ" + std::to_string(k);
        }
    }
    if (!std::isfinite(best_t)) return std::nullopt;
    return Hit{best_t, color_of(scene, best_face)};
}

void render_ground_truth(const BoxScene& scene, const Pose& pose, int width, int height,
                         Panorama& rgb, DepthPanorama& depth) {
    if (!scene.in_free_space(pose.position))
        throw std::invalid_argument("render_ground_truth: pose not in free space");
    rgb = Panorama(width, height);
    rgb.pose = pose;
    depth = DepthPanorama(width, height);
    depth.pose = pose;
    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < width; ++i) {
            Vec3 d = geometry::pixel_to_direction(i, j, width, height);
            auto hit = cast_ray(scene, pose.position, d);
            if (!hit) continue;
            depth.at(i, j) = hit->t;
            float* p = rgb.px(i, j);
            p[0] = hit->color[0];
            p[1] = hit->color[1];
            p[2] = hit->color[2];
        }
    }
}

void render_ground_truth(const BoxScene& scene, const PerspectiveCamera& cam,
                         PerspImage& rgb, PerspDepth& depth) {
    if (!scene.in_free_space(cam.pose.position))
        throw std::invalid_argument("render_ground_truth: camera not in free space");
    rgb = PerspImage(cam.width, cam.height);
    depth = PerspDepth(cam.width, cam.height);
    for (int j = 0; j < cam.height; ++j) {
        for (int i = 0; i < cam.width; ++i) {
            Vec3 d = cam.pixel_direction(i, j);
            auto hit = cast_ray(scene, cam.pose.position, d);
            if (!hit) continue;
            depth.at(i, j) = hit->t;
            float* p = rgb.px(i, j);
            p[0] = hit->color[0];
            p[1] = hit->color[1];
            p[2] = hit->color[2];
            rgb.valid[size_t(j) * cam.width + i] = 1;
        }
    }
}

bool oracle_occluded(const BoxScene& scene, const Pose& ref_pose, const Vec3& query_point) {
    Vec3 rel = query_point - ref_pose.position;
    double dist = rel.norm();
    if (dist < 1e-12) return false;
    auto hit = cast_ray(scene, ref_pose.position, rel / dist);
    if (!hit) return false;
    return hit->t < dist * (1.0 - 1e-6) - 1e-9;
}

BoxScene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file: " + path);
    BoxScene scene;
    bool have_room = false;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tok;
        if (!(ss >> tok) || tok[0] == '#') continue;
        if (tok == "room" || tok == "occluder") {
            std::string mn, mx;
            Aabb box;
            if (!(ss >> mn >> box.lo.x >> box.lo.y >> box.lo.z >> mx >> box.hi.x >> box.hi.y >> box.hi.z) ||
                mn != "min" || mx != "max")
                throw std::runtime_error("bad scene line: " + line);
            if (tok == "room") {
                scene.room = box;
                have_room = true;
            } else {
                scene.occluders.push_back(box);
            }
        } else if (tok == "face") {
            std::string name;
            std::array<float, 3> c;
            if (!(ss >> name >> c[0] >> c[1] >> c[2]))
                throw std::runtime_error("bad scene line: " + line);
            scene.face_colors[name] = c;
        } else {
            throw std::runtime_error("unknown scene directive: " + tok);
        }
    }
    if (!have_room) throw std::runtime_error("scene file has no room: " + path);
    for (const auto& oc : scene.occluders)
        if (!scene.room.contains_strict(oc.lo) || !scene.room.contains_strict(oc.hi))
            throw std::runtime_error("occluder not strictly inside room");
    return scene;
}

void save_scene(const BoxScene& scene, const std::string& path) {
    std::ofstream out(path);
    out << "room min " << scene.room.lo.x << ' ' << scene.room.lo.y << ' ' << scene.room.lo.z
        << " max " << scene.room.hi.x << ' ' << scene.room.hi.y << ' ' << scene.room.hi.z << '\n';
    for (const auto& oc : scene.occluders)
        out << "occluder min " << oc.lo.x << ' ' << oc.lo.y << ' ' << oc.lo.z
            << " max " << oc.hi.x << ' ' << oc.hi.y << ' ' << oc.hi.z << '\n';
    for (const auto& [name, c] : scene.face_colors)
        out << "face " << name << ' ' << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
}

BoxScene make_default_scene(bool with_occluder) {
    BoxScene s;
    s.room = {{-1, -1, -1}, {1, 1, 1}};
    s.face_colors["px"] = {0.9f, 0.2f, 0.2f};
    s.face_colors["nx"] = {0.2f, 0.9f, 0.2f};
    s.face_colors["py"] = {0.9f, 0.9f, 0.9f};
    s.face_colors["ny"] = {0.3f, 0.3f, 0.3f};
    s.face_colors["pz"] = {0.2f, 0.2f, 0.9f};
    s.face_colors["nz"] = {0.9f, 0.9f, 0.2f};
    if (with_occluder) {
        s.occluders.push_back({{0.2, -0.6, 0.2}, {0.55, 0.1, 0.55}});
        s.face_colors["occ0"] = {0.9f, 0.5f, 0.1f};
    }
    return s;
}

}  // namespace pano::synthscene
