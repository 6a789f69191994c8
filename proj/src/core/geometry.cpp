// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace pano::geometry {

Vec3 pixel_to_direction(double i, double j, int width, int height) {
    if (i < 0 || i >= width || j < 0 || j >= height)
        throw std::invalid_argument("pixel_to_direction: index out of range");
    double theta = 2.0 * kPi * (i + 0.5) / width - kPi;
    double phi = kPi / 2.0 - kPi * (j + 0.5) / height;
    double cp = std::cos(phi);
    return {cp * std::sin(theta), std::sin(phi), cp * std::cos(theta)};
}

void direction_to_pixel(const Vec3& dir, int width, int height, double& i, double& j) {
    double n = dir.norm();
    if (n < 1e-12) throw std::invalid_argument("direction_to_pixel: zero vector");
    Vec3 d = dir / n;
    double phi = std::asin(std::clamp(d.y, -1.0, 1.0));
    double theta = std::atan2(d.x, d.z);
    i = (theta + kPi) * width / (2.0 * kPi) - 0.5;
    j = (kPi / 2.0 - phi) * height / kPi - 0.5;
    // wrap the longitude seam
    if (i >= width - 0.5) i -= width;
    if (i < -0.5) i += width;
}

namespace {

inline int wrap_col(int i, int w) {
    i %= w;
    return i < 0 ? i + w : i;
}
inline int clamp_row(int j, int h) { return std::clamp(j, 0, h - 1); }

struct BilinearTaps {
    int i0, i1, j0, j1;
    double fx, fy;
};

inline BilinearTaps taps(double u, double v, int w, int h) {
    int i0 = (int)std::floor(u), j0 = (int)std::floor(v);
    BilinearTaps t;
    t.fx = u - i0;
    t.fy = v - j0;
    t.i0 = wrap_col(i0, w);
    t.i1 = wrap_col(i0 + 1, w);
    t.j0 = clamp_row(j0, h);
    t.j1 = clamp_row(j0 + 1, h);
    return t;
}

}  // namespace

void sample_panorama(const Panorama& pano, double u, double v, float out_rgb[3]) {
    BilinearTaps t = taps(u, v, pano.width, pano.height);
    const float* p00 = pano.px(t.i0, t.j0);
    const float* p10 = pano.px(t.i1, t.j0);
    const float* p01 = pano.px(t.i0, t.j1);
    const float* p11 = pano.px(t.i1, t.j1);
    for (int c = 0; c < 3; ++c) {
        double top = p00[c] * (1 - t.fx) + p10[c] * t.fx;
        double bot = p01[c] * (1 - t.fx) + p11[c] * t.fx;
        out_rgb[c] = (float)(top * (1 - t.fy) + bot * t.fy);
    }
}

double sample_depth(const DepthPanorama& pano, double u, double v) {
    BilinearTaps t = taps(u, v, pano.width, pano.height);
    double vals[4] = {pano.at(t.i0, t.j0), pano.at(t.i1, t.j0),
                      pano.at(t.i0, t.j1), pano.at(t.i1, t.j1)};
    double wts[4] = {(1 - t.fx) * (1 - t.fy), t.fx * (1 - t.fy),
                     (1 - t.fx) * t.fy, t.fx * t.fy};
    double acc = 0, wsum = 0;
    for (int k = 0; k < 4; ++k) {
        if (vals[k] > 0) {
            acc += wts[k] * vals[k];
            wsum += wts[k];
        }
    }
    return wsum > 1e-9 ? acc / wsum : 0.0;
}

WarpResult warp_depth(const DepthPanorama& src, const Pose& dst_pose) {
    WarpResult out;
    out.samples.reserve(src.depth.size());
    for (int j = 0; j < src.height; ++j) {
        for (int i = 0; i < src.width; ++i) {
            double v = src.at(i, j);
            if (v <= 0) continue;
            Vec3 dir = pixel_to_direction(i, j, src.width, src.height);
            Vec3 x = src.pose.position + v * dir;
            Vec3 rel = x - dst_pose.position;
            double d = rel.norm();
            if (d < 1e-12) {
                ++out.dropped;
                continue;
            }
            WarpSample s;
            s.warped_depth = d;
            direction_to_pixel(rel / d, src.width, src.height, s.dst_u, s.dst_v);
            s.dst_i = wrap_col((int)std::lround(s.dst_u), src.width);
            s.dst_j = clamp_row((int)std::lround(s.dst_v), src.height);
            s.src_i = i;
            s.src_j = j;
            out.samples.push_back(s);
        }
    }
    return out;
}

}  // namespace pano::geometry

namespace pano {

double PerspectiveCamera::tan_half_h() const {
    return std::tan(fov_deg * geometry::kPi / 360.0);
}
double PerspectiveCamera::tan_half_v() const {
    return tan_half_h() * height / width;
}

Vec3 PerspectiveCamera::pixel_direction(double u, double v) const {
    double nx = (u + 0.5) / width * 2.0 - 1.0;
    double ny = 1.0 - (v + 0.5) / height * 2.0;
    Vec3 d = forward + right() * (nx * tan_half_h()) + up * (ny * tan_half_v());
    return d.normalized();
}

bool PerspectiveCamera::direction_to_pixel(const Vec3& dir, double& u, double& v) const {
    double f = dir.dot(forward);
    if (f <= 1e-9) return false;
    double nx = dir.dot(right()) / f / tan_half_h();
    double ny = dir.dot(up) / f / tan_half_v();
    u = (nx + 1.0) * 0.5 * width - 0.5;
    v = (1.0 - ny) * 0.5 * height - 0.5;
    return nx >= -1.0 && nx <= 1.0 && ny >= -1.0 && ny <= 1.0;
}

}  // namespace pano

namespace pano::geometry {

PerspImage project_panorama_to_perspective(const Panorama& pano, const PerspectiveCamera& cam) {
    if (cam.fov_deg <= 0 || cam.fov_deg >= 180)
        throw std::invalid_argument("perspective fov must be in (0,180)");
    PerspImage out(cam.width, cam.height);
    for (int j = 0; j < cam.height; ++j) {
        for (int i = 0; i < cam.width; ++i) {
            Vec3 d = cam.pixel_direction(i, j);
            double u, v;
            direction_to_pixel(d, pano.width, pano.height, u, v);
            sample_panorama(pano, u, v, out.px(i, j));
            out.valid[size_t(j) * cam.width + i] = 1;
        }
    }
    return out;
}

PerspDepth project_panorama_to_perspective(const DepthPanorama& pano, const PerspectiveCamera& cam) {
    PerspDepth out(cam.width, cam.height);
    for (int j = 0; j < cam.height; ++j) {
        for (int i = 0; i < cam.width; ++i) {
            Vec3 d = cam.pixel_direction(i, j);
            double u, v;
            direction_to_pixel(d, pano.width, pano.height, u, v);
            out.at(i, j) = sample_depth(pano, u, v);
        }
    }
    return out;
}

BinaryMask project_mask_to_perspective(const BinaryMask& mask, const PerspectiveCamera& cam) {
    BinaryMask out(cam.width, cam.height);
    for (int j = 0; j < cam.height; ++j) {
        for (int i = 0; i < cam.width; ++i) {
            Vec3 d = cam.pixel_direction(i, j);
            double u, v;
            direction_to_pixel(d, mask.width, mask.height, u, v);
            int mi = wrap_col((int)std::lround(u), mask.width);
            int mj = clamp_row((int)std::lround(v), mask.height);
            out.at(i, j) = mask.at(mi, mj);
        }
    }
    // forward splat keeps the projection conservative: an isolated pano pixel
    // can fall between raster centers and vanish under nearest sampling alone
    for (int j = 0; j < mask.height; ++j) {
        for (int i = 0; i < mask.width; ++i) {
            if (!mask.at(i, j)) continue;
            Vec3 d = pixel_to_direction(i, j, mask.width, mask.height);
            double u, v;
            if (!cam.direction_to_pixel(d, u, v)) continue;
            int pi = std::clamp((int)std::lround(u), 0, cam.width - 1);
            int pj = std::clamp((int)std::lround(v), 0, cam.height - 1);
            out.at(pi, pj) = 1;
        }
    }
    return out;
}

void project_perspective_to_panorama(const PerspImage& persp, const PerspectiveCamera& cam,
                                     int pano_width, int pano_height,
                                     Panorama& out, BinaryMask& coverage) {
    out = Panorama(pano_width, pano_height);
    coverage = BinaryMask(pano_width, pano_height);
    for (int j = 0; j < pano_height; ++j) {
        for (int i = 0; i < pano_width; ++i) {
            Vec3 d = pixel_to_direction(i, j, pano_width, pano_height);
            double u, v;
            if (!cam.direction_to_pixel(d, u, v)) continue;
            // bilinear with clamped edges inside the perspective raster
            int i0 = std::clamp((int)std::floor(u), 0, persp.width - 1);
            int i1 = std::min(i0 + 1, persp.width - 1);
            int j0 = std::clamp((int)std::floor(v), 0, persp.height - 1);
            int j1 = std::min(j0 + 1, persp.height - 1);
            double fx = std::clamp(u - i0, 0.0, 1.0), fy = std::clamp(v - j0, 0.0, 1.0);
            float* dst = out.px(i, j);
            for (int c = 0; c < 3; ++c) {
                double top = persp.px(i0, j0)[c] * (1 - fx) + persp.px(i1, j0)[c] * fx;
                double bot = persp.px(i0, j1)[c] * (1 - fx) + persp.px(i1, j1)[c] * fx;
                dst[c] = (float)(top * (1 - fy) + bot * fy);
            }
            coverage.at(i, j) = 1;
        }
    }
    out.pose = cam.pose;
}

void project_perspective_to_panorama(const PerspDepth& persp, const PerspectiveCamera& cam,
                                     int pano_width, int pano_height,
                                     DepthPanorama& out, BinaryMask& coverage) {
    out = DepthPanorama(pano_width, pano_height);
    coverage = BinaryMask(pano_width, pano_height);
    for (int j = 0; j < pano_height; ++j) {
        for (int i = 0; i < pano_width; ++i) {
            Vec3 d = pixel_to_direction(i, j, pano_width, pano_height);
            double u, v;
            if (!cam.direction_to_pixel(d, u, v)) continue;
            int i0 = std::clamp((int)std::floor(u), 0, persp.width - 1);
            int i1 = std::min(i0 + 1, persp.width - 1);
            int j0 = std::clamp((int)std::floor(v), 0, persp.height - 1);
            int j1 = std::min(j0 + 1, persp.height - 1);
            double fx = std::clamp(u - i0, 0.0, 1.0), fy = std::clamp(v - j0, 0.0, 1.0);
            double vals[4] = {persp.at(i0, j0), persp.at(i1, j0), persp.at(i0, j1), persp.at(i1, j1)};
            double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
            double acc = 0, wsum = 0;
            for (int k = 0; k < 4; ++k)
                if (vals[k] > 0) { acc += wts[k] * vals[k]; wsum += wts[k]; }
            if (wsum > 1e-9) {
                out.at(i, j) = acc / wsum;
                coverage.at(i, j) = 1;
            }
        }
    }
    out.pose = cam.pose;
}

BinaryMask camera_footprint(const PerspectiveCamera& cam, int pano_width, int pano_height) {
    BinaryMask fp(pano_width, pano_height);
    for (int j = 0; j < pano_height; ++j) {
        for (int i = 0; i < pano_width; ++i) {
            Vec3 d = pixel_to_direction(i, j, pano_width, pano_height);
            double u, v;
            if (cam.direction_to_pixel(d, u, v)) fp.at(i, j) = 1;
        }
    }
    return fp;
}

}  // namespace pano::geometry
