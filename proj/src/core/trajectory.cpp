// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "trajectory.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "geometry.hpp"

namespace pano::trajectory {

namespace {

double column_longitude(double i, int width) {
    return 2.0 * geometry::kPi * (i + 0.5) / width - geometry::kPi;
}

// point-in-polygon (crossing number) in the horizontal (x, z) plane
bool inside_polygon(const std::vector<double>& radii, const Pose& origin, const Vec3& p) {
    const int n = (int)radii.size();
    bool in = false;
    double px = p.x - origin.position.x, pz = p.z - origin.position.z;
    for (int a = 0, b = n - 1; a < n; b = a++) {
        double ta = column_longitude(a, n), tb = column_longitude(b, n);
        double ax = std::sin(ta) * radii[a], az = std::cos(ta) * radii[a];
        double bx = std::sin(tb) * radii[b], bz = std::cos(tb) * radii[b];
        if ((az > pz) != (bz > pz) &&
            px < (bx - ax) * (pz - az) / (bz - az) + ax)
            in = !in;
    }
    return in;
}

}  // namespace

Vec3 FreeSpaceCurve::point(size_t column) const {
    double theta = column_longitude((double)column, (int)radii.size());
    return origin.position + Vec3{std::sin(theta) * radii[column], 0.0,
                                  std::cos(theta) * radii[column]};
}

FreeSpaceCurve extract_curve(const DepthPanorama& depth) {
    const int w = depth.width;
    const int row = depth.height / 2;
    std::vector<double> raw(w, 0.0);
    for (int i = 0; i < w; ++i) raw[i] = depth.at(i, row);

    // circular linear interpolation over unknown entries
    int first_known = -1;
    for (int i = 0; i < w; ++i)
        if (raw[i] > 0) {
            first_known = i;
            break;
        }
    if (first_known < 0) throw std::invalid_argument("extract_curve: zero-elevation row all unknown");
    for (int i = 0; i < w; ++i) {
        int c = (first_known + i) % w;
        if (raw[c] > 0) continue;
        // find the run of unknowns starting at c
        int run = 0;
        while (raw[(c + run) % w] <= 0) ++run;
        int left = (c - 1 + w) % w, right = (c + run) % w;
        for (int t = 0; t < run; ++t) {
            double f = (t + 1.0) / (run + 1.0);
            raw[(c + t) % w] = raw[left] * (1 - f) + raw[right] * f;
        }
        i += run - 1;
    }

    // circular Gaussian smoothing, sigma = width/64, truncated at 3 sigma
    double sigma = w / 64.0;
    int half = std::max(1, (int)std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * half + 1);
    double ksum = 0;
    for (int t = -half; t <= half; ++t) {
        kernel[t + half] = std::exp(-0.5 * t * t / (sigma * sigma));
        ksum += kernel[t + half];
    }
    for (double& kv : kernel) kv /= ksum;

    FreeSpaceCurve curve;
    curve.origin = depth.pose;
    curve.radii.assign(w, 0.0);
    for (int i = 0; i < w; ++i) {
        double acc = 0;
        for (int t = -half; t <= half; ++t)
            acc += kernel[t + half] * raw[((i + t) % w + w) % w];
        curve.radii[i] = acc;
    }
    return curve;
}

std::vector<Pose> sample_positions(const FreeSpaceCurve& curve,
                                   const std::vector<double>& scales, int per_curve) {
    const int w = (int)curve.radii.size();
    std::vector<Pose> out;
    for (double s : scales) {
        for (int k = 0; k < per_curve; ++k) {
            double theta = 2.0 * geometry::kPi * k / per_curve;  // phase 0 at longitude 0
            // fractional column for this longitude, wrapped circularly
            double col = (theta + geometry::kPi) * w / (2.0 * geometry::kPi) - 0.5;
            col = std::fmod(std::fmod(col, (double)w) + w, (double)w);
            int c0 = (int)col % w, c1 = (c0 + 1) % w;
            double f = col - std::floor(col);
            double r = curve.radii[c0] * (1 - f) + curve.radii[c1] * f;
            Pose p;
            p.position = curve.origin.position +
                         Vec3{std::sin(theta) * s * r, 0.0, std::cos(theta) * s * r};
            if (!inside_polygon(curve.radii, curve.origin, p.position))
                throw std::runtime_error("sample_positions: sampled pose escaped the free-space curve");
            out.push_back(p);
        }
    }
    return out;
}

void save_trajectory(const std::vector<Pose>& poses, const std::string& path) {
    std::ofstream out(path);
    out.precision(17);
    for (size_t k = 0; k < poses.size(); ++k)
        out << k << ' ' << poses[k].position.x << ' ' << poses[k].position.y << ' '
            << poses[k].position.z << '\n';
    if (!out) throw std::runtime_error("cannot write trajectory: " + path);
}

std::vector<Pose> load_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trajectory: " + path);
    std::vector<Pose> out;
    size_t idx;
    Pose p;
    while (in >> idx >> p.position.x >> p.position.y >> p.position.z) out.push_back(p);
    return out;
}

}  // namespace pano::trajectory
