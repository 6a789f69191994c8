// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <random>
#include <vector>

#include "bias_solver.hpp"
#include "geometry.hpp"
#include "raster.hpp"
#include "synthscene.hpp"

namespace pano::depthfusion {

// Monocular depth estimation behind a pluggable interface. Outputs are
// depth up to an unknown per-call affine transform.
class DepthEstimator {
public:
    virtual ~DepthEstimator() = default;
    virtual PerspDepth estimate(const PerspImage& rgb, const PerspectiveCamera& cam) = 0;
    // Resets any internal randomness; lets a resumed pipeline replay the
    // same estimate stream as an uninterrupted one.
    virtual void reseed(uint64_t) {}
};

// Ground-truth depth times a random per-call affine corruption.
class OracleDepthEstimator : public DepthEstimator {
public:
    OracleDepthEstimator(synthscene::BoxScene scene, uint64_t seed,
                         double scale_lo = 0.5, double scale_hi = 2.0,
                         double offset_hi = 0.3)
        : scene_(std::move(scene)), rng_(seed),
          scale_(scale_lo, scale_hi), offset_(0.0, offset_hi) {}
    PerspDepth estimate(const PerspImage& rgb, const PerspectiveCamera& cam) override;
    void reseed(uint64_t seed) override { rng_.seed(seed); }

private:
    synthscene::BoxScene scene_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> scale_, offset_;
};

class ConstantDepthEstimator : public DepthEstimator {
public:
    explicit ConstantDepthEstimator(double value = 1.0) : value_(value) {}
    PerspDepth estimate(const PerspImage&, const PerspectiveCamera& cam) override {
        PerspDepth d(cam.width, cam.height);
        std::fill(d.depth.begin(), d.depth.end(), value_);
        return d;
    }

private:
    double value_;
};

// K perspective cameras covering the sphere from a shared pose.
// K = 20 uses dodecahedron-vertex directions (the icosahedron face
// normals); other K fall back to a Fibonacci spiral.
std::vector<PerspectiveCamera> build_perspective_rig(const Pose& pose, int k,
                                                     double fov_deg = 90.0, int size = 128);

struct FusionProblem {
    std::vector<PerspDepth> estimates;        // per-view affine-ambiguous depth
    std::vector<PerspectiveCamera> cameras;   // shared pose
    int pano_width = 0, pano_height = 0;
    int solver_iters = 2000;
};

struct FusionResult {
    DepthPanorama fused;
    std::vector<double> scales;        // solved w_k
    std::vector<solver::BiasGrid> biases;
    double objective = 0;              // raw data + TV objective at the solution
    std::vector<double> trace;
};

// Raw alignment objective (L1 data term + smooth-L1 TV on each bias field)
// at explicit variable values; also the oracle-comparison hook in tests.
double fusion_objective(const FusionProblem& p, const std::vector<double>& scales,
                        const std::vector<solver::BiasGrid>& biases,
                        const DepthPanorama& canonical);

FusionResult fuse_depths(const FusionProblem& problem);

// median(reference/pred) over jointly known pixels.
double global_scale_align(const DepthPanorama& pred, const DepthPanorama& reference);

// Full path: project the panorama to the rig, run the estimator per view,
// fuse. The canonical map keeps the panorama's dims and pose.
DepthPanorama estimate_panorama_depth(const Panorama& pano, DepthEstimator& estimator,
                                      int k = 20, int persp_size = 128,
                                      int solver_iters = 2000);

}  // namespace pano::depthfusion
