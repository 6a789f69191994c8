// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <vector>

#include "bias_solver.hpp"
#include "depthfusion.hpp"
#include "raster.hpp"
#include "synthscene.hpp"
#include "visibility.hpp"

namespace pano::inpaint {

// Perspective crop over part of an invisible region.
struct Roi {
    PerspectiveCamera cam;
    PerspImage rgb;    // mask-1 pixels zeroed
    PerspDepth depth;  // mask-1 pixels unknown
    BinaryMask mask;   // 1 = to fill
};

class RgbInpainter {
public:
    virtual ~RgbInpainter() = default;
    // Returns an image with every mask-1 pixel filled. Callers re-impose
    // the mask-0 pixels bit-exactly afterwards; implementations need not.
    virtual PerspImage inpaint(const PerspImage& rgb, const BinaryMask& mask,
                               const PerspectiveCamera& cam) = 0;
};

// Laplace fill: masked pixels relax toward the average of their 4
// neighbours, solved coarse-to-fine on an image pyramid. Deterministic
// and dependency-free.
class MockInpainter : public RgbInpainter {
public:
    PerspImage inpaint(const PerspImage& rgb, const BinaryMask& mask,
                       const PerspectiveCamera& cam) override;
};

// Fills masked pixels with the synthetic scene's ground truth.
class OracleInpainter : public RgbInpainter {
public:
    explicit OracleInpainter(synthscene::BoxScene scene) : scene_(std::move(scene)) {}
    PerspImage inpaint(const PerspImage& rgb, const BinaryMask& mask,
                       const PerspectiveCamera& cam) override;

private:
    synthscene::BoxScene scene_;
};

// Connected components of the mask (8-connectivity, seam wrap), one
// camera per component aimed at its mean direction; pairs of cameras
// whose panorama footprints overlap more than half of the smaller one
// are merged. Extra cameras are appended until every mask-1 pixel lies
// in some footprint.
std::vector<PerspectiveCamera> select_rois(const BinaryMask& invisible, const Pose& pose,
                                           double fov_deg = 90.0, int size = 512);

// mask-0 pixels of the result equal `rgb` bit-exactly; mask-1 pixels come
// from the implementation, clamped to [0, 1].
PerspImage inpaint_rgb(RgbInpainter& inpainter, const PerspImage& rgb,
                       const BinaryMask& mask, const PerspectiveCamera& cam);

struct StitchResult {
    PerspDepth completed;  // known on mask-0, stitched prediction on mask-1
    double w = 1.0;        // shared scale
    solver::BiasGrid bias; // low-res bias field
    double objective = 0;  // raw data + TV objective at the solution
};

// Raw stitching objective (L1 data over visible pixels + smooth-L1 TV on
// the bias grid) at explicit variable values; oracle hook for tests.
double stitch_objective(const PerspDepth& predicted, const PerspDepth& known,
                        const BinaryMask& mask, double w, const solver::BiasGrid& bias);

// Fits predicted*w + b to the known depth over mask-0 pixels and merges.
StitchResult stitch_depth(const PerspDepth& predicted, const PerspDepth& known,
                          const BinaryMask& mask, int solver_iters = 2000);

struct CompleteOptions {
    double eps_rel = 0.05;
    visibility::CombineMode combine = visibility::CombineMode::AllOf;
    double roi_fov_deg = 90.0;
    int roi_size = 512;
    int solver_iters = 2000;
    int max_sweeps = 3;
};

// One inpaint-and-project pass: fills the combined invisible mask of an
// already-rendered RGBD panorama at a novel pose. Pixels outside the mask
// are untouched; supervision_mask of the result is all ones.
ReferenceView complete_view(const Panorama& rendered_rgb, const DepthPanorama& rendered_depth,
                            const std::vector<ReferenceView>& refs, RgbInpainter& inpainter,
                            depthfusion::DepthEstimator& estimator, const CompleteOptions& opts);

}  // namespace pano::inpaint
