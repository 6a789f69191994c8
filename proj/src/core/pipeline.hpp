// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "depthfusion.hpp"
#include "field.hpp"
#include "inpaint.hpp"
#include "raster.hpp"
#include "trainer.hpp"
#include "visibility.hpp"

namespace pano::pipeline {

struct State {
    field::Field<float> field;
    std::vector<ReferenceView> refs;  // refs[0] is the input view
    std::vector<Pose> poses;          // consumption order (seed-shuffled)
    size_t views_done = 0;            // completed loop iterations
    size_t erased_pixels = 0;
};

visibility::CombineMode combine_mode(const std::string& name);

// Supervision mask = NOT combined conflict mask against the given refs.
ReferenceView erase(const ReferenceView& candidate, const std::vector<ReferenceView>& refs,
                    double eps_rel, visibility::CombineMode mode);

std::unique_ptr<depthfusion::DepthEstimator> make_estimator(const Config& cfg);
std::unique_ptr<inpaint::RgbInpainter> make_inpainter(const Config& cfg);

// Full run: fuse depth (unless input_depth has known pixels), train the
// initial field, then the progressive inpaint-erase-finetune loop over
// sampled poses. With a run_dir the state is persisted after every view
// and an interrupted run resumes at the first unfinished view.
// max_views bounds how many loop iterations this call performs (-1 = all);
// 0 stops after depth fusion + initial training.
State run(const Panorama& input, const DepthPanorama* input_depth, const Config& cfg,
          depthfusion::DepthEstimator& est, inpaint::RgbInpainter& inp,
          const std::string& run_dir, std::ostream* log = nullptr, long max_views = -1);

// Reload a persisted run (manifest + checkpoints + reference files).
State load_run(const std::string& run_dir);
Config load_run_config(const std::string& run_dir);

Panorama render_novel(const field::Field<float>& f, const Pose& pose, int width, int height,
                      int n_samples, DepthPanorama* depth_out = nullptr);

// Renders numbered frame_%04d.png files; returns the frame count.
size_t render_path(const field::Field<float>& f, const std::vector<Pose>& poses, int width,
                   int height, int n_samples, const std::string& out_dir);

}  // namespace pano::pipeline
