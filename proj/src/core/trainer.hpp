// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "field.hpp"
#include "raster.hpp"

namespace pano::trainer {

struct TrainConfig {
    int rays_per_step = 2048;
    int init_steps = 10000;
    int per_view_steps = 2000;
    int new_view_only_steps = 100;
    double lr_start = 1e-3;
    double lr_end = 1e-4;   // cosine schedule per stage
    double lambda_depth = 1.0;
    double lambda_dist = 1.0;
    uint64_t seed = 0;
    int n_samples = 128;
    int checkpoint_every = 1000;
    std::string checkpoint_dir;   // empty disables checkpoints
    std::ostream* log = nullptr;  // line-delimited step records
    double early_stop = 1e-4;     // ray-termination transmittance

    void validate() const;
};

// One supervised ray: pixel color target plus optional depth target.
struct RayTarget {
    geometry::Ray ray;  // t range filled against the field domain
    double color[3] = {0, 0, 0};
    double depth = 0;  // 0 = unknown, term skipped
};

template <typename T>
struct LossParts {
    T color = 0, depth = 0, dist = 0, total = 0;
};

// Mean-over-rays Eq. 3 loss plus lambda_dist * mean distortion loss.
// With backward=true, gradients accumulate into the field's buffers.
template <typename T>
LossParts<T> loss_batch(field::Field<T>& f, const std::vector<RayTarget>& batch,
                        int n_samples, double lambda_depth, double lambda_dist,
                        bool backward, bool stratified, std::mt19937_64& rng,
                        T early_stop = 0);

struct TrainStats {
    long steps = 0;
    double last_loss = 0;
    std::vector<size_t> rays_per_view;  // sampler audit
    std::string last_checkpoint;
};

// Single-view initial optimization: rays sampled uniformly over the
// supervision-mask-1 pixels of ref0.
TrainStats train_initial(field::Field<float>& f, const ReferenceView& ref0,
                         const TrainConfig& cfg);

// Multi-view finetuning; the first new_view_only_steps draw only from
// refs[new_view_index], the rest choose a view uniformly per ray.
TrainStats finetune(field::Field<float>& f, const std::vector<ReferenceView>& refs,
                    size_t new_view_index, const TrainConfig& cfg);

// lr at step s of a stage with n steps (cosine annealing).
double cosine_lr(double lr_start, double lr_end, long s, long n);

extern template LossParts<float> loss_batch<float>(field::Field<float>&,
                                                   const std::vector<RayTarget>&, int, double,
                                                   double, bool, bool, std::mt19937_64&, float);
extern template LossParts<double> loss_batch<double>(field::Field<double>&,
                                                     const std::vector<RayTarget>&, int, double,
                                                     double, bool, bool, std::mt19937_64&, double);

}  // namespace pano::trainer
