// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

namespace pano::solver {

inline constexpr double kSmoothL1Beta = 0.01;  // world units

// Huber-style smooth L1 of a difference d.
double smooth_l1(double d, double beta = kSmoothL1Beta);
double smooth_l1_grad(double d, double beta = kSmoothL1Beta);

// Coarse deformation field stored at low resolution and bilinearly
// upsampled to a full raster. Grid spacing is ~16 full-res pixels.
struct BiasGrid {
    int gw = 1, gh = 1;
    std::vector<double> v;

    static BiasGrid for_raster(int width, int height, int factor = 16);
    double at(double i, double j, int width, int height) const;
    // Distributes an upstream gradient at pixel (i,j) onto the grid nodes.
    void scatter(double i, double j, int width, int height, double g,
                 std::vector<double>& grad, size_t offset) const;
    // Smooth-L1 TV over horizontal and vertical grid-node neighbours.
    double tv(std::vector<double>* grad, size_t offset) const;
};

struct GdOptions {
    int iters = 2000;
    double step = 1e-2;
    double momentum = 0.9;
};

struct GdResult {
    double objective = 0;
    int iters_run = 0;
    std::vector<double> trace;  // objective per accepted iteration
};

// Momentum gradient descent with step halving on objective increase.
// f fills grad (same size as x) and returns the objective. The accepted
// objective sequence is nonincreasing. Throws on a non-finite objective.
GdResult minimize(std::vector<double>& x,
                  const std::function<double(const std::vector<double>&, std::vector<double>&)>& f,
                  const GdOptions& opt);

}  // namespace pano::solver
