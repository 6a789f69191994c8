// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "raster.hpp"

namespace pano::metrics {

inline constexpr double kPsnrCap = 99.0;  // reported for identical images

// 10*log10(1/MSE), channels averaged into one MSE. With a mask only
// mask=1 pixels contribute. Inputs are in [0, 1].
double psnr(const Panorama& a, const Panorama& b,
            const BinaryMask* mask = nullptr);

// Single-scale SSIM, 11x11 Gaussian window sigma=1.5, k1=0.01, k2=0.03,
// dynamic range 1, averaged over channels and pixels.
double ssim(const Panorama& a, const Panorama& b);

// Median ratio alignment: pred scaled by median(gt/pred) over pixels known
// in both maps. Declared in depthfusion as well; this is the metric user.
double depth_error(const DepthPanorama& pred, const DepthPanorama& gt);

struct MetricRecord {
    std::string metric;
    std::string view_id;
    double value = 0.0;
};

// Line-delimited "metric view value" report text.
std::string format_report(const std::vector<MetricRecord>& records);

}  // namespace pano::metrics
