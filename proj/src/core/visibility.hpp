// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "geometry.hpp"
#include "raster.hpp"

namespace pano::visibility {

enum class CombineMode { AllOf, AnyOf };

// Warped-depth check: for each new-view pixel, the rendered depth is
// warped to the reference; the pixel is invisible (1) when the warped
// depth exceeds the reference depth at the landing pixel by more than
// eps_rel * ref depth, or lands on an unknown reference pixel.
BinaryMask invisible_mask(const DepthPanorama& new_depth, const ReferenceView& ref,
                          double eps_rel);

// Opposite strict inequality: the new geometry occludes a surface the
// reference can see (ref depth - warped depth > eps). Pixels landing on
// unknown reference depth cannot conflict and stay 0.
BinaryMask conflict_mask(const DepthPanorama& new_depth, const ReferenceView& ref,
                         double eps_rel);

BinaryMask combine_masks(const std::vector<BinaryMask>& masks, CombineMode mode);

}  // namespace pano::visibility
