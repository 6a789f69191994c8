// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "visibility.hpp"

#include <cmath>
#include <stdexcept>

namespace pano::visibility {

namespace {

enum class Test { Invisible, Conflict };

BinaryMask warped_check(const DepthPanorama& new_depth, const ReferenceView& ref,
                        double eps_rel, Test test) {
    if (ref.depth.width != new_depth.width || ref.depth.height != new_depth.height)
        throw std::invalid_argument("warped depth check: raster dims mismatch");
    const int w = new_depth.width, h = new_depth.height;
    BinaryMask mask(w, h);
    for (int j = 0; j < h; ++j) {
        for (int i = 0; i < w; ++i) {
            double v = new_depth.at(i, j);
            if (v <= 0) {
                // unrendered pixel: nothing to check; invisible by convention
                if (test == Test::Invisible) mask.at(i, j) = 1;
                continue;
            }
            Vec3 x = new_depth.pose.position +
                     v * geometry::pixel_to_direction(i, j, w, h);
            Vec3 rel = x - ref.pose.position;
            double warped = rel.norm();
            if (warped < 1e-12) continue;
            double u, vv;
            geometry::direction_to_pixel(rel / warped, w, h, u, vv);
            int ri = (int)std::lround(u), rj = (int)std::lround(vv);
            ri = ((ri % w) + w) % w;
            rj = std::clamp(rj, 0, h - 1);
            double ref_d = ref.depth.at(ri, rj);
            if (ref_d <= 0) {
                // unobserved by this reference: must be inpainted
                if (test == Test::Invisible) mask.at(i, j) = 1;
                continue;
            }
            double eps = eps_rel * ref_d;
            if (test == Test::Invisible)
                mask.at(i, j) = warped - ref_d > eps ? 1 : 0;
            else
                mask.at(i, j) = ref_d - warped > eps ? 1 : 0;
        }
    }
    return mask;
}

}  // namespace

BinaryMask invisible_mask(const DepthPanorama& new_depth, const ReferenceView& ref,
                          double eps_rel) {
    return warped_check(new_depth, ref, eps_rel, Test::Invisible);
}

BinaryMask conflict_mask(const DepthPanorama& new_depth, const ReferenceView& ref,
                         double eps_rel) {
    return warped_check(new_depth, ref, eps_rel, Test::Conflict);
}

BinaryMask combine_masks(const std::vector<BinaryMask>& masks, CombineMode mode) {
    if (masks.empty()) throw std::invalid_argument("combine_masks: empty list");
    BinaryMask out = masks[0];
    for (size_t k = 1; k < masks.size(); ++k) {
        const auto& m = masks[k];
        if (m.width != out.width || m.height != out.height)
            throw std::invalid_argument("combine_masks: dims mismatch");
        for (size_t q = 0; q < out.bits.size(); ++q)
            out.bits[q] = mode == CombineMode::AllOf ? (out.bits[q] & m.bits[q])
                                                     : (out.bits[q] | m.bits[q]);
    }
    return out;
}

}  // namespace pano::visibility
