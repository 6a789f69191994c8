// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "inpaint.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "geometry.hpp"

namespace pano::inpaint {

namespace {

// Gauss-Seidel relaxation of mask-1 pixels toward the 4-neighbour mean.
void relax(std::vector<float>& rgb, const std::vector<uint8_t>& fill, int w, int h,
           int max_sweeps, double tol) {
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0;
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i) {
                if (!fill[(size_t)j * w + i]) continue;
                for (int c = 0; c < 3; ++c) {
                    double acc = 0;
                    int n = 0;
                    if (i > 0) acc += rgb[3 * ((size_t)j * w + i - 1) + c], ++n;
                    if (i + 1 < w) acc += rgb[3 * ((size_t)j * w + i + 1) + c], ++n;
                    if (j > 0) acc += rgb[3 * ((size_t)(j - 1) * w + i) + c], ++n;
                    if (j + 1 < h) acc += rgb[3 * ((size_t)(j + 1) * w + i) + c], ++n;
                    float& v = rgb[3 * ((size_t)j * w + i) + c];
                    double nv = acc / std::max(1, n);
                    worst = std::max(worst, std::abs(nv - v));
                    v = (float)nv;
                }
            }
        if (worst < tol) break;
    }
}

void laplace_fill(std::vector<float>& rgb, const std::vector<uint8_t>& fill, int w, int h) {
    size_t n_fill = 0;
    for (uint8_t f : fill) n_fill += f;
    if (n_fill == 0) return;
    if (n_fill == fill.size()) {
        // nothing known anywhere; mid-gray is the only sane constant
        std::fill(rgb.begin(), rgb.end(), 0.5f);
        return;
    }
    if (w > 8 && h > 8) {
        // coarse solve seeds the fine relaxation
        int cw = (w + 1) / 2, ch = (h + 1) / 2;
        std::vector<float> crgb(3 * (size_t)cw * ch, 0.f);
        std::vector<uint8_t> cfill((size_t)cw * ch, 0);
        for (int j = 0; j < ch; ++j)
            for (int i = 0; i < cw; ++i) {
                double acc[3] = {0, 0, 0};
                int known = 0, total = 0;
                for (int dj = 0; dj < 2; ++dj)
                    for (int di = 0; di < 2; ++di) {
                        int fi = 2 * i + di, fj = 2 * j + dj;
                        if (fi >= w || fj >= h) continue;
                        ++total;
                        if (fill[(size_t)fj * w + fi]) continue;
                        ++known;
                        for (int c = 0; c < 3; ++c) acc[c] += rgb[3 * ((size_t)fj * w + fi) + c];
                    }
                if (known > 0)
                    for (int c = 0; c < 3; ++c)
                        crgb[3 * ((size_t)j * cw + i) + c] = (float)(acc[c] / known);
                else
                    cfill[(size_t)j * cw + i] = 1;
                (void)total;
            }
        laplace_fill(crgb, cfill, cw, ch);
        for (int j = 0; j < h; ++j)
            for (int i = 0; i < w; ++i) {
                if (!fill[(size_t)j * w + i]) continue;
                double u = std::clamp(i / 2.0, 0.0, cw - 1.0);
                double v = std::clamp(j / 2.0, 0.0, ch - 1.0);
                int i0 = (int)u, j0 = (int)v;
                int i1 = std::min(i0 + 1, cw - 1), j1 = std::min(j0 + 1, ch - 1);
                double fu = u - i0, fv = v - j0;
                for (int c = 0; c < 3; ++c) {
                    double val = (1 - fv) * ((1 - fu) * crgb[3 * ((size_t)j0 * cw + i0) + c] +
                                             fu * crgb[3 * ((size_t)j0 * cw + i1) + c]) +
                                 fv * ((1 - fu) * crgb[3 * ((size_t)j1 * cw + i0) + c] +
                                       fu * crgb[3 * ((size_t)j1 * cw + i1) + c]);
                    rgb[3 * ((size_t)j * w + i) + c] = (float)val;
                }
            }
        relax(rgb, fill, w, h, 60, 1e-5);
    } else {
        double mean[3] = {0, 0, 0};
        size_t n = 0;
        for (int q = 0; q < w * h; ++q)
            if (!fill[q]) {
                for (int c = 0; c < 3; ++c) mean[c] += rgb[3 * (size_t)q + c];
                ++n;
            }
        for (int q = 0; q < w * h; ++q)
            if (fill[q])
                for (int c = 0; c < 3; ++c) rgb[3 * (size_t)q + c] = (float)(mean[c] / n);
        relax(rgb, fill, w, h, 500, 1e-7);
    }
}

void sample_persp(const PerspImage& img, double u, double v, float out[3]) {
    u = std::clamp(u, 0.0, img.width - 1.0);
    v = std::clamp(v, 0.0, img.height - 1.0);
    int i0 = (int)u, j0 = (int)v;
    int i1 = std::min(i0 + 1, img.width - 1), j1 = std::min(j0 + 1, img.height - 1);
    double fu = u - i0, fv = v - j0;
    for (int c = 0; c < 3; ++c)
        out[c] = (float)((1 - fv) * ((1 - fu) * img.px(i0, j0)[c] + fu * img.px(i1, j0)[c]) +
                         fv * ((1 - fu) * img.px(i0, j1)[c] + fu * img.px(i1, j1)[c]));
}

double sample_persp_depth(const PerspDepth& d, double u, double v) {
    u = std::clamp(u, 0.0, d.width - 1.0);
    v = std::clamp(v, 0.0, d.height - 1.0);
    int i0 = (int)u, j0 = (int)v;
    int i1 = std::min(i0 + 1, d.width - 1), j1 = std::min(j0 + 1, d.height - 1);
    double fu = u - i0, fv = v - j0;
    return (1 - fv) * ((1 - fu) * d.at(i0, j0) + fu * d.at(i1, j0)) +
           fv * ((1 - fu) * d.at(i0, j1) + fu * d.at(i1, j1));
}

PerspectiveCamera aim_camera(const Pose& pose, Vec3 dir, double fov_deg, int size) {
    PerspectiveCamera cam;
    cam.pose = pose;
    cam.forward = dir.normalized();
    Vec3 y{0, 1, 0};
    if (std::abs(cam.forward.dot(y)) > 0.99) y = {0, 0, 1};
    cam.up = (y - cam.forward * cam.forward.dot(y)).normalized();
    cam.fov_deg = fov_deg;
    cam.width = cam.height = size;
    return cam;
}

struct Component {
    std::vector<int> pixels;  // flat pano indices
    Vec3 mean_dir;
    PerspectiveCamera cam;
    BinaryMask footprint;
};

Vec3 component_mean(const std::vector<int>& pixels, int w, int h) {
    Vec3 acc{0, 0, 0};
    for (int q : pixels) acc = acc + geometry::pixel_to_direction(q % w, q / w, w, h);
    if (acc.norm() < 1e-9) acc = geometry::pixel_to_direction(pixels[0] % w, pixels[0] / w, w, h);
    return acc.normalized();
}

std::vector<Component> label_components(const BinaryMask& mask, const std::vector<uint8_t>& eligible) {
    const int w = mask.width, h = mask.height;
    std::vector<uint8_t> seen((size_t)w * h, 0);
    std::vector<Component> comps;
    for (int start = 0; start < w * h; ++start) {
        if (!eligible[start] || seen[start]) continue;
        Component comp;
        std::deque<int> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            int q = queue.front();
            queue.pop_front();
            comp.pixels.push_back(q);
            int ci = q % w, cj = q / w;
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    if (di == 0 && dj == 0) continue;
                    int nj = cj + dj;
                    if (nj < 0 || nj >= h) continue;
                    int ni = ((ci + di) % w + w) % w;  // seam wrap
                    int nq = nj * w + ni;
                    if (!eligible[nq] || seen[nq]) continue;
                    seen[nq] = 1;
                    queue.push_back(nq);
                }
        }
        comps.push_back(std::move(comp));
    }
    return comps;
}

}  // namespace

PerspImage MockInpainter::inpaint(const PerspImage& rgb, const BinaryMask& mask,
                                  const PerspectiveCamera&) {
    PerspImage out = rgb;
    laplace_fill(out.rgb, mask.bits, rgb.width, rgb.height);
    for (auto& v : out.valid) v = 1;
    return out;
}

PerspImage OracleInpainter::inpaint(const PerspImage& rgb, const BinaryMask& mask,
                                    const PerspectiveCamera& cam) {
    PerspImage gt;
    PerspDepth gtd;
    synthscene::render_ground_truth(scene_, cam, gt, gtd);
    PerspImage out = rgb;
    for (int j = 0; j < rgb.height; ++j)
        for (int i = 0; i < rgb.width; ++i)
            if (mask.at(i, j)) {
                for (int c = 0; c < 3; ++c) out.px(i, j)[c] = gt.px(i, j)[c];
                out.valid[(size_t)j * rgb.width + i] = 1;
            }
    return out;
}

std::vector<PerspectiveCamera> select_rois(const BinaryMask& invisible, const Pose& pose,
                                           double fov_deg, int size) {
    const int w = invisible.width, h = invisible.height;
    if (invisible.count_ones() == 0) return {};

    auto finish = [&](Component& c) {
        c.mean_dir = component_mean(c.pixels, w, h);
        c.cam = aim_camera(pose, c.mean_dir, fov_deg, size);
        c.footprint = geometry::camera_footprint(c.cam, w, h);
    };

    std::vector<Component> comps = label_components(invisible, invisible.bits);
    for (auto& c : comps) finish(c);

    // merge camera pairs whose footprints mostly coincide
    bool merged = true;
    while (merged && comps.size() > 1) {
        merged = false;
        for (size_t a = 0; a < comps.size() && !merged; ++a)
            for (size_t b = a + 1; b < comps.size() && !merged; ++b) {
                size_t inter = 0, na = comps[a].footprint.count_ones(),
                       nb = comps[b].footprint.count_ones();
                for (size_t q = 0; q < comps[a].footprint.bits.size(); ++q)
                    inter += comps[a].footprint.bits[q] & comps[b].footprint.bits[q];
                if (inter * 2 > std::min(na, nb)) {
                    comps[a].pixels.insert(comps[a].pixels.end(), comps[b].pixels.begin(),
                                           comps[b].pixels.end());
                    finish(comps[a]);
                    comps.erase(comps.begin() + b);
                    merged = true;
                }
            }
    }

    std::vector<PerspectiveCamera> cams;
    std::vector<uint8_t> covered((size_t)w * h, 0);
    for (auto& c : comps) {
        cams.push_back(c.cam);
        for (size_t q = 0; q < covered.size(); ++q) covered[q] |= c.footprint.bits[q];
    }

    // components wider than one camera leave uncovered pixels; aim more
    for (int round = 0; round < 16; ++round) {
        std::vector<uint8_t> uncovered((size_t)w * h, 0);
        size_t n_unc = 0;
        for (size_t q = 0; q < uncovered.size(); ++q) {
            uncovered[q] = invisible.bits[q] && !covered[q];
            n_unc += uncovered[q];
        }
        if (n_unc == 0) return cams;
        std::vector<Component> extra = label_components(invisible, uncovered);
        for (auto& c : extra) {
            finish(c);
            cams.push_back(c.cam);
            for (size_t q = 0; q < covered.size(); ++q) covered[q] |= c.footprint.bits[q];
        }
    }
    throw std::runtime_error("select_rois: could not cover the mask with perspective cameras");
}

PerspImage inpaint_rgb(RgbInpainter& inpainter, const PerspImage& rgb, const BinaryMask& mask,
                       const PerspectiveCamera& cam) {
    if (mask.width != rgb.width || mask.height != rgb.height)
        throw std::invalid_argument("inpaint_rgb: mask dims mismatch");
    PerspImage out = inpainter.inpaint(rgb, mask, cam);
    for (int j = 0; j < rgb.height; ++j)
        for (int i = 0; i < rgb.width; ++i) {
            float* o = out.px(i, j);
            if (mask.at(i, j)) {
                for (int c = 0; c < 3; ++c) o[c] = std::clamp(o[c], 0.f, 1.f);
            } else {
                const float* p = rgb.px(i, j);
                for (int c = 0; c < 3; ++c) o[c] = p[c];
                out.valid[(size_t)j * rgb.width + i] = rgb.valid[(size_t)j * rgb.width + i];
            }
        }
    return out;
}

double stitch_objective(const PerspDepth& predicted, const PerspDepth& known,
                        const BinaryMask& mask, double w, const solver::BiasGrid& bias) {
    double loss = 0;
    for (int j = 0; j < predicted.height; ++j)
        for (int i = 0; i < predicted.width; ++i) {
            if (mask.at(i, j) || !known.known(i, j)) continue;
            loss += std::abs(predicted.at(i, j) * w +
                             bias.at(i, j, predicted.width, predicted.height) - known.at(i, j));
        }
    loss += const_cast<solver::BiasGrid&>(bias).tv(nullptr, 0);
    return loss;
}

StitchResult stitch_depth(const PerspDepth& predicted, const PerspDepth& known,
                          const BinaryMask& mask, int solver_iters) {
    const int w = predicted.width, h = predicted.height;
    if (known.width != w || known.height != h || mask.width != w || mask.height != h)
        throw std::invalid_argument("stitch_depth: dims mismatch");
    std::vector<int> visible;
    for (int q = 0; q < w * h; ++q)
        if (!mask.bits[q] && known.depth[q] > 0) visible.push_back(q);
    if (visible.size() < 10)
        throw std::invalid_argument("stitch_depth: fewer than 10 visible pixels");

    solver::BiasGrid grid = solver::BiasGrid::for_raster(w, h);

    // least-squares affine init: shared scale plus intercept, then the
    // local residual scattered onto the grid nodes on top of the intercept
    double mp = 0, mk = 0;
    for (int q : visible) {
        mp += predicted.depth[q];
        mk += known.depth[q];
    }
    mp /= visible.size();
    mk /= visible.size();
    double num = 0, den = 0;
    for (int q : visible) {
        num += (predicted.depth[q] - mp) * (known.depth[q] - mk);
        den += (predicted.depth[q] - mp) * (predicted.depth[q] - mp);
    }
    double w0 = den > 0 ? num / den : 1.0;
    if (w0 <= 0) w0 = 1.0;
    double b0 = mk - w0 * mp;
    {
        std::vector<double> wsum(grid.v.size(), 0.0), vsum(grid.v.size(), 0.0);
        for (int q : visible) {
            double r = known.depth[q] - w0 * predicted.depth[q] - b0;
            grid.scatter(q % w, q / w, w, h, 1.0, wsum, 0);
            grid.scatter(q % w, q / w, w, h, r, vsum, 0);
        }
        for (size_t n = 0; n < grid.v.size(); ++n)
            grid.v[n] = b0 + (wsum[n] > 1e-12 ? vsum[n] / wsum[n] : 0.0);
    }

    std::vector<double> x(1 + grid.v.size());
    x[0] = w0;
    std::copy(grid.v.begin(), grid.v.end(), x.begin() + 1);
    const double scale = 1.0 / (double)visible.size();  // conditioning only
    auto f = [&](const std::vector<double>& xv, std::vector<double>& g) {
        solver::BiasGrid gb = grid;
        std::copy(xv.begin() + 1, xv.end(), gb.v.begin());
        std::fill(g.begin(), g.end(), 0.0);
        double loss = 0;
        for (int q : visible) {
            double r = predicted.depth[q] * xv[0] + gb.at(q % w, q / w, w, h) - known.depth[q];
            // tight Huber surrogate keeps gradients usable at the L1 kinks
            loss += solver::smooth_l1(r, 1e-4);
            double s = solver::smooth_l1_grad(r, 1e-4);
            g[0] += s * predicted.depth[q];
            gb.scatter(q % w, q / w, w, h, s, g, 1);
        }
        loss += gb.tv(&g, 1);
        for (double& gv : g) gv *= scale;
        return loss * scale;
    };
    solver::GdResult gd = solver::minimize(x, f, {solver_iters, 1e-2, 0.9});

    StitchResult out;
    out.w = x[0];
    if (out.w <= 0) throw std::runtime_error("stitch_depth: non-positive scale at optimum");
    out.bias = grid;
    std::copy(x.begin() + 1, x.end(), out.bias.v.begin());
    out.objective = gd.objective / scale;
    out.completed = known;
    for (int q = 0; q < w * h; ++q)
        if (mask.bits[q])
            out.completed.depth[q] =
                std::max(1e-6, predicted.depth[q] * out.w + out.bias.at(q % w, q / w, w, h));
    return out;
}

ReferenceView complete_view(const Panorama& rendered_rgb, const DepthPanorama& rendered_depth,
                            const std::vector<ReferenceView>& refs, RgbInpainter& inpainter,
                            depthfusion::DepthEstimator& estimator, const CompleteOptions& opts) {
    const int w = rendered_rgb.width, h = rendered_rgb.height;
    ReferenceView out;
    out.rgb = rendered_rgb;
    out.depth = rendered_depth;
    out.pose = rendered_rgb.pose;
    out.supervision_mask = BinaryMask(w, h, 1);

    std::vector<BinaryMask> masks;
    for (const auto& ref : refs)
        masks.push_back(visibility::invisible_mask(rendered_depth, ref, opts.eps_rel));
    BinaryMask uncovered = visibility::combine_masks(masks, opts.combine);
    if (uncovered.count_ones() == 0) return out;

    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        std::vector<PerspectiveCamera> cams =
            select_rois(uncovered, out.pose, opts.roi_fov_deg, opts.roi_size);
        std::vector<double> acc_rgb(3 * (size_t)w * h, 0.0), acc_d((size_t)w * h, 0.0);
        std::vector<int> acc_n((size_t)w * h, 0);
        for (const auto& cam : cams) {
            BinaryMask roi_mask = geometry::project_mask_to_perspective(uncovered, cam);
            if (roi_mask.count_ones() == 0) continue;
            PerspImage roi_rgb = geometry::project_panorama_to_perspective(out.rgb, cam);
            PerspDepth roi_depth = geometry::project_panorama_to_perspective(out.depth, cam);
            for (int q = 0; q < cam.width * cam.height; ++q)
                if (roi_mask.bits[q]) {
                    roi_rgb.rgb[3 * (size_t)q] = roi_rgb.rgb[3 * (size_t)q + 1] =
                        roi_rgb.rgb[3 * (size_t)q + 2] = 0.f;
                    roi_rgb.valid[q] = 0;
                    roi_depth.depth[q] = 0.0;
                }
            PerspImage filled = inpaint_rgb(inpainter, roi_rgb, roi_mask, cam);
            PerspDepth predicted = estimator.estimate(filled, cam);
            StitchResult stitched = stitch_depth(predicted, roi_depth, roi_mask, opts.solver_iters);

            for (int pj = 0; pj < h; ++pj)
                for (int pi = 0; pi < w; ++pi) {
                    if (!uncovered.at(pi, pj)) continue;
                    Vec3 dir = geometry::pixel_to_direction(pi, pj, w, h);
                    double u, v;
                    if (!cam.direction_to_pixel(dir, u, v)) continue;
                    float rgb[3];
                    sample_persp(filled, u, v, rgb);
                    size_t q = (size_t)pj * w + pi;
                    for (int c = 0; c < 3; ++c) acc_rgb[3 * q + c] += rgb[c];
                    acc_d[q] += sample_persp_depth(stitched.completed, u, v);
                    ++acc_n[q];
                }
        }
        size_t remaining = 0;
        for (int pj = 0; pj < h; ++pj)
            for (int pi = 0; pi < w; ++pi) {
                size_t q = (size_t)pj * w + pi;
                if (!uncovered.at(pi, pj)) continue;
                if (acc_n[q] == 0) {
                    ++remaining;
                    continue;
                }
                for (int c = 0; c < 3; ++c)
                    out.rgb.px(pi, pj)[c] = (float)(acc_rgb[3 * q + c] / acc_n[q]);
                out.depth.at(pi, pj) = acc_d[q] / acc_n[q];
                uncovered.at(pi, pj) = 0;
            }
        if (remaining == 0) return out;
    }
    throw std::runtime_error("complete_view: " + std::to_string(uncovered.count_ones()) +
                             " masked pixels still uncovered after sweeps");
}

}  // namespace pano::inpaint
