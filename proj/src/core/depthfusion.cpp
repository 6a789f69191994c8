// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "depthfusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pano::depthfusion {

PerspDepth OracleDepthEstimator::estimate(const PerspImage&, const PerspectiveCamera& cam) {
    PerspImage rgb;
    PerspDepth depth;
    synthscene::render_ground_truth(scene_, cam, rgb, depth);
    double a = scale_(rng_), c = offset_(rng_);
    for (double& d : depth.depth)
        if (d > 0) d = a * d + c;
    return depth;
}

std::vector<PerspectiveCamera> build_perspective_rig(const Pose& pose, int k,
                                                     double fov_deg, int size) {
    if (k < 1) throw std::invalid_argument("rig needs k >= 1");
    std::vector<Vec3> dirs;
    if (k == 20) {
        const double p = (1.0 + std::sqrt(5.0)) / 2.0, q = 1.0 / p;
        for (int sx : {-1, 1})
            for (int sy : {-1, 1})
                for (int sz : {-1, 1}) dirs.push_back({(double)sx, (double)sy, (double)sz});
        for (int s1 : {-1, 1})
            for (int s2 : {-1, 1}) {
                dirs.push_back({0, s1 * q, s2 * p});
                dirs.push_back({s1 * q, s2 * p, 0});
                dirs.push_back({s1 * p, 0, s2 * q});
            }
    } else {
        // Fibonacci spiral
        const double ga = geometry::kPi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < k; ++i) {
            double y = k == 1 ? 0.0 : 1.0 - 2.0 * i / (k - 1);
            double r = std::sqrt(std::max(0.0, 1.0 - y * y));
            dirs.push_back({r * std::cos(ga * i), y, r * std::sin(ga * i)});
        }
    }
    std::vector<PerspectiveCamera> cams;
    for (const Vec3& d : dirs) {
        PerspectiveCamera cam;
        cam.pose = pose;
        cam.forward = d.normalized();
        Vec3 y{0, 1, 0};
        if (std::abs(cam.forward.dot(y)) > 0.99) y = {0, 0, 1};
        cam.up = (y - cam.forward * cam.forward.dot(y)).normalized();
        cam.fov_deg = fov_deg;
        cam.width = cam.height = size;
        cams.push_back(cam);
    }
    return cams;
}

namespace {

// Per-view precomputed mapping persp pixel -> nearest canonical pano pixel.
struct ViewMap {
    std::vector<int> pano_index;  // -1 where the estimate is unknown
};

std::vector<ViewMap> build_maps(const FusionProblem& p) {
    std::vector<ViewMap> maps(p.cameras.size());
    for (size_t k = 0; k < p.cameras.size(); ++k) {
        const auto& cam = p.cameras[k];
        const auto& est = p.estimates[k];
        maps[k].pano_index.assign((size_t)cam.width * cam.height, -1);
        for (int j = 0; j < cam.height; ++j)
            for (int i = 0; i < cam.width; ++i) {
                if (!est.known(i, j)) continue;
                Vec3 d = cam.pixel_direction(i, j);
                double u, v;
                geometry::direction_to_pixel(d, p.pano_width, p.pano_height, u, v);
                int pi = (int)std::lround(u), pj = (int)std::lround(v);
                pi = ((pi % p.pano_width) + p.pano_width) % p.pano_width;
                pj = std::clamp(pj, 0, p.pano_height - 1);
                maps[k].pano_index[(size_t)j * cam.width + i] = pj * p.pano_width + pi;
            }
    }
    return maps;
}

// beta > 0 replaces |r| by a tight Huber surrogate so gradient descent
// can slide along the L1 kinks; beta <= 0 is the exact objective.
double objective_impl(const FusionProblem& p, const std::vector<ViewMap>& maps,
                      const std::vector<double>& x, size_t off_b, size_t off_v,
                      const std::vector<solver::BiasGrid>& grid_shapes,
                      std::vector<double>* grad, double beta = 0.0) {
    const size_t K = p.cameras.size();
    double loss = 0;
    size_t boff = off_b;
    for (size_t k = 0; k < K; ++k) {
        const auto& cam = p.cameras[k];
        const auto& est = p.estimates[k];
        const auto& grid = grid_shapes[k];
        solver::BiasGrid g = grid;
        std::copy(x.begin() + boff, x.begin() + boff + g.v.size(), g.v.begin());
        for (int j = 0; j < cam.height; ++j)
            for (int i = 0; i < cam.width; ++i) {
                int pidx = maps[k].pano_index[(size_t)j * cam.width + i];
                if (pidx < 0) continue;
                double r = est.at(i, j) * x[k] + g.at(i, j, cam.width, cam.height) - x[off_v + pidx];
                loss += beta > 0 ? solver::smooth_l1(r, beta) : std::abs(r);
                if (grad) {
                    double s = beta > 0 ? solver::smooth_l1_grad(r, beta)
                                        : (r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0));
                    (*grad)[k] += s * est.at(i, j);
                    g.scatter(i, j, cam.width, cam.height, s, *grad, boff);
                    (*grad)[off_v + pidx] -= s;
                }
            }
        // TV on this bias field
        if (grad) {
            loss += g.tv(grad, boff);
        } else {
            loss += g.tv(nullptr, 0);
        }
        boff += g.v.size();
    }
    return loss;
}

}  // namespace

double fusion_objective(const FusionProblem& p, const std::vector<double>& scales,
                        const std::vector<solver::BiasGrid>& biases,
                        const DepthPanorama& canonical) {
    auto maps = build_maps(p);
    const size_t K = p.cameras.size();
    size_t off_b = K, nb = 0;
    for (const auto& g : biases) nb += g.v.size();
    size_t off_v = off_b + nb;
    std::vector<double> x(off_v + canonical.depth.size());
    std::copy(scales.begin(), scales.end(), x.begin());
    size_t o = off_b;
    for (const auto& g : biases) {
        std::copy(g.v.begin(), g.v.end(), x.begin() + o);
        o += g.v.size();
    }
    std::copy(canonical.depth.begin(), canonical.depth.end(), x.begin() + off_v);
    return objective_impl(p, maps, x, off_b, off_v, biases, nullptr);
}

FusionResult fuse_depths(const FusionProblem& p) {
    const size_t K = p.cameras.size();
    if (K < 1) throw std::invalid_argument("fuse_depths: need at least one view");
    if (p.estimates.size() != K) throw std::invalid_argument("fuse_depths: views/cameras mismatch");
    auto maps = build_maps(p);

    std::vector<solver::BiasGrid> grids;
    size_t nb = 0;
    for (size_t k = 0; k < K; ++k) {
        grids.push_back(solver::BiasGrid::for_raster(p.cameras[k].width, p.cameras[k].height));
        nb += grids.back().v.size();
    }
    const size_t off_b = K, off_v = K + nb;
    const size_t npano = (size_t)p.pano_width * p.pano_height;
    std::vector<double> x(off_v + npano, 0.0);

    // Init: canonical = mean of raw estimates splatted onto the panorama,
    // then per-view least-squares scale against it.
    {
        std::vector<double> sum(npano, 0.0);
        std::vector<int> cnt(npano, 0);
        for (size_t k = 0; k < K; ++k) {
            const auto& cam = p.cameras[k];
            for (int j = 0; j < cam.height; ++j)
                for (int i = 0; i < cam.width; ++i) {
                    int pidx = maps[k].pano_index[(size_t)j * cam.width + i];
                    if (pidx < 0) continue;
                    sum[pidx] += p.estimates[k].at(i, j);
                    ++cnt[pidx];
                }
        }
        double mean_all = 0;
        size_t n_all = 0;
        for (size_t q = 0; q < npano; ++q)
            if (cnt[q]) {
                sum[q] /= cnt[q];
                mean_all += sum[q];
                ++n_all;
            }
        mean_all = n_all ? mean_all / n_all : 1.0;
        for (size_t q = 0; q < npano; ++q) x[off_v + q] = cnt[q] ? sum[q] : mean_all;
        for (size_t k = 0; k < K; ++k) {
            const auto& cam = p.cameras[k];
            double num = 0, den = 0;
            for (int j = 0; j < cam.height; ++j)
                for (int i = 0; i < cam.width; ++i) {
                    int pidx = maps[k].pano_index[(size_t)j * cam.width + i];
                    if (pidx < 0) continue;
                    double e = p.estimates[k].at(i, j);
                    num += e * x[off_v + pidx];
                    den += e * e;
                }
            x[k] = den > 0 ? num / den : 1.0;
        }
    }

    // Alternating exact coordinate updates on the L1 data term: the
    // canonical depth is the per-pixel median of the per-view predictions,
    // and each scale is the weighted median of per-pixel ratios. A few
    // rounds land near the optimum; joint GD below polishes the biases.
    {
        std::vector<std::vector<double>> vals(npano);
        for (int round = 0; round < 8; ++round) {
            for (auto& v : vals) v.clear();
            for (size_t k = 0; k < K; ++k) {
                const auto& cam = p.cameras[k];
                solver::BiasGrid g = grids[k];
                size_t boff = off_b;
                for (size_t kk = 0; kk < k; ++kk) boff += grids[kk].v.size();
                std::copy(x.begin() + boff, x.begin() + boff + g.v.size(), g.v.begin());
                for (int j = 0; j < cam.height; ++j)
                    for (int i = 0; i < cam.width; ++i) {
                        int pidx = maps[k].pano_index[(size_t)j * cam.width + i];
                        if (pidx < 0) continue;
                        vals[pidx].push_back(p.estimates[k].at(i, j) * x[k] +
                                             g.at(i, j, cam.width, cam.height));
                    }
            }
            for (size_t q = 0; q < npano; ++q) {
                if (vals[q].empty()) continue;
                size_t mid = vals[q].size() / 2;
                std::nth_element(vals[q].begin(), vals[q].begin() + mid, vals[q].end());
                x[off_v + q] = vals[q][mid];
            }
            for (size_t k = 0; k < K; ++k) {
                const auto& cam = p.cameras[k];
                solver::BiasGrid g = grids[k];
                size_t boff = off_b;
                for (size_t kk = 0; kk < k; ++kk) boff += grids[kk].v.size();
                std::copy(x.begin() + boff, x.begin() + boff + g.v.size(), g.v.begin());
                std::vector<std::pair<double, double>> rw;  // (ratio, weight)
                double wsum = 0;
                for (int j = 0; j < cam.height; ++j)
                    for (int i = 0; i < cam.width; ++i) {
                        int pidx = maps[k].pano_index[(size_t)j * cam.width + i];
                        if (pidx < 0) continue;
                        double e = p.estimates[k].at(i, j);
                        if (e <= 0) continue;
                        double target = x[off_v + pidx] - g.at(i, j, cam.width, cam.height);
                        rw.push_back({target / e, e});
                        wsum += e;
                    }
                if (rw.empty()) continue;
                std::sort(rw.begin(), rw.end());
                double acc = 0;
                for (const auto& [r, w] : rw) {
                    acc += w;
                    if (acc >= 0.5 * wsum) {
                        if (r > 0) x[k] = r;
                        break;
                    }
                }
                // constant bias grid: TV vanishes, the exact coordinate
                // minimizer is the median residual
                if (g.v.size() == 1) {
                    std::vector<double> resid;
                    for (int j = 0; j < cam.height; ++j)
                        for (int i = 0; i < cam.width; ++i) {
                            int pidx = maps[k].pano_index[(size_t)j * cam.width + i];
                            if (pidx < 0) continue;
                            resid.push_back(x[off_v + pidx] -
                                            p.estimates[k].at(i, j) * x[k]);
                        }
                    size_t mid = resid.size() / 2;
                    std::nth_element(resid.begin(), resid.begin() + mid, resid.end());
                    x[boff] = resid[mid];
                }
            }
        }
    }

    size_t n_res = 0;
    for (size_t k = 0; k < K; ++k)
        for (int idx : maps[k].pano_index)
            if (idx >= 0) ++n_res;
    const double norm = n_res ? 1.0 / n_res : 1.0;

    auto f = [&](const std::vector<double>& xv, std::vector<double>& grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double raw = objective_impl(p, maps, xv, off_b, off_v, grids, &grad, 1e-4);
        for (double& g : grad) g *= norm;
        return raw * norm;
    };
    solver::GdOptions opt;
    opt.iters = p.solver_iters;
    auto gd = solver::minimize(x, f, opt);

    // Gauge: tie the canonical mean to the mean of view 0's raw estimate.
    double ref_mean = 0;
    size_t ref_n = 0;
    for (double d : p.estimates[0].depth)
        if (d > 0) {
            ref_mean += d;
            ++ref_n;
        }
    ref_mean = ref_n ? ref_mean / ref_n : 1.0;
    double can_mean = 0;
    for (size_t q = 0; q < npano; ++q) can_mean += x[off_v + q];
    can_mean /= npano;
    if (can_mean <= 0) throw std::runtime_error("fuse_depths: non-positive canonical mean");
    const double gauge = ref_mean / can_mean;
    for (double& v : x) v *= gauge;

    FusionResult out;
    out.fused = DepthPanorama(p.pano_width, p.pano_height);
    if (!p.cameras.empty()) out.fused.pose = p.cameras[0].pose;
    for (size_t q = 0; q < npano; ++q) out.fused.depth[q] = x[off_v + q];
    out.scales.assign(x.begin(), x.begin() + K);
    for (double w : out.scales)
        if (w <= 0) throw std::runtime_error("fuse_depths: non-positive solved scale");
    size_t o = off_b;
    for (auto& g : grids) {
        std::copy(x.begin() + o, x.begin() + o + g.v.size(), g.v.begin());
        o += g.v.size();
        out.biases.push_back(g);
    }
    out.objective = objective_impl(p, maps, x, off_b, off_v, grids, nullptr);
    out.trace = std::move(gd.trace);
    return out;
}

double global_scale_align(const DepthPanorama& pred, const DepthPanorama& reference) {
    if (pred.width != reference.width || pred.height != reference.height)
        throw std::invalid_argument("global_scale_align: dims mismatch");
    std::vector<double> ratios;
    for (size_t q = 0; q < pred.depth.size(); ++q)
        if (pred.depth[q] > 0 && reference.depth[q] > 0)
            ratios.push_back(reference.depth[q] / pred.depth[q]);
    if (ratios.empty()) throw std::invalid_argument("global_scale_align: no jointly known pixels");
    size_t mid = ratios.size() / 2;
    std::nth_element(ratios.begin(), ratios.begin() + mid, ratios.end());
    return ratios[mid];
}

DepthPanorama estimate_panorama_depth(const Panorama& pano, DepthEstimator& estimator,
                                      int k, int persp_size, int solver_iters) {
    FusionProblem prob;
    prob.cameras = build_perspective_rig(pano.pose, k, 90.0, persp_size);
    prob.pano_width = pano.width;
    prob.pano_height = pano.height;
    prob.solver_iters = solver_iters;
    for (const auto& cam : prob.cameras) {
        PerspImage rgb = geometry::project_panorama_to_perspective(pano, cam);
        prob.estimates.push_back(estimator.estimate(rgb, cam));
    }
    return fuse_depths(prob).fused;
}

}  // namespace pano::depthfusion
