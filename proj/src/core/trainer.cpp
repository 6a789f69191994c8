// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <stdexcept>

#include "geometry.hpp"

namespace pano::trainer {

void TrainConfig::validate() const {
    if (rays_per_step <= 0 || init_steps <= 0 || per_view_steps <= 0 ||
        new_view_only_steps <= 0 || n_samples <= 0)
        throw std::invalid_argument("train config counts must be positive");
    if (lr_end > lr_start) throw std::invalid_argument("lr_end must not exceed lr_start");
}

double cosine_lr(double lr_start, double lr_end, long s, long n) {
    if (n <= 1) return lr_start;
    double c = 0.5 * (1.0 + std::cos(geometry::kPi * (double)s / (double)(n - 1)));
    return lr_end + (lr_start - lr_end) * c;
}

template <typename T>
LossParts<T> loss_batch(field::Field<T>& f, const std::vector<RayTarget>& batch,
                        int n_samples, double lambda_depth, double lambda_dist,
                        bool backward, bool stratified, std::mt19937_64& rng, T early_stop) {
    LossParts<T> parts;
    if (batch.empty()) return parts;
    const T inv_n = T(1) / T(batch.size());
    field::RenderResult<T> res;
    field::RayCache<T> cache;
    std::vector<T> s_norm, ds_norm, dw_dist;
    for (const RayTarget& rt : batch) {
        f.render_ray(rt.ray, n_samples, stratified, rng, &cache, res, early_stop);
        T d_rgb[3];
        T c_loss = 0;
        for (int c = 0; c < 3; ++c) {
            T e = res.rgb[c] - T(rt.color[c]);
            c_loss += e * e;
            d_rgb[c] = T(2) * e * inv_n;
        }
        parts.color += c_loss * inv_n;
        T d_depth = 0;
        if (rt.depth > 0) {
            T e = res.depth - T(rt.depth);
            parts.depth += T(lambda_depth) * e * e * inv_n;
            d_depth = T(2 * lambda_depth) * e * inv_n;
        }
        // distortion over the normalized ray coordinate
        const size_t n = res.weights.size();
        const T span = cache.t_far - cache.t_near;
        T* dw_extra = nullptr;
        if (lambda_dist != 0 && n > 0 && span > 0) {
            s_norm.resize(n);
            ds_norm.resize(n);
            for (size_t q = 0; q < n; ++q) {
                s_norm[q] = (cache.ts[q] - cache.t_near) / span;
                ds_norm[q] = cache.deltas[q] / span;
            }
            dw_dist.assign(n, T(0));
            T dl = field::distortion_loss<T>(s_norm, ds_norm, res.weights,
                                             backward ? dw_dist.data() : nullptr);
            parts.dist += T(lambda_dist) * dl * inv_n;
            if (backward) {
                for (T& g : dw_dist) g *= T(lambda_dist) * inv_n;
                dw_extra = dw_dist.data();
            }
        }
        if (backward) f.render_backward(cache, res, d_rgb, d_depth, dw_extra);
    }
    parts.total = parts.color + parts.depth + parts.dist;
    return parts;
}

namespace {

struct ViewSampler {
    const ReferenceView* view = nullptr;
    std::vector<int> pixels;  // flat indices with supervision 1
};

ViewSampler make_sampler(const ReferenceView& v) {
    ViewSampler s;
    s.view = &v;
    const int w = v.rgb.width, h = v.rgb.height;
    if (v.supervision_mask.width != w || v.supervision_mask.height != h)
        throw std::invalid_argument("supervision mask dims mismatch");
    for (int q = 0; q < w * h; ++q)
        if (v.supervision_mask.bits[q]) s.pixels.push_back(q);
    return s;
}

bool make_target(const ViewSampler& s, int flat, const Aabb& domain, RayTarget& out) {
    const ReferenceView& v = *s.view;
    const int w = v.rgb.width;
    int i = flat % w, j = flat / w;
    out.ray.origin = v.pose.position;
    out.ray.direction = geometry::pixel_to_direction(i, j, w, v.rgb.height);
    double t0, t1;
    if (!intersect_ray_box(out.ray.origin, out.ray.direction, domain, t0, t1)) return false;
    out.ray.t_near = std::max(t0, 1e-3);
    out.ray.t_far = t1;
    if (out.ray.t_far <= out.ray.t_near) return false;
    const float* px = v.rgb.px(i, j);
    for (int c = 0; c < 3; ++c) out.color[c] = px[c];
    out.depth = v.depth.at(i, j);
    return true;
}

std::string checkpoint_path(const std::string& dir, const std::string& tag) {
    return (std::filesystem::path(dir) / (tag + ".ckpt")).string();
}

// view_of(step) -> index into samplers for each ray of that step
TrainStats run_stage(field::Field<float>& f, const std::vector<ViewSampler>& samplers,
                     const std::function<int(long, std::mt19937_64&)>& view_of, long steps,
                     const TrainConfig& cfg, const std::string& stage) {
    TrainStats stats;
    stats.rays_per_view.assign(samplers.size(), 0);
    std::mt19937_64 rng(cfg.seed ^ std::hash<std::string>{}(stage));
    const Aabb domain = f.config().domain;
    std::vector<RayTarget> batch;
    for (long s = 0; s < steps; ++s) {
        batch.clear();
        for (int r = 0; r < cfg.rays_per_step; ++r) {
            int vi = view_of(s, rng);
            const ViewSampler& vs = samplers[vi];
            int flat = vs.pixels[rng() % vs.pixels.size()];
            RayTarget rt;
            if (!make_target(vs, flat, domain, rt)) continue;
            ++stats.rays_per_view[vi];
            batch.push_back(rt);
        }
        double lr = cosine_lr(cfg.lr_start, cfg.lr_end, s, steps);
        f.zero_grad();
        LossParts<float> parts = loss_batch<float>(f, batch, cfg.n_samples, cfg.lambda_depth,
                                                   cfg.lambda_dist, true, true, rng,
                                                   (float)cfg.early_stop);
        if (!std::isfinite(parts.total)) {
            std::string where;
            if (!cfg.checkpoint_dir.empty()) {
                bool ok = true;
                for (float p : f.params())
                    if (!std::isfinite(p)) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    where = checkpoint_path(cfg.checkpoint_dir, stage + "_abort");
                    f.save(where);
                } else {
                    where = stats.last_checkpoint;
                }
            }
            throw std::runtime_error("non-finite loss at " + stage + " step " + std::to_string(s) +
                                     (where.empty() ? "" : "; last finite state: " + where));
        }
        f.adam_step((float)lr);
        stats.last_loss = parts.total;
        ++stats.steps;
        if (cfg.log)
            (*cfg.log) << stage << " step " << s << " loss " << parts.total << " color "
                       << parts.color << " depth " << parts.depth << " dist " << parts.dist
                       << " lr " << lr << '\n';
        if (!cfg.checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
            (s + 1) % cfg.checkpoint_every == 0) {
            stats.last_checkpoint =
                checkpoint_path(cfg.checkpoint_dir, stage + "_" + std::to_string(s + 1));
            f.save(stats.last_checkpoint);
        }
    }
    return stats;
}

}  // namespace

TrainStats train_initial(field::Field<float>& f, const ReferenceView& ref0,
                         const TrainConfig& cfg) {
    cfg.validate();
    std::vector<ViewSampler> samplers{make_sampler(ref0)};
    if (samplers[0].pixels.empty())
        throw std::invalid_argument("train_initial: empty supervision mask");
    return run_stage(
        f, samplers, [](long, std::mt19937_64&) { return 0; }, cfg.init_steps, cfg, "init");
}

TrainStats finetune(field::Field<float>& f, const std::vector<ReferenceView>& refs,
                    size_t new_view_index, const TrainConfig& cfg) {
    cfg.validate();
    if (new_view_index >= refs.size()) throw std::invalid_argument("finetune: bad view index");
    std::vector<ViewSampler> samplers;
    for (const auto& r : refs) samplers.push_back(make_sampler(r));
    if (samplers[new_view_index].pixels.empty())
        throw std::invalid_argument("finetune: new view has empty supervision mask");
    std::vector<int> usable;  // views that can source rays at all
    for (size_t k = 0; k < samplers.size(); ++k)
        if (!samplers[k].pixels.empty()) usable.push_back((int)k);
    auto view_of = [&, nv = (int)new_view_index](long s, std::mt19937_64& rng) {
        if (s < cfg.new_view_only_steps) return nv;
        return usable[rng() % usable.size()];
    };
    return run_stage(f, samplers, view_of, cfg.per_view_steps, cfg, "finetune");
}

template LossParts<float> loss_batch<float>(field::Field<float>&, const std::vector<RayTarget>&,
                                            int, double, double, bool, bool, std::mt19937_64&,
                                            float);
template LossParts<double> loss_batch<double>(field::Field<double>&, const std::vector<RayTarget>&,
                                              int, double, double, bool, bool, std::mt19937_64&,
                                              double);

}  // namespace pano::trainer
