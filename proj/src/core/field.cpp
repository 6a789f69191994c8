// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "field.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace pano::field {

std::vector<int> FieldConfig::level_resolutions() const {
    std::vector<int> res(levels);
    double growth = levels > 1
        ? std::exp((std::log((double)finest_res) - std::log((double)base_res)) / (levels - 1))
        : 1.0;
    for (int l = 0; l < levels; ++l)
        res[l] = (int)std::lround(base_res * std::pow(growth, l));
    return res;
}

void sh_basis(const Vec3& dir, double* o) {
    double x = dir.x, y = dir.y, z = dir.z;
    double xx = x * x, yy = y * y, zz = z * z;
    o[0] = 0.28209479177387814;
    o[1] = -0.48860251190291987 * y;
    o[2] = 0.48860251190291987 * z;
    o[3] = -0.48860251190291987 * x;
    o[4] = 1.0925484305920792 * x * y;
    o[5] = -1.0925484305920792 * y * z;
    o[6] = 0.31539156525252005 * (3 * zz - 1);
    o[7] = -1.0925484305920792 * x * z;
    o[8] = 0.5462742152960396 * (xx - yy);
    o[9] = -0.5900435899266435 * y * (3 * xx - yy);
    o[10] = 2.890611442640554 * x * y * z;
    o[11] = -0.4570457994644658 * y * (4 * zz - xx - yy);
    o[12] = 0.3731763325901154 * z * (2 * zz - 3 * xx - 3 * yy);
    o[13] = -0.4570457994644658 * x * (4 * zz - xx - yy);
    o[14] = 1.445305721320277 * z * (xx - yy);
    o[15] = -0.5900435899266435 * x * (xx - 3 * yy);
}

Aabb domain_from_depth(const DepthPanorama& depth, double inflate) {
    Aabb box{{1e30, 1e30, 1e30}, {-1e30, -1e30, -1e30}};
    bool any = false;
    for (int j = 0; j < depth.height; ++j)
        for (int i = 0; i < depth.width; ++i) {
            double v = depth.at(i, j);
            if (v <= 0) continue;
            Vec3 p = depth.pose.position +
                     v * geometry::pixel_to_direction(i, j, depth.width, depth.height);
            box.lo = {std::min(box.lo.x, p.x), std::min(box.lo.y, p.y), std::min(box.lo.z, p.z)};
            box.hi = {std::max(box.hi.x, p.x), std::max(box.hi.y, p.y), std::max(box.hi.z, p.z)};
            any = true;
        }
    if (!any) throw std::invalid_argument("domain_from_depth: no known depths");
    return box.inflated(inflate);
}

namespace {

template <typename T>
inline T softplus(T x) {
    return x > T(20) ? x : std::log1p(std::exp(x));
}
template <typename T>
inline T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

inline uint32_t hash3(uint32_t x, uint32_t y, uint32_t z) {
    return x ^ (y * 2654435761u) ^ (z * 805459861u);
}

}  // namespace

template <typename T>
Field<T>::Field(const FieldConfig& cfg, uint64_t seed) : cfg_(cfg) {
    res_ = cfg_.level_resolutions();
    hash_count_ = size_t(cfg_.levels) * cfg_.table_size();
    size_t n = hash_count_ * cfg_.feats;
    int enc = cfg_.enc_dim(), hid = cfg_.hidden, gout = 1 + cfg_.geo_feats;
    int cin = cfg_.geo_feats + kShDim, ch = cfg_.color_hidden;

    off_dw1_ = n;            n += size_t(hid) * enc;
    off_db1_ = n;            n += hid;
    off_dw2_ = n;            n += size_t(gout) * hid;
    off_db2_ = n;            n += gout;
    off_cw1_ = n;            n += size_t(ch) * cin;
    off_cb1_ = n;            n += ch;
    off_cw2_ = n;            n += size_t(ch) * ch;
    off_cb2_ = n;            n += ch;
    off_cw3_ = n;            n += size_t(3) * ch;
    off_cb3_ = n;            n += 3;

    params_.assign(n, T(0));
    grad_.assign(n, T(0));
    adam_m_.assign(n, T(0));
    adam_v_.assign(n, T(0));
    touch_stamp_.assign(hash_count_, 0);
    stamp_ = 1;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> hinit(-1e-4, 1e-4);
    for (size_t k = 0; k < off_dw1_; ++k) params_[k] = (T)hinit(rng);
    auto xavier = [&](size_t off, int nin, int nout) {
        double b = std::sqrt(6.0 / (nin + nout));
        std::uniform_real_distribution<double> u(-b, b);
        for (size_t k = 0; k < size_t(nin) * nout; ++k) params_[off + k] = (T)u(rng);
    };
    xavier(off_dw1_, enc, hid);
    xavier(off_dw2_, hid, gout);
    xavier(off_cw1_, cin, ch);
    xavier(off_cw2_, ch, ch);
    xavier(off_cw3_, ch, 3);
}

template <typename T>
void Field<T>::encode(const Vec3& x, T* enc, uint32_t* corner_idx, T* corner_w) const {
    const Vec3 lo = cfg_.domain.lo, ext = cfg_.domain.extent();
    double u[3] = {(x.x - lo.x) / ext.x, (x.y - lo.y) / ext.y, (x.z - lo.z) / ext.z};
    const uint32_t table = cfg_.table_size();
    // Pass 1: corner indices and weights for every level, with prefetch so the
    // hash-table gathers in pass 2 overlap instead of serializing on misses.
    for (int l = 0; l < cfg_.levels; ++l) {
        const int r = res_[l];
        int c[3];
        double f[3];
        for (int a = 0; a < 3; ++a) {
            double p = std::clamp(u[a], 0.0, 1.0) * r;
            c[a] = std::min((int)p, r - 1);
            f[a] = p - c[a];
        }
        const bool dense = (size_t)(r + 1) * (r + 1) * (r + 1) <= table;
        for (int k = 0; k < 8; ++k) {
            const int dx = k & 1, dy = (k >> 1) & 1, dz = k >> 2;
            const uint32_t gx = c[0] + dx, gy = c[1] + dy, gz = c[2] + dz;
            uint32_t idx = dense
                ? gx + (uint32_t)(r + 1) * (gy + (uint32_t)(r + 1) * gz)
                : (hash3(gx, gy, gz) & (table - 1));
            const double w = (dx ? f[0] : 1 - f[0]) * (dy ? f[1] : 1 - f[1]) * (dz ? f[2] : 1 - f[2]);
            const uint32_t entry = (uint32_t)l * table + idx;
            corner_idx[l * 8 + k] = entry;
            corner_w[l * 8 + k] = (T)w;
            __builtin_prefetch(&params_[(size_t)entry * cfg_.feats], 0, 1);
        }
    }
    for (int l = 0; l < cfg_.levels; ++l) {
        T* e = enc + l * cfg_.feats;
        for (int ch = 0; ch < cfg_.feats; ++ch) e[ch] = 0;
        for (int k = 0; k < 8; ++k) {
            const T w = corner_w[l * 8 + k];
            const T* fp = &params_[(size_t)corner_idx[l * 8 + k] * cfg_.feats];
            for (int ch = 0; ch < cfg_.feats; ++ch) e[ch] += w * fp[ch];
        }
    }
}

// The forward pass runs over [in][out]-ordered weight copies so the inner
// loops are elementwise FMAs over the output lane instead of dot-product
// reductions; one transpose per ray is negligible next to the sample loop.
template <typename T>
void Field<T>::transpose_weights(RayCache<T>& c) const {
    const int enc_dim = cfg_.enc_dim(), hid = cfg_.hidden, gout = 1 + cfg_.geo_feats;
    const int cin_dim = cfg_.geo_feats + kShDim, ch = cfg_.color_hidden;
    c.wt1.resize((size_t)enc_dim * hid);
    c.wt2.resize((size_t)hid * gout);
    c.wtc1.resize((size_t)cin_dim * ch);
    c.wtc2.resize((size_t)ch * ch);
    for (int j = 0; j < hid; ++j)
        for (int i = 0; i < enc_dim; ++i)
            c.wt1[(size_t)i * hid + j] = params_[off_dw1_ + (size_t)j * enc_dim + i];
    for (int k = 0; k < gout; ++k)
        for (int j = 0; j < hid; ++j)
            c.wt2[(size_t)j * gout + k] = params_[off_dw2_ + (size_t)k * hid + j];
    for (int j = 0; j < ch; ++j)
        for (int i = 0; i < cin_dim; ++i)
            c.wtc1[(size_t)i * ch + j] = params_[off_cw1_ + (size_t)j * cin_dim + i];
    for (int k = 0; k < ch; ++k)
        for (int j = 0; j < ch; ++j)
            c.wtc2[(size_t)j * ch + k] = params_[off_cw2_ + (size_t)k * ch + j];
}

template <typename T>
void Field<T>::forward_sample(int s, RayCache<T>& c) const {
    const int enc_dim = cfg_.enc_dim(), hid = cfg_.hidden, gout = 1 + cfg_.geo_feats;
    const int cin_dim = cfg_.geo_feats + kShDim, ch = cfg_.color_hidden;
    T* __restrict enc = &c.enc[(size_t)s * enc_dim];
    T* __restrict h1 = &c.h1[(size_t)s * hid];
    T* __restrict geo = &c.geo_out[(size_t)s * gout];
    T* __restrict c1 = &c.c1[(size_t)s * ch];
    T* __restrict c2 = &c.c2[(size_t)s * ch];
    T* __restrict c3 = &c.c3[(size_t)s * 3];

    for (int j = 0; j < hid; ++j) h1[j] = params_[off_db1_ + j];
    for (int i = 0; i < enc_dim; ++i) {
        const T xi = enc[i];
        const T* __restrict wr = &c.wt1[(size_t)i * hid];
        for (int j = 0; j < hid; ++j) h1[j] += xi * wr[j];
    }
    for (int j = 0; j < hid; ++j) h1[j] = h1[j] > 0 ? h1[j] : 0;

    for (int k = 0; k < gout; ++k) geo[k] = params_[off_db2_ + k];
    for (int j = 0; j < hid; ++j) {
        const T hj = h1[j];
        if (hj != 0) {
            const T* __restrict wr = &c.wt2[(size_t)j * gout];
            for (int k = 0; k < gout; ++k) geo[k] += hj * wr[k];
        }
    }
    c.sigma[s] = softplus(geo[0]);

    T cin[128];
    for (int i = 0; i < cfg_.geo_feats; ++i) cin[i] = geo[1 + i];
    for (int i = 0; i < kShDim; ++i) cin[cfg_.geo_feats + i] = c.sh[i];
    for (int j = 0; j < ch; ++j) c1[j] = params_[off_cb1_ + j];
    for (int i = 0; i < cin_dim; ++i) {
        const T xi = cin[i];
        const T* __restrict wr = &c.wtc1[(size_t)i * ch];
        for (int j = 0; j < ch; ++j) c1[j] += xi * wr[j];
    }
    for (int j = 0; j < ch; ++j) c1[j] = c1[j] > 0 ? c1[j] : 0;

    for (int j = 0; j < ch; ++j) c2[j] = params_[off_cb2_ + j];
    for (int i = 0; i < ch; ++i) {
        const T xi = c1[i];
        if (xi != 0) {
            const T* __restrict wr = &c.wtc2[(size_t)i * ch];
            for (int j = 0; j < ch; ++j) c2[j] += xi * wr[j];
        }
    }
    for (int j = 0; j < ch; ++j) c2[j] = c2[j] > 0 ? c2[j] : 0;

    for (int k = 0; k < 3; ++k) {
        const T* w = &params_[off_cw3_ + (size_t)k * ch];
        T acc = params_[off_cb3_ + k];
        for (int j = 0; j < ch; ++j) acc += w[j] * c2[j];
        c3[k] = acc;
        c.rgb[(size_t)s * 3 + k] = sigmoid(acc);
    }
}

template <typename T>
void Field<T>::query(const Vec3& x, const Vec3& d, T& sigma, T rgb[3]) const {
    if (!cfg_.domain.contains(x)) {
        sigma = 0;
        rgb[0] = rgb[1] = rgb[2] = 0;
        return;
    }
    RayCache<T> c;
    const int enc_dim = cfg_.enc_dim();
    c.enc.resize(enc_dim);
    c.h1.resize(cfg_.hidden);
    c.geo_out.resize(1 + cfg_.geo_feats);
    c.c1.resize(cfg_.color_hidden);
    c.c2.resize(cfg_.color_hidden);
    c.c3.resize(3);
    c.sigma.resize(1);
    c.rgb.resize(3);
    c.corner_idx.resize((size_t)cfg_.levels * 8);
    c.corner_w.resize((size_t)cfg_.levels * 8);
    double sh[kShDim];
    sh_basis(d.normalized(), sh);
    for (int i = 0; i < kShDim; ++i) c.sh[i] = (T)sh[i];
    transpose_weights(c);
    encode(x, c.enc.data(), c.corner_idx.data(), c.corner_w.data());
    forward_sample(0, c);
    sigma = c.sigma[0];
    rgb[0] = c.rgb[0];
    rgb[1] = c.rgb[1];
    rgb[2] = c.rgb[2];
    if (!std::isfinite((double)sigma))
        throw std::runtime_error("field query produced non-finite density");
}

template <typename T>
void Field<T>::render_ray(const geometry::Ray& ray, int n, bool stratified,
                          std::mt19937_64& rng, RayCache<T>* cache, RenderResult<T>& out,
                          T early_stop) const {
    if (n < 1) throw std::invalid_argument("render_ray: n_samples must be >= 1");
    if (!(ray.t_near < ray.t_far)) throw std::invalid_argument("render_ray: t_near >= t_far");

    RayCache<T> local;
    RayCache<T>& c = cache ? *cache : local;
    const int enc_dim = cfg_.enc_dim(), hid = cfg_.hidden, gout = 1 + cfg_.geo_feats;
    const int ch = cfg_.color_hidden;
    c.n = n;
    c.t_near = (T)ray.t_near;
    c.t_far = (T)ray.t_far;
    c.ts.resize(n);
    c.deltas.resize(n);
    c.in_domain.assign(n, 0);
    c.sigma.assign(n, T(0));
    c.rgb.assign((size_t)3 * n, T(0));
    c.enc.resize((size_t)n * enc_dim);
    c.h1.resize((size_t)n * hid);
    c.geo_out.resize((size_t)n * gout);
    c.c1.resize((size_t)n * ch);
    c.c2.resize((size_t)n * ch);
    c.c3.resize((size_t)n * 3);
    c.corner_idx.resize((size_t)n * cfg_.levels * 8);
    c.corner_w.resize((size_t)n * cfg_.levels * 8);

    double sh[kShDim];
    sh_basis(ray.direction, sh);
    for (int i = 0; i < kShDim; ++i) c.sh[i] = (T)sh[i];
    transpose_weights(c);

    const double range = ray.t_far - ray.t_near;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double prev = ray.t_near;
    for (int i = 0; i < n; ++i) {
        double jit = stratified ? u01(rng) : 0.5;
        double t = ray.t_near + (i + jit) / n * range;
        c.ts[i] = (T)t;
        c.deltas[i] = (T)(t - prev);
        prev = t;
    }

    out.weights.assign(n, T(0));
    out.trans.assign(n + 1, T(0));
    out.rgb[0] = out.rgb[1] = out.rgb[2] = 0;
    T acc_tau = 0, opacity = 0, depth_sum = 0;
    int i = 0;
    for (; i < n; ++i) {
        T trans = std::exp(-acc_tau);
        out.trans[i] = trans;
        if (early_stop > 0 && trans < early_stop) break;
        Vec3 p = ray.origin + ray.direction * (double)c.ts[i];
        if (cfg_.domain.contains(p)) {
            c.in_domain[i] = 1;
            encode(p, &c.enc[(size_t)i * enc_dim],
                   &c.corner_idx[(size_t)i * cfg_.levels * 8],
                   &c.corner_w[(size_t)i * cfg_.levels * 8]);
            forward_sample(i, c);
        }
        T alpha = -std::expm1(-c.sigma[i] * c.deltas[i]);
        T w = trans * alpha;
        out.weights[i] = w;
        opacity += w;
        depth_sum += w * c.ts[i];
        for (int k = 0; k < 3; ++k) out.rgb[k] += w * c.rgb[(size_t)i * 3 + k];
        acc_tau += c.sigma[i] * c.deltas[i];
    }
    c.n_eval = i;
    for (int j = i; j <= n; ++j) out.trans[j] = std::exp(-acc_tau);
    out.opacity = opacity;
    out.depth = depth_sum / std::max(opacity, (T)kDepthOpacityFloor);
    if (!std::isfinite((double)out.rgb[0]) || !std::isfinite((double)out.depth))
        throw std::runtime_error("render_ray produced non-finite output");
}

template <typename T>
void Field<T>::render_backward(const RayCache<T>& c, const RenderResult<T>& res,
                               const T d_rgb[3], T d_depth, const T* dw_extra) {
    const int n = c.n_eval;
    const int enc_dim = cfg_.enc_dim(), hid = cfg_.hidden, gout = 1 + cfg_.geo_feats;
    const int cin_dim = cfg_.geo_feats + kShDim, ch = cfg_.color_hidden;

    // dL/dw_i from color, depth and any direct per-weight term
    T gw_buf[1024];
    std::vector<T> gw_heap;
    T* gw = gw_buf;
    if (n > 1024) { gw_heap.resize(n); gw = gw_heap.data(); }
    const bool above_floor = res.opacity > (T)kDepthOpacityFloor;
    for (int i = 0; i < n; ++i) {
        T g = 0;
        for (int k = 0; k < 3; ++k) g += d_rgb[k] * c.rgb[(size_t)i * 3 + k];
        T dDdw = above_floor ? (c.ts[i] - res.depth) / res.opacity
                             : c.ts[i] / (T)kDepthOpacityFloor;
        g += d_depth * dDdw;
        if (dw_extra) g += dw_extra[i];
        gw[i] = g;
    }

    // through compositing to per-sample density, suffix accumulation
    T dsig_buf[1024];
    std::vector<T> dsig_heap;
    T* dsigma = dsig_buf;
    if (n > 1024) { dsig_heap.resize(n); dsigma = dsig_heap.data(); }
    T suffix = 0;
    for (int i = n - 1; i >= 0; --i) {
        T e = std::exp(-c.sigma[i] * c.deltas[i]);
        dsigma[i] = c.deltas[i] * (gw[i] * res.trans[i] * e - suffix);
        suffix += gw[i] * res.weights[i];
    }

    T cin[128], dcin[128], dh[128], dh2[128];
    for (int s = 0; s < n; ++s) {
        if (!c.in_domain[s]) continue;
        const T* enc = &c.enc[(size_t)s * enc_dim];
        const T* h1 = &c.h1[(size_t)s * hid];
        const T* geo = &c.geo_out[(size_t)s * gout];
        const T* c1 = &c.c1[(size_t)s * ch];
        const T* c2 = &c.c2[(size_t)s * ch];
        const T* rgb = &c.rgb[(size_t)s * 3];
        const T w_s = res.weights[s];

        // color head backward
        T dc3[3];
        for (int k = 0; k < 3; ++k) dc3[k] = d_rgb[k] * w_s * rgb[k] * (1 - rgb[k]);
        for (int j = 0; j < ch; ++j) dh[j] = 0;
        for (int k = 0; k < 3; ++k) {
            const T* __restrict w = &params_[off_cw3_ + (size_t)k * ch];
            T* __restrict gwt = &grad_[off_cw3_ + (size_t)k * ch];
            for (int j = 0; j < ch; ++j) {
                gwt[j] += dc3[k] * c2[j];
                dh[j] += dc3[k] * w[j];
            }
            grad_[off_cb3_ + k] += dc3[k];
        }
        for (int j = 0; j < ch; ++j) dh[j] = c2[j] > 0 ? dh[j] : 0;
        for (int j = 0; j < ch; ++j) dh2[j] = 0;
        for (int k = 0; k < ch; ++k) {
            const T* __restrict w = &params_[off_cw2_ + (size_t)k * ch];
            T* __restrict gwt = &grad_[off_cw2_ + (size_t)k * ch];
            const T d = dh[k];
            if (d != 0) {
                for (int j = 0; j < ch; ++j) {
                    gwt[j] += d * c1[j];
                    dh2[j] += d * w[j];
                }
                grad_[off_cb2_ + k] += d;
            }
        }
        for (int j = 0; j < ch; ++j) dh2[j] = c1[j] > 0 ? dh2[j] : 0;
        for (int i = 0; i < cfg_.geo_feats; ++i) cin[i] = geo[1 + i];
        for (int i = 0; i < kShDim; ++i) cin[cfg_.geo_feats + i] = c.sh[i];
        for (int i = 0; i < cin_dim; ++i) dcin[i] = 0;
        for (int k = 0; k < ch; ++k) {
            const T* __restrict w = &params_[off_cw1_ + (size_t)k * cin_dim];
            T* __restrict gwt = &grad_[off_cw1_ + (size_t)k * cin_dim];
            const T d = dh2[k];
            if (d != 0) {
                for (int i = 0; i < cin_dim; ++i) {
                    gwt[i] += d * cin[i];
                    dcin[i] += d * w[i];
                }
                grad_[off_cb1_ + k] += d;
            }
        }

        // density head backward
        T dgeo[64];
        dgeo[0] = dsigma[s] * sigmoid(geo[0]);
        for (int i = 0; i < cfg_.geo_feats; ++i) dgeo[1 + i] = dcin[i];
        for (int j = 0; j < hid; ++j) dh[j] = 0;
        for (int k = 0; k < gout; ++k) {
            const T* __restrict w = &params_[off_dw2_ + (size_t)k * hid];
            T* __restrict gwt = &grad_[off_dw2_ + (size_t)k * hid];
            const T d = dgeo[k];
            for (int j = 0; j < hid; ++j) {
                gwt[j] += d * h1[j];
                dh[j] += d * w[j];
            }
            grad_[off_db2_ + k] += d;
        }
        for (int j = 0; j < hid; ++j) dh[j] = h1[j] > 0 ? dh[j] : 0;
        T denc[128];
        for (int i = 0; i < enc_dim; ++i) denc[i] = 0;
        for (int k = 0; k < hid; ++k) {
            const T* __restrict w = &params_[off_dw1_ + (size_t)k * enc_dim];
            T* __restrict gwt = &grad_[off_dw1_ + (size_t)k * enc_dim];
            const T d = dh[k];
            if (d != 0) {
                for (int i = 0; i < enc_dim; ++i) {
                    gwt[i] += d * enc[i];
                    denc[i] += d * w[i];
                }
                grad_[off_db1_ + k] += d;
            }
        }

        // hash grid scatter
        const uint32_t* idx = &c.corner_idx[(size_t)s * cfg_.levels * 8];
        const T* cw = &c.corner_w[(size_t)s * cfg_.levels * 8];
        for (int k = 0; k < cfg_.levels * 8; ++k) {
            __builtin_prefetch(&touch_stamp_[idx[k]], 1, 1);
            __builtin_prefetch(&grad_[(size_t)idx[k] * cfg_.feats], 1, 1);
        }
        for (int l = 0; l < cfg_.levels; ++l) {
            for (int k = 0; k < 8; ++k) {
                const uint32_t entry = idx[l * 8 + k];
                const T w = cw[l * 8 + k];
                if (touch_stamp_[entry] != stamp_) {
                    touch_stamp_[entry] = stamp_;
                    touched_.push_back(entry);
                }
                T* g = &grad_[(size_t)entry * cfg_.feats];
                for (int f = 0; f < cfg_.feats; ++f)
                    g[f] += w * denc[l * cfg_.feats + f];
            }
        }
    }
}

template <typename T>
void Field<T>::zero_grad() {
    for (uint32_t entry : touched_)
        for (int f = 0; f < cfg_.feats; ++f) grad_[(size_t)entry * cfg_.feats + f] = 0;
    touched_.clear();
    ++stamp_;
    std::fill(grad_.begin() + off_dw1_, grad_.end(), T(0));
}

template <typename T>
void Field<T>::adam_step(T lr, T beta1, T beta2, T eps) {
    ++adam_t_;
    const T bc1 = T(1) - std::pow(beta1, (T)adam_t_);
    const T bc2 = T(1) - std::pow(beta2, (T)adam_t_);
    auto update = [&](size_t k) {
        T g = grad_[k];
        adam_m_[k] = beta1 * adam_m_[k] + (1 - beta1) * g;
        adam_v_[k] = beta2 * adam_v_[k] + (1 - beta2) * g * g;
        T mh = adam_m_[k] / bc1, vh = adam_v_[k] / bc2;
        params_[k] -= lr * mh / (std::sqrt(vh) + eps);
    };
    // hash entries: lazy, touched only
    for (uint32_t entry : touched_)
        for (int f = 0; f < cfg_.feats; ++f) update((size_t)entry * cfg_.feats + f);
    for (size_t k = off_dw1_; k < params_.size(); ++k) update(k);
}

template <typename T>
Panorama Field<T>::render_panorama_rgb(const Pose& pose, int width, int height, int n_samples,
                                       DepthPanorama* depth_out) const {
    Panorama out(width, height);
    out.pose = pose;
    if (depth_out) {
        *depth_out = DepthPanorama(width, height);
        depth_out->pose = pose;
    }
    std::mt19937_64 rng(0);
    RayCache<T> cache;
    RenderResult<T> res;
    for (int j = 0; j < height; ++j) {
        for (int i = 0; i < width; ++i) {
            geometry::Ray ray;
            ray.origin = pose.position;
            ray.direction = geometry::pixel_to_direction(i, j, width, height);
            double t0, t1;
            if (!intersect_ray_box(ray.origin, ray.direction, cfg_.domain, t0, t1) || t1 <= 1e-4)
                continue;
            ray.t_near = std::max(t0, 1e-3);
            ray.t_far = t1;
            render_ray(ray, n_samples, false, rng, &cache, res, (T)1e-4);
            float* p = out.px(i, j);
            p[0] = (float)res.rgb[0];
            p[1] = (float)res.rgb[1];
            p[2] = (float)res.rgb[2];
            if (depth_out && res.opacity > (T)1e-3)
                depth_out->at(i, j) = (double)res.depth;
        }
    }
    return out;
}

template <typename T>
void Field<T>::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    const char magic[4] = {'P', 'N', 'R', 'F'};
    uint32_t version = 2;
    out.write(magic, 4);
    out.write((const char*)&version, 4);
    int32_t ints[8] = {cfg_.levels, cfg_.log2_table, cfg_.feats, cfg_.base_res,
                       cfg_.finest_res, cfg_.geo_feats, cfg_.hidden, cfg_.color_hidden};
    out.write((const char*)ints, sizeof ints);
    double box[6] = {cfg_.domain.lo.x, cfg_.domain.lo.y, cfg_.domain.lo.z,
                     cfg_.domain.hi.x, cfg_.domain.hi.y, cfg_.domain.hi.z};
    out.write((const char*)box, sizeof box);
    int32_t nres = (int32_t)res_.size();
    out.write((const char*)&nres, 4);
    for (int r : res_) {
        int32_t v = r;
        out.write((const char*)&v, 4);
    }
    uint64_t count = params_.size();
    out.write((const char*)&count, 8);
    std::vector<float> buf(params_.begin(), params_.end());
    out.write((const char*)buf.data(), (std::streamsize)(buf.size() * 4));
    // optimizer state so a resumed run continues bit-identically
    int64_t adam_t = adam_t_;
    out.write((const char*)&adam_t, 8);
    buf.assign(adam_m_.begin(), adam_m_.end());
    out.write((const char*)buf.data(), (std::streamsize)(buf.size() * 4));
    buf.assign(adam_v_.begin(), adam_v_.end());
    out.write((const char*)buf.data(), (std::streamsize)(buf.size() * 4));
    if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

template <typename T>
Field<T> Field<T>::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    uint32_t version;
    in.read(magic, 4);
    in.read((char*)&version, 4);
    if (std::strncmp(magic, "PNRF", 4) != 0 || version != 2)
        throw std::runtime_error("bad checkpoint header: " + path);
    int32_t ints[8];
    in.read((char*)ints, sizeof ints);
    double box[6];
    in.read((char*)box, sizeof box);
    FieldConfig cfg;
    cfg.levels = ints[0];
    cfg.log2_table = ints[1];
    cfg.feats = ints[2];
    cfg.base_res = ints[3];
    cfg.finest_res = ints[4];
    cfg.geo_feats = ints[5];
    cfg.hidden = ints[6];
    cfg.color_hidden = ints[7];
    cfg.domain = {{box[0], box[1], box[2]}, {box[3], box[4], box[5]}};
    int32_t nres;
    in.read((char*)&nres, 4);
    std::vector<int32_t> res(nres);
    in.read((char*)res.data(), (std::streamsize)nres * 4);
    uint64_t count;
    in.read((char*)&count, 8);
    Field f(cfg, 0);
    if (count != f.params_.size())
        throw std::runtime_error("checkpoint parameter count mismatch: " + path);
    std::vector<float> buf(count);
    in.read((char*)buf.data(), (std::streamsize)(count * 4));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    for (size_t k = 0; k < count; ++k) f.params_[k] = (T)buf[k];
    int64_t adam_t = 0;
    in.read((char*)&adam_t, 8);
    f.adam_t_ = (long)adam_t;
    in.read((char*)buf.data(), (std::streamsize)(count * 4));
    for (size_t k = 0; k < count; ++k) f.adam_m_[k] = (T)buf[k];
    in.read((char*)buf.data(), (std::streamsize)(count * 4));
    for (size_t k = 0; k < count; ++k) f.adam_v_[k] = (T)buf[k];
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return f;
}

template <typename T>
void composite_samples(const std::vector<T>& sigma, const std::vector<T>& rgb,
                       const std::vector<T>& ts, const std::vector<T>& deltas,
                       RenderResult<T>& out) {
    const int n = (int)sigma.size();
    if ((int)rgb.size() != 3 * n || (int)ts.size() != n || (int)deltas.size() != n)
        throw std::invalid_argument("composite_samples: size mismatch");
    out.weights.assign(n, T(0));
    out.trans.assign(n + 1, T(0));
    out.rgb[0] = out.rgb[1] = out.rgb[2] = 0;
    T acc_tau = 0, opacity = 0, depth_sum = 0;
    for (int i = 0; i < n; ++i) {
        T trans = std::exp(-acc_tau);
        out.trans[i] = trans;
        T alpha = -std::expm1(-sigma[i] * deltas[i]);
        T w = trans * alpha;
        out.weights[i] = w;
        opacity += w;
        depth_sum += w * ts[i];
        for (int k = 0; k < 3; ++k) out.rgb[k] += w * rgb[(size_t)i * 3 + k];
        acc_tau += sigma[i] * deltas[i];
    }
    out.trans[n] = std::exp(-acc_tau);
    out.opacity = opacity;
    out.depth = depth_sum / std::max(opacity, (T)kDepthOpacityFloor);
}

template <typename T>
T distortion_loss(const std::vector<T>& s, const std::vector<T>& ds,
                  const std::vector<T>& w, T* grad_w) {
    const int n = (int)w.size();
    T loss = 0;
    T pw = 0, pws = 0;  // prefix sums of w and w*s
    std::vector<T> pwv(n), pwsv(n);
    for (int i = 0; i < n; ++i) {
        pwv[i] = pw;
        pwsv[i] = pws;
        loss += 2 * w[i] * (s[i] * pw - pws);
        loss += w[i] * w[i] * ds[i] / 3;
        pw += w[i];
        pws += w[i] * s[i];
    }
    if (grad_w) {
        T sw = 0, sws = 0;  // suffix sums
        for (int i = n - 1; i >= 0; --i) {
            grad_w[i] = 2 * (s[i] * pwv[i] - pwsv[i]) + 2 * (sws - s[i] * sw) +
                        2 * w[i] * ds[i] / 3;
            sw += w[i];
            sws += w[i] * s[i];
        }
    }
    return loss;
}

template class Field<float>;
template class Field<double>;
template void composite_samples<float>(const std::vector<float>&, const std::vector<float>&,
                                       const std::vector<float>&, const std::vector<float>&,
                                       RenderResult<float>&);
template void composite_samples<double>(const std::vector<double>&, const std::vector<double>&,
                                        const std::vector<double>&, const std::vector<double>&,
                                        RenderResult<double>&);
template float distortion_loss<float>(const std::vector<float>&, const std::vector<float>&,
                                      const std::vector<float>&, float*);
template double distortion_loss<double>(const std::vector<double>&, const std::vector<double>&,
                                        const std::vector<double>&, double*);

}  // namespace pano::field
