// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "geometry.hpp"
#include "raster.hpp"

namespace pano::field {

struct FieldConfig {
    Aabb domain{{-1, -1, -1}, {1, 1, 1}};
    int levels = 16;
    int log2_table = 19;
    int feats = 2;           // feature channels per level
    int base_res = 16;
    int finest_res = 2048;
    int geo_feats = 15;      // geometry features fed to the color head
    int hidden = 64;         // density head hidden width
    int color_hidden = 64;   // color head hidden width (two layers)

    int table_size() const { return 1 << log2_table; }
    int enc_dim() const { return levels * feats; }
    std::vector<int> level_resolutions() const;
};

inline constexpr int kShDim = 16;  // real spherical harmonics, degrees 0..3
inline constexpr double kDepthOpacityFloor = 1e-6;

template <typename T>
struct RenderResult {
    T rgb[3] = {0, 0, 0};
    T depth = 0;
    T opacity = 0;
    std::vector<T> weights;
    std::vector<T> trans;  // N+1 entries, trans[N] = T_{N+1}
};

// Per-ray forward cache kept for the backward pass.
template <typename T>
struct RayCache {
    int n = 0;       // samples requested
    int n_eval = 0;  // samples actually evaluated (early termination)
    std::vector<T> ts, deltas;       // n
    std::vector<uint8_t> in_domain;  // n
    std::vector<T> sigma;            // n
    std::vector<T> rgb;              // 3n
    T sh[kShDim];
    // activations, all sized for n_eval in-domain samples (dense over n)
    std::vector<T> enc;       // n x enc_dim
    std::vector<T> h1;        // n x hidden (post-relu)
    std::vector<T> geo_out;   // n x (1+geo_feats), pre-activation
    std::vector<T> c1, c2;    // n x color_hidden (post-relu)
    std::vector<T> c3;        // n x 3, pre-sigmoid
    std::vector<uint32_t> corner_idx;  // n x levels x 8 (global hash offsets)
    std::vector<T> corner_w;           // n x levels x 8
    // weight matrices transposed to [in][out] for the forward pass
    std::vector<T> wt1, wt2, wtc1, wtc2;
    T t_near = 0, t_far = 0;
};

// Multi-resolution hash-grid radiance field with tiny MLP heads.
// Gradients accumulate into an internal buffer; hash entries are updated
// lazily (only touched entries see an optimizer step).
template <typename T>
class Field {
public:
    Field() = default;
    Field(const FieldConfig& cfg, uint64_t seed);

    const FieldConfig& config() const { return cfg_; }
    std::vector<T>& params() { return params_; }
    const std::vector<T>& params() const { return params_; }
    std::vector<T>& grad() { return grad_; }
    size_t hash_param_count() const { return hash_count_; }

    // Density and color at a point; x outside the domain yields (0, black).
    void query(const Vec3& x, const Vec3& d, T& sigma, T rgb[3]) const;

    // Uniform (optionally stratified) sampling in [t_near, t_far] and
    // alpha compositing. early_stop > 0 stops once transmittance drops
    // below it; pass 0 for the exact contract used in tests.
    void render_ray(const geometry::Ray& ray, int n_samples, bool stratified,
                    std::mt19937_64& rng, RayCache<T>* cache, RenderResult<T>& out,
                    T early_stop = 0) const;

    // Backward through compositing and the networks. d_rgb/d_depth are the
    // loss gradients w.r.t. the rendered color and depth; dw_extra (may be
    // null) adds a direct per-sample dL/dw_i term (distortion loss).
    void render_backward(const RayCache<T>& cache, const RenderResult<T>& res,
                         const T d_rgb[3], T d_depth, const T* dw_extra);

    void zero_grad();
    void adam_step(T lr, T beta1 = T(0.9), T beta2 = T(0.999), T eps = T(1e-15));

    Panorama render_panorama_rgb(const Pose& pose, int width, int height, int n_samples,
                                 DepthPanorama* depth_out = nullptr) const;

    void save(const std::string& path) const;
    static Field load(const std::string& path);

private:
    void encode(const Vec3& x, T* enc, uint32_t* corner_idx, T* corner_w) const;
    void transpose_weights(RayCache<T>& c) const;
    void forward_sample(int s, RayCache<T>& c) const;

    FieldConfig cfg_;
    std::vector<int> res_;
    std::vector<T> params_, grad_;
    std::vector<T> adam_m_, adam_v_;
    std::vector<uint32_t> touch_stamp_;    // per hash entry
    std::vector<uint32_t> touched_;        // hash entries hit this step
    uint32_t stamp_ = 0;
    long adam_t_ = 0;
    size_t hash_count_ = 0;
    // offsets into params_
    size_t off_dw1_, off_db1_, off_dw2_, off_db2_;
    size_t off_cw1_, off_cb1_, off_cw2_, off_cb2_, off_cw3_, off_cb3_;
};

// Alpha compositing of explicit per-sample densities and colors, the same
// rule render_ray applies to network outputs. rgb is 3 per sample.
template <typename T>
void composite_samples(const std::vector<T>& sigma, const std::vector<T>& rgb,
                       const std::vector<T>& ts, const std::vector<T>& deltas,
                       RenderResult<T>& out);

// L = sum_ij w_i w_j |s_i - s_j| + (1/3) sum_i w_i^2 ds_i over the
// normalized ray coordinate; O(N) via prefix sums. grad_w may be null.
template <typename T>
T distortion_loss(const std::vector<T>& s, const std::vector<T>& ds,
                  const std::vector<T>& w, T* grad_w);

void sh_basis(const Vec3& d, double* out16);

// Scene bounds: box enclosing the depth map's point cloud, inflated 1.2x.
Aabb domain_from_depth(const DepthPanorama& depth, double inflate = 1.2);

extern template class Field<float>;
extern template class Field<double>;
extern template void composite_samples<float>(const std::vector<float>&, const std::vector<float>&,
                                              const std::vector<float>&, const std::vector<float>&,
                                              RenderResult<float>&);
extern template void composite_samples<double>(const std::vector<double>&,
                                               const std::vector<double>&,
                                               const std::vector<double>&,
                                               const std::vector<double>&, RenderResult<double>&);
extern template float distortion_loss<float>(const std::vector<float>&, const std::vector<float>&,
                                             const std::vector<float>&, float*);
extern template double distortion_loss<double>(const std::vector<double>&, const std::vector<double>&,
                                               const std::vector<double>&, double*);

}  // namespace pano::field
