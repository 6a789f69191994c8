// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace pano {

// Full workflow configuration, overridable per key from a plain-text
// "key = value" file and from CLI flags of the same name.
struct Config {
    // training
    int rays_per_step = 2048;
    int init_steps = 10000;
    int per_view_steps = 2000;
    int new_view_only_steps = 100;
    double lr_start = 1e-3;
    double lr_end = 1e-4;
    double lambda_depth = 1.0;
    double lambda_dist = 1.0;
    long seed = 0;
    int n_samples = 128;
    // field
    int hash_levels = 16;
    int hash_log2_table = 19;
    int hash_base_res = 16;
    int hash_finest_res = 2048;
    // depth fusion
    int fusion_views = 20;
    int fusion_persp_size = 128;
    int solver_iters = 2000;
    // inpainting
    std::string inpainter = "mock";  // mock | service | oracle
    std::string estimator = "oracle";  // oracle | service | constant
    std::string inpaint_url = "http://127.0.0.1:8601";
    std::string depth_url = "http://127.0.0.1:8602";
    double roi_fov_deg = 90.0;
    int roi_size = 512;
    double eps_rel = 0.05;
    std::string conflict_mode = "all";  // all | any
    std::string scene_file;  // backing scene for the oracle implementations
    // trajectory
    std::vector<double> traj_scales = {0.15, 0.3, 0.45, 0.6};
    int traj_per_curve = 8;
    // service client
    int http_timeout_sec = 60;
    int http_retries = 2;
    // runtime
    int threads = 0;  // 0 = auto

    void set(const std::string& key, const std::string& value);
    static std::vector<std::string> valid_keys();
    std::string to_text() const;
    // FNV-1a over the canonical text form.
    std::string hash() const;
};

Config load_config(const std::string& path);
Config parse_config_text(const std::string& text);

}  // namespace pano
