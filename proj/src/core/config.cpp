// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pano {

namespace {

std::string join_keys() {
    std::string s;
    for (const auto& k : Config::valid_keys()) {
        if (!s.empty()) s += ", ";
        s += k;
    }
    return s;
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

std::string format_list(const std::vector<double>& v) {
    std::ostringstream ss;
    for (size_t k = 0; k < v.size(); ++k) {
        if (k) ss << ',';
        ss << v[k];
    }
    return ss.str();
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<std::string> Config::valid_keys() {
    return {"rays_per_step", "init_steps", "per_view_steps", "new_view_only_steps",
            "lr_start", "lr_end", "lambda_depth", "lambda_dist", "seed", "n_samples",
            "hash_levels", "hash_log2_table", "hash_base_res", "hash_finest_res",
            "fusion_views", "fusion_persp_size", "solver_iters",
            "inpainter", "estimator", "inpaint_url", "depth_url",
            "roi_fov_deg", "roi_size", "eps_rel", "conflict_mode", "scene_file",
            "traj_scales", "traj_per_curve", "http_timeout_sec", "http_retries", "threads"};
}

void Config::set(const std::string& key, const std::string& value) {
    if (key == "rays_per_step") rays_per_step = std::stoi(value);
    else if (key == "init_steps") init_steps = std::stoi(value);
    else if (key == "per_view_steps") per_view_steps = std::stoi(value);
    else if (key == "new_view_only_steps") new_view_only_steps = std::stoi(value);
    else if (key == "lr_start") lr_start = std::stod(value);
    else if (key == "lr_end") lr_end = std::stod(value);
    else if (key == "lambda_depth") lambda_depth = std::stod(value);
    else if (key == "lambda_dist") lambda_dist = std::stod(value);
    else if (key == "seed") seed = std::stol(value);
    else if (key == "n_samples") n_samples = std::stoi(value);
    else if (key == "hash_levels") hash_levels = std::stoi(value);
    else if (key == "hash_log2_table") hash_log2_table = std::stoi(value);
    else if (key == "hash_base_res") hash_base_res = std::stoi(value);
    else if (key == "hash_finest_res") hash_finest_res = std::stoi(value);
    else if (key == "fusion_views") fusion_views = std::stoi(value);
    else if (key == "fusion_persp_size") fusion_persp_size = std::stoi(value);
    else if (key == "solver_iters") solver_iters = std::stoi(value);
    else if (key == "inpainter") inpainter = value;
    else if (key == "estimator") estimator = value;
    else if (key == "inpaint_url") inpaint_url = value;
    else if (key == "depth_url") depth_url = value;
    else if (key == "roi_fov_deg") roi_fov_deg = std::stod(value);
    else if (key == "roi_size") roi_size = std::stoi(value);
    else if (key == "eps_rel") eps_rel = std::stod(value);
    else if (key == "conflict_mode") conflict_mode = value;
    else if (key == "scene_file") scene_file = value;
    else if (key == "traj_scales") traj_scales = parse_list(value);
    else if (key == "traj_per_curve") traj_per_curve = std::stoi(value);
    else if (key == "http_timeout_sec") http_timeout_sec = std::stoi(value);
    else if (key == "http_retries") http_retries = std::stoi(value);
    else if (key == "threads") threads = std::stoi(value);
    else
        throw std::invalid_argument("unknown config key '" + key +
                                    "'; valid keys: " + join_keys());
}

std::string Config::to_text() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << "rays_per_step = " << rays_per_step << '\n'
       << "init_steps = " << init_steps << '\n'
       << "per_view_steps = " << per_view_steps << '\n'
       << "new_view_only_steps = " << new_view_only_steps << '\n'
       << "lr_start = " << lr_start << '\n'
       << "lr_end = " << lr_end << '\n'
       << "lambda_depth = " << lambda_depth << '\n'
       << "lambda_dist = " << lambda_dist << '\n'
       << "seed = " << seed << '\n'
       << "n_samples = " << n_samples << '\n'
       << "hash_levels = " << hash_levels << '\n'
       << "hash_log2_table = " << hash_log2_table << '\n'
       << "hash_base_res = " << hash_base_res << '\n'
       << "hash_finest_res = " << hash_finest_res << '\n'
       << "fusion_views = " << fusion_views << '\n'
       << "fusion_persp_size = " << fusion_persp_size << '\n'
       << "solver_iters = " << solver_iters << '\n'
       << "inpainter = " << inpainter << '\n'
       << "estimator = " << estimator << '\n'
       << "inpaint_url = " << inpaint_url << '\n'
       << "depth_url = " << depth_url << '\n'
       << "roi_fov_deg = " << roi_fov_deg << '\n'
       << "roi_size = " << roi_size << '\n'
       << "eps_rel = " << eps_rel << '\n'
       << "conflict_mode = " << conflict_mode << '\n'
       << "scene_file = " << scene_file << '\n'
       << "traj_scales = " << format_list(traj_scales) << '\n'
       << "traj_per_curve = " << traj_per_curve << '\n'
       << "http_timeout_sec = " << http_timeout_sec << '\n'
       << "http_retries = " << http_retries << '\n'
       << "threads = " << threads << '\n';
    return ss.str();
}

std::string Config::hash() const {
    uint64_t h = 14695981039346656037ull;
    for (char c : to_text()) {
        h ^= (uint8_t)c;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

Config parse_config_text(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("bad config line (expected key = value): " + line);
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace pano
