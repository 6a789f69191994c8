// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end; all work happens behind the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "panorecon/panorecon.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// one CLI flag per config key; values go through the core parser
const std::vector<std::string> kConfigKeys = {
    "rays_per_step", "init_steps", "per_view_steps", "new_view_only_steps", "lr_start",
    "lr_end", "lambda_depth", "lambda_dist", "seed", "n_samples", "hash_levels",
    "hash_log2_table", "hash_base_res", "hash_finest_res", "fusion_views",
    "fusion_persp_size", "solver_iters", "inpainter", "estimator", "inpaint_url",
    "depth_url", "roi_fov_deg", "roi_size", "eps_rel", "conflict_mode", "scene_file",
    "traj_scales", "traj_per_curve", "http_timeout_sec", "http_retries", "threads"};

struct ConfigArgs {
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
    cmd->add_option("--config", args.config_file, "plain-text key = value config file");
    for (const std::string& key : kConfigKeys)
        cmd->add_option_function<std::string>(
            "--" + key, [&args, key](const std::string& v) { args.overrides[key] = v; },
            "override config key " + key);
}

int require_file(const std::string& path) {
    if (!std::filesystem::exists(path)) {
        std::fprintf(stderr, "error: no such file: %s\n", path.c_str());
        return kExitUsage;
    }
    return kExitOk;
}

// assembled config text: file content first, then flag overrides
std::string config_text(const ConfigArgs& args, int& rc) {
    std::ostringstream out;
    if (!args.config_file.empty()) {
        if ((rc = require_file(args.config_file)) != kExitOk) return "";
        std::ifstream in(args.config_file);
        out << in.rdbuf() << '\n';
    }
    for (const auto& [k, v] : args.overrides) out << k << " = " << v << '\n';
    rc = kExitOk;
    return out.str();
}

int fail(pr_status st) {
    std::fprintf(stderr, "error: %s\n", pr_last_error());
    return st == PR_ERR_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
}

bool parse_pose(const std::string& text, double p[3]) {
    return std::sscanf(text.c_str(), "%lf,%lf,%lf", &p[0], &p[1], &p[2]) == 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-panorama indoor scene reconstruction"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "render ground truth from a box scene file");
    std::string synth_scene, synth_pose = "0,0,0", synth_rgb, synth_depth;
    int synth_w = 256, synth_h = 128;
    bool synth_default = false;
    synth->add_option("scene", synth_scene, "scene file")->required();
    synth->add_option("--pose", synth_pose, "camera position x,y,z");
    synth->add_option("--width", synth_w, "panorama width");
    synth->add_option("--height", synth_h, "panorama height");
    synth->add_option("-o,--out", synth_rgb, "output RGB png")->required();
    synth->add_option("--depth-out", synth_depth, "output depth png");
    synth->add_flag("--make-default", synth_default,
                    "write the built-in default scene to the scene file first");

    // fuse-depth
    auto* fuse = app.add_subcommand("fuse-depth", "estimate panorama depth via the rig");
    std::string fuse_pano, fuse_out;
    ConfigArgs fuse_cfg;
    fuse->add_option("pano", fuse_pano, "input panorama png")->required();
    fuse->add_option("-o,--out", fuse_out, "output depth png")->required();
    add_config_options(fuse, fuse_cfg);

    // train
    auto* train = app.add_subcommand("train", "fuse depth and train the initial field");
    std::string train_pano, train_depth, train_rundir;
    ConfigArgs train_cfg;
    train->add_option("pano", train_pano, "input panorama png")->required();
    train->add_option("--depth", train_depth, "precomputed depth png");
    train->add_option("-o,--out", train_rundir, "run directory")->required();
    add_config_options(train, train_cfg);

    // complete
    auto* complete = app.add_subcommand("complete", "run the progressive completion loop");
    std::string complete_rundir;
    long complete_max = -1;
    complete->add_option("rundir", complete_rundir, "run directory")->required();
    complete->add_option("--max-views", complete_max, "limit loop iterations (-1 = all)");

    // render
    auto* render = app.add_subcommand("render", "render novel views from a trained run");
    std::string render_rundir, render_pose, render_path_file, render_out, render_depth;
    render->add_option("rundir", render_rundir, "run directory")->required();
    render->add_option("--pose", render_pose, "camera position x,y,z");
    render->add_option("--path", render_path_file, "trajectory file of pose_index x y z lines");
    render->add_option("-o,--out", render_out, "output png (pose) or frame directory (path)")
        ->required();
    render->add_option("--depth-out", render_depth, "also write rendered depth (pose mode)");

    // eval
    auto* eval = app.add_subcommand("eval", "metrics against a ground-truth panorama");
    std::string eval_rundir, eval_gt, eval_gt_depth, eval_pose = "0,0,0", eval_out;
    eval->add_option("rundir", eval_rundir, "run directory")->required();
    eval->add_option("--gt", eval_gt, "ground-truth panorama png")->required();
    eval->add_option("--gt-depth", eval_gt_depth, "ground-truth depth png");
    eval->add_option("--gt-pose", eval_pose, "ground-truth camera position x,y,z");
    eval->add_option("-o,--out", eval_out, "report file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    int rc = kExitOk;
    if (*synth) {
        double p[3];
        if (!parse_pose(synth_pose, p)) {
            std::fprintf(stderr, "error: bad --pose, expected x,y,z\n");
            return kExitUsage;
        }
        pr_scene* scene = nullptr;
        pr_status st;
        if (synth_default) {
            if ((st = pr_scene_make_default(&scene)) != PR_OK) return fail(st);
            if ((st = pr_scene_save(scene, synth_scene.c_str())) != PR_OK) {
                pr_scene_free(scene);
                return fail(st);
            }
        } else {
            if ((rc = require_file(synth_scene)) != kExitOk) return rc;
            if ((st = pr_scene_open(synth_scene.c_str(), &scene)) != PR_OK) return fail(st);
        }
        st = pr_scene_render(scene, p[0], p[1], p[2], synth_w, synth_h, synth_rgb.c_str(),
                             synth_depth.empty() ? nullptr : synth_depth.c_str());
        pr_scene_free(scene);
        if (st != PR_OK) return fail(st);
        return kExitOk;
    }

    if (*fuse) {
        if ((rc = require_file(fuse_pano)) != kExitOk) return rc;
        std::string cfg = config_text(fuse_cfg, rc);
        if (rc != kExitOk) return rc;
        pr_status st = pr_fuse_depth(fuse_pano.c_str(), cfg.c_str(), fuse_out.c_str());
        return st == PR_OK ? kExitOk : fail(st);
    }

    if (*train) {
        if ((rc = require_file(train_pano)) != kExitOk) return rc;
        if (!train_depth.empty() && (rc = require_file(train_depth)) != kExitOk) return rc;
        std::string cfg = config_text(train_cfg, rc);
        if (rc != kExitOk) return rc;
        pr_run* run = nullptr;
        pr_status st = pr_run_create(train_rundir.c_str(), train_pano.c_str(),
                                     train_depth.empty() ? nullptr : train_depth.c_str(),
                                     cfg.c_str(), &run);
        if (st != PR_OK) return fail(st);
        pr_run_free(run);
        return kExitOk;
    }

    if (*complete) {
        if ((rc = require_file(complete_rundir)) != kExitOk) return rc;
        pr_run* run = nullptr;
        pr_status st = pr_run_open(complete_rundir.c_str(), &run);
        if (st != PR_OK) return fail(st);
        st = pr_run_complete(run, complete_max);
        if (st == PR_OK) {
            size_t done = 0, total = 0;
            pr_run_progress(run, &done, &total);
            std::printf("completed %zu/%zu views\n", done, total);
        }
        pr_run_free(run);
        return st == PR_OK ? kExitOk : fail(st);
    }

    if (*render) {
        if ((rc = require_file(render_rundir)) != kExitOk) return rc;
        if (render_pose.empty() == render_path_file.empty()) {
            std::fprintf(stderr, "error: exactly one of --pose / --path is required\n");
            return kExitUsage;
        }
        pr_run* run = nullptr;
        pr_status st = pr_run_open(render_rundir.c_str(), &run);
        if (st != PR_OK) return fail(st);
        if (!render_pose.empty()) {
            double p[3];
            if (!parse_pose(render_pose, p)) {
                pr_run_free(run);
                std::fprintf(stderr, "error: bad --pose, expected x,y,z\n");
                return kExitUsage;
            }
            st = pr_run_render_pose(run, p[0], p[1], p[2], render_out.c_str(),
                                    render_depth.empty() ? nullptr : render_depth.c_str());
        } else {
            if ((rc = require_file(render_path_file)) != kExitOk) {
                pr_run_free(run);
                return rc;
            }
            size_t n = 0;
            st = pr_run_render_path(run, render_path_file.c_str(), render_out.c_str(), &n);
            if (st == PR_OK) std::printf("%zu frames\n", n);
        }
        pr_run_free(run);
        return st == PR_OK ? kExitOk : fail(st);
    }

    if (*eval) {
        if ((rc = require_file(eval_rundir)) != kExitOk) return rc;
        if ((rc = require_file(eval_gt)) != kExitOk) return rc;
        if (!eval_gt_depth.empty() && (rc = require_file(eval_gt_depth)) != kExitOk) return rc;
        double p[3];
        if (!parse_pose(eval_pose, p)) {
            std::fprintf(stderr, "error: bad --gt-pose, expected x,y,z\n");
            return kExitUsage;
        }
        pr_run* run = nullptr;
        pr_status st = pr_run_open(eval_rundir.c_str(), &run);
        if (st != PR_OK) return fail(st);
        std::string report = eval_out.empty()
                                 ? (std::filesystem::temp_directory_path() / "panorecon_eval.txt")
                                       .string()
                                 : eval_out;
        st = pr_run_eval(run, eval_gt.c_str(),
                         eval_gt_depth.empty() ? nullptr : eval_gt_depth.c_str(), p[0], p[1],
                         p[2], report.c_str());
        pr_run_free(run);
        if (st != PR_OK) return fail(st);
        if (eval_out.empty()) {
            std::ifstream in(report);
            std::cout << in.rdbuf();
        }
        return kExitOk;
    }

    return kExitUsage;
}
