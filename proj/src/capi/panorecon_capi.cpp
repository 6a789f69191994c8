// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "panorecon/panorecon.h"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "core/config.hpp"
#include "core/imageio.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"
#include "core/synthscene.hpp"
#include "core/trajectory.hpp"

namespace {

thread_local std::string g_last_error;

template <typename F>
pr_status wrap(F&& f) {
    try {
        f();
        return PR_OK;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return PR_ERR_INVALID_ARGUMENT;
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return PR_ERR_IO;
    } catch (const std::ios_base::failure& e) {
        g_last_error = e.what();
        return PR_ERR_IO;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return PR_ERR_RUNTIME;
    }
}

void require(bool cond, const char* what) {
    if (!cond) throw std::invalid_argument(what);
}

pano::Config parse_config(const char* config_text) {
    if (!config_text || !*config_text) return pano::Config{};
    return pano::parse_config_text(config_text);
}

}  // namespace

struct pr_scene {
    pano::synthscene::BoxScene scene;
};

struct pr_run {
    std::string dir;
    pano::Config cfg;
    pano::pipeline::State state;
};

extern "C" {

const char* pr_last_error(void) { return g_last_error.c_str(); }

pr_status pr_scene_open(const char* scene_file, pr_scene** out) {
    return wrap([&] {
        require(scene_file && out, "scene_file and out must be non-null");
        *out = new pr_scene{pano::synthscene::load_scene(scene_file)};
    });
}

pr_status pr_scene_make_default(pr_scene** out) {
    return wrap([&] {
        require(out != nullptr, "out must be non-null");
        *out = new pr_scene{pano::synthscene::make_default_scene()};
    });
}

pr_status pr_scene_save(const pr_scene* scene, const char* scene_file) {
    return wrap([&] {
        require(scene && scene_file, "scene and scene_file must be non-null");
        pano::synthscene::save_scene(scene->scene, scene_file);
    });
}

pr_status pr_scene_render(const pr_scene* scene, double x, double y, double z, int width,
                          int height, const char* rgb_png, const char* depth_png) {
    return wrap([&] {
        require(scene && rgb_png, "scene and rgb_png must be non-null");
        pano::Pose pose{{x, y, z}};
        pano::Panorama rgb;
        pano::DepthPanorama depth;
        pano::synthscene::render_ground_truth(scene->scene, pose, width, height, rgb, depth);
        pano::io::save_png(rgb, rgb_png);
        if (depth_png) pano::io::save_depth(depth, depth_png);
    });
}

void pr_scene_free(pr_scene* scene) { delete scene; }

pr_status pr_fuse_depth(const char* pano_png, const char* config_text,
                        const char* out_depth_png) {
    return wrap([&] {
        require(pano_png && out_depth_png, "pano_png and out_depth_png must be non-null");
        pano::Config cfg = parse_config(config_text);
        pano::Panorama pano = pano::io::load_png(pano_png);
        auto est = pano::pipeline::make_estimator(cfg);
        pano::DepthPanorama depth = pano::depthfusion::estimate_panorama_depth(
            pano, *est, cfg.fusion_views, cfg.fusion_persp_size, cfg.solver_iters);
        pano::io::save_depth(depth, out_depth_png);
    });
}

pr_status pr_run_create(const char* run_dir, const char* pano_png, const char* depth_png,
                        const char* config_text, pr_run** out) {
    return wrap([&] {
        require(run_dir && pano_png && out, "run_dir, pano_png and out must be non-null");
        auto run = std::make_unique<pr_run>();
        run->dir = run_dir;
        run->cfg = parse_config(config_text);
        pano::Panorama pano = pano::io::load_png(pano_png);
        pano::DepthPanorama depth;
        if (depth_png) depth = pano::io::load_depth(depth_png);
        auto est = pano::pipeline::make_estimator(run->cfg);
        auto inp = pano::pipeline::make_inpainter(run->cfg);
        std::ofstream log((std::filesystem::path(run_dir) / "pipeline.log"), std::ios::app);
        run->state = pano::pipeline::run(pano, depth_png ? &depth : nullptr, run->cfg, *est,
                                         *inp, run->dir, &log, 0);
        *out = run.release();
    });
}

pr_status pr_run_open(const char* run_dir, pr_run** out) {
    return wrap([&] {
        require(run_dir && out, "run_dir and out must be non-null");
        auto run = std::make_unique<pr_run>();
        run->dir = run_dir;
        run->cfg = pano::pipeline::load_run_config(run_dir);
        run->state = pano::pipeline::load_run(run_dir);
        *out = run.release();
    });
}

pr_status pr_run_complete(pr_run* run, long max_views) {
    return wrap([&] {
        require(run != nullptr, "run must be non-null");
        auto est = pano::pipeline::make_estimator(run->cfg);
        auto inp = pano::pipeline::make_inpainter(run->cfg);
        std::ofstream log((std::filesystem::path(run->dir) / "pipeline.log"), std::ios::app);
        run->state = pano::pipeline::run(run->state.refs.at(0).rgb, nullptr, run->cfg, *est,
                                         *inp, run->dir, &log, max_views);
    });
}

pr_status pr_run_progress(const pr_run* run, size_t* views_done, size_t* views_total) {
    return wrap([&] {
        require(run != nullptr, "run must be non-null");
        if (views_done) *views_done = run->state.views_done;
        if (views_total) *views_total = run->state.poses.size();
    });
}

pr_status pr_run_render_pose(const pr_run* run, double x, double y, double z,
                             const char* out_png, const char* out_depth_png) {
    return wrap([&] {
        require(run && out_png, "run and out_png must be non-null");
        const pano::Panorama& input = run->state.refs.at(0).rgb;
        pano::DepthPanorama depth;
        pano::Panorama img = pano::pipeline::render_novel(
            run->state.field, pano::Pose{{x, y, z}}, input.width, input.height,
            run->cfg.n_samples, out_depth_png ? &depth : nullptr);
        pano::io::save_png(img, out_png);
        if (out_depth_png) pano::io::save_depth(depth, out_depth_png);
    });
}

pr_status pr_run_render_path(const pr_run* run, const char* trajectory_file,
                             const char* out_dir, size_t* n_frames) {
    return wrap([&] {
        require(run && trajectory_file && out_dir, "run, trajectory_file and out_dir needed");
        std::vector<pano::Pose> poses = pano::trajectory::load_trajectory(trajectory_file);
        const pano::Panorama& input = run->state.refs.at(0).rgb;
        size_t n = pano::pipeline::render_path(run->state.field, poses, input.width,
                                               input.height, run->cfg.n_samples, out_dir);
        if (n_frames) *n_frames = n;
    });
}

pr_status pr_run_eval(const pr_run* run, const char* gt_png, const char* gt_depth_png,
                      double x, double y, double z, const char* report_path) {
    return wrap([&] {
        require(run && gt_png && report_path, "run, gt_png and report_path must be non-null");
        pano::Panorama gt = pano::io::load_png(gt_png);
        pano::DepthPanorama depth;
        pano::Panorama img = pano::pipeline::render_novel(run->state.field, pano::Pose{{x, y, z}},
                                                          gt.width, gt.height,
                                                          run->cfg.n_samples, &depth);
        std::vector<pano::metrics::MetricRecord> records;
        std::string view = "pose(" + std::to_string(x) + "," + std::to_string(y) + "," +
                           std::to_string(z) + ")";
        records.push_back({"psnr", view, pano::metrics::psnr(img, gt)});
        records.push_back({"ssim", view, pano::metrics::ssim(img, gt)});
        if (gt_depth_png) {
            pano::DepthPanorama gt_depth = pano::io::load_depth(gt_depth_png);
            records.push_back({"depth_error", view, pano::metrics::depth_error(depth, gt_depth)});
        }
        std::ofstream out(report_path, std::ios::trunc);
        out << pano::metrics::format_report(records);
        if (!out) throw std::runtime_error(std::string("cannot write ") + report_path);
    });
}

void pr_run_free(pr_run* run) { delete run; }

}  // extern "C"
