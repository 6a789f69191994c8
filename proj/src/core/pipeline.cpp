// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "imageio.hpp"
#include "service.hpp"
#include "synthscene.hpp"
#include "trajectory.hpp"

namespace fs = std::filesystem;

namespace pano::pipeline {

namespace {

constexpr int kManifestVersion = 1;

void write_atomic(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << text;
        if (!out) throw std::runtime_error("cannot write " + tmp);
    }
    fs::rename(tmp, path);
}

std::string ref_base(const std::string& dir, size_t k) {
    return (fs::path(dir) / ("ref_" + std::to_string(k))).string();
}

void save_ref(const ReferenceView& r, const std::string& base) {
    io::save_png(r.rgb, base + "_rgb.png");
    io::save_depth(r.depth, base + "_depth.png");
    io::save_mask(r.supervision_mask, base + "_mask.png");
}

ReferenceView load_ref(const std::string& base, const Pose& pose) {
    ReferenceView r;
    r.rgb = io::load_png(base + "_rgb.png");
    r.depth = io::load_depth(base + "_depth.png");
    r.supervision_mask = io::load_mask(base + "_mask.png");
    r.pose = pose;
    r.rgb.pose = pose;
    r.depth.pose = pose;
    return r;
}

std::string manifest_path(const std::string& dir) {
    return (fs::path(dir) / "manifest.txt").string();
}

void persist(const State& st, const Config& cfg, const std::string& dir) {
    std::ostringstream m;
    m.precision(17);
    m << "panorecon-manifest " << kManifestVersion << '\n';
    m << "seed " << cfg.seed << '\n';
    m << "config_hash " << cfg.hash() << '\n';
    m << "erased " << st.erased_pixels << '\n';
    m << "n_poses " << st.poses.size() << '\n';
    for (const Pose& p : st.poses)
        m << "pose " << p.position.x << ' ' << p.position.y << ' ' << p.position.z << '\n';
    m << "views_done " << st.views_done << '\n';
    m << "n_refs " << st.refs.size() << '\n';
    for (size_t k = 0; k < st.refs.size(); ++k) {
        const Pose& p = st.refs[k].pose;
        m << "ref " << k << " ref_" << k << " " << p.position.x << ' ' << p.position.y << ' '
          << p.position.z << '\n';
    }
    m << "field field.ckpt\n";
    st.field.save((fs::path(dir) / "field.ckpt").string());
    write_atomic(manifest_path(dir), m.str());
}

trainer::TrainConfig train_config(const Config& cfg, const std::string& run_dir,
                                  std::ostream* log) {
    trainer::TrainConfig tc;
    tc.rays_per_step = cfg.rays_per_step;
    tc.init_steps = cfg.init_steps;
    tc.per_view_steps = cfg.per_view_steps;
    tc.new_view_only_steps = cfg.new_view_only_steps;
    tc.lr_start = cfg.lr_start;
    tc.lr_end = cfg.lr_end;
    tc.lambda_depth = cfg.lambda_depth;
    tc.lambda_dist = cfg.lambda_dist;
    tc.seed = (uint64_t)cfg.seed;
    tc.n_samples = cfg.n_samples;
    tc.log = log;
    if (!run_dir.empty()) {
        fs::create_directories(fs::path(run_dir) / "ckpt");
        tc.checkpoint_dir = (fs::path(run_dir) / "ckpt").string();
    }
    return tc;
}

field::FieldConfig field_config(const Config& cfg, const Aabb& domain) {
    field::FieldConfig fc;
    fc.domain = domain;
    fc.levels = cfg.hash_levels;
    fc.log2_table = cfg.hash_log2_table;
    fc.base_res = cfg.hash_base_res;
    fc.finest_res = cfg.hash_finest_res;
    return fc;
}

inpaint::CompleteOptions complete_options(const Config& cfg) {
    inpaint::CompleteOptions o;
    o.eps_rel = cfg.eps_rel;
    o.combine = combine_mode(cfg.conflict_mode);
    o.roi_fov_deg = cfg.roi_fov_deg;
    o.roi_size = cfg.roi_size;
    o.solver_iters = cfg.solver_iters;
    return o;
}

}  // namespace

visibility::CombineMode combine_mode(const std::string& name) {
    if (name == "all") return visibility::CombineMode::AllOf;
    if (name == "any") return visibility::CombineMode::AnyOf;
    throw std::invalid_argument("conflict_mode must be all or any, got " + name);
}

ReferenceView erase(const ReferenceView& candidate, const std::vector<ReferenceView>& refs,
                    double eps_rel, visibility::CombineMode mode) {
    ReferenceView out = candidate;
    const int w = candidate.rgb.width, h = candidate.rgb.height;
    out.supervision_mask = BinaryMask(w, h, 1);
    if (refs.empty()) return out;
    std::vector<BinaryMask> conflicts;
    for (const auto& r : refs)
        conflicts.push_back(visibility::conflict_mask(candidate.depth, r, eps_rel));
    BinaryMask combined = visibility::combine_masks(conflicts, mode);
    for (size_t q = 0; q < combined.bits.size(); ++q)
        out.supervision_mask.bits[q] = combined.bits[q] ? 0 : 1;
    return out;
}

std::unique_ptr<depthfusion::DepthEstimator> make_estimator(const Config& cfg) {
    if (cfg.estimator == "oracle") {
        if (cfg.scene_file.empty())
            throw std::invalid_argument("estimator=oracle needs scene_file");
        return std::make_unique<depthfusion::OracleDepthEstimator>(
            synthscene::load_scene(cfg.scene_file), (uint64_t)cfg.seed + 101);
    }
    if (cfg.estimator == "constant") return std::make_unique<depthfusion::ConstantDepthEstimator>();
    if (cfg.estimator == "service")
        return std::make_unique<service::HttpDepthEstimator>(
            cfg.depth_url, service::HttpOptions{cfg.http_timeout_sec, cfg.http_retries});
    throw std::invalid_argument("estimator must be oracle, constant or service, got " +
                                cfg.estimator);
}

std::unique_ptr<inpaint::RgbInpainter> make_inpainter(const Config& cfg) {
    if (cfg.inpainter == "mock") return std::make_unique<inpaint::MockInpainter>();
    if (cfg.inpainter == "oracle") {
        if (cfg.scene_file.empty())
            throw std::invalid_argument("inpainter=oracle needs scene_file");
        return std::make_unique<inpaint::OracleInpainter>(synthscene::load_scene(cfg.scene_file));
    }
    if (cfg.inpainter == "service")
        return std::make_unique<service::HttpInpainter>(
            cfg.inpaint_url, service::HttpOptions{cfg.http_timeout_sec, cfg.http_retries});
    throw std::invalid_argument("inpainter must be mock, oracle or service, got " + cfg.inpainter);
}

Config load_run_config(const std::string& run_dir) {
    return load_config((fs::path(run_dir) / "config.txt").string());
}

State load_run(const std::string& run_dir) {
    std::ifstream in(manifest_path(run_dir));
    if (!in) throw std::runtime_error("no manifest in " + run_dir);
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "panorecon-manifest" || version != kManifestVersion)
        throw std::runtime_error("unsupported manifest in " + run_dir);
    State st;
    long seed = 0;
    std::string hash;
    size_t n_poses = 0, n_refs = 0;
    in >> tag >> seed;             // seed
    in >> tag >> hash;             // config_hash
    in >> tag >> st.erased_pixels; // erased
    in >> tag >> n_poses;
    for (size_t k = 0; k < n_poses; ++k) {
        Pose p;
        in >> tag >> p.position.x >> p.position.y >> p.position.z;
        st.poses.push_back(p);
    }
    in >> tag >> st.views_done;
    in >> tag >> n_refs;
    for (size_t k = 0; k < n_refs; ++k) {
        size_t idx;
        std::string base;
        Pose p;
        in >> tag >> idx >> base >> p.position.x >> p.position.y >> p.position.z;
        st.refs.push_back(load_ref((fs::path(run_dir) / base).string(), p));
    }
    std::string field_file;
    in >> tag >> field_file;
    if (!in) throw std::runtime_error("truncated manifest in " + run_dir);
    st.field = field::Field<float>::load((fs::path(run_dir) / field_file).string());
    Config cfg = load_run_config(run_dir);
    if (cfg.hash() != hash)
        throw std::runtime_error("manifest config hash does not match config.txt in " + run_dir);
    return st;
}

Panorama render_novel(const field::Field<float>& f, const Pose& pose, int width, int height,
                      int n_samples, DepthPanorama* depth_out) {
    Panorama out = f.render_panorama_rgb(pose, width, height, n_samples, depth_out);
    out.pose = pose;
    if (depth_out) depth_out->pose = pose;
    return out;
}

size_t render_path(const field::Field<float>& f, const std::vector<Pose>& poses, int width,
                   int height, int n_samples, const std::string& out_dir) {
    fs::create_directories(out_dir);
    for (size_t k = 0; k < poses.size(); ++k) {
        Panorama frame = render_novel(f, poses[k], width, height, n_samples);
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%04zu.png", k);
        io::save_png(frame, (fs::path(out_dir) / name).string());
    }
    return poses.size();
}

State run(const Panorama& input, const DepthPanorama* input_depth, const Config& cfg,
          depthfusion::DepthEstimator& est, inpaint::RgbInpainter& inp,
          const std::string& run_dir, std::ostream* log, long max_views) {
    const bool persistent = !run_dir.empty();
    State st;
    bool resumed = false;
    if (persistent) {
        fs::create_directories(run_dir);
        if (fs::exists(manifest_path(run_dir))) {
            st = load_run(run_dir);
            if (load_run_config(run_dir).hash() != cfg.hash())
                throw std::runtime_error("resume with a different config: " + run_dir);
            resumed = true;
            if (log) *log << "resume views_done " << st.views_done << '\n';
        } else {
            write_atomic((fs::path(run_dir) / "config.txt").string(), cfg.to_text());
        }
    }

    trainer::TrainConfig tc = train_config(cfg, run_dir, log);

    if (!resumed) {
        ReferenceView ref0;
        ref0.rgb = input;
        ref0.pose = input.pose;
        bool have_depth = input_depth &&
                          std::any_of(input_depth->depth.begin(), input_depth->depth.end(),
                                      [](double d) { return d > 0; });
        if (have_depth) {
            ref0.depth = *input_depth;
        } else {
            if (log) *log << "fuse_depth start\n";
            ref0.depth = depthfusion::estimate_panorama_depth(
                input, est, cfg.fusion_views, cfg.fusion_persp_size, cfg.solver_iters);
        }
        ref0.depth.pose = input.pose;
        ref0.supervision_mask = BinaryMask(input.width, input.height, 1);

        st.field = field::Field<float>(
            field_config(cfg, field::domain_from_depth(ref0.depth)), (uint64_t)cfg.seed);
        if (log) *log << "train_initial start\n";
        trainer::train_initial(st.field, ref0, tc);

        trajectory::FreeSpaceCurve curve = trajectory::extract_curve(ref0.depth);
        st.poses = trajectory::sample_positions(curve, cfg.traj_scales, cfg.traj_per_curve);
        std::mt19937_64 shuffle_rng((uint64_t)cfg.seed);
        std::shuffle(st.poses.begin(), st.poses.end(), shuffle_rng);

        st.refs.push_back(std::move(ref0));
        if (persistent) {
            save_ref(st.refs[0], ref_base(run_dir, 0));
            // round-trip through disk so resumed and uninterrupted runs
            // continue from identical reference data
            st.refs[0] = load_ref(ref_base(run_dir, 0), st.refs[0].pose);
            persist(st, cfg, run_dir);
        }
    }

    inpaint::CompleteOptions opts = complete_options(cfg);
    size_t stop = st.poses.size();
    if (max_views >= 0) stop = std::min(stop, st.views_done + (size_t)max_views);
    for (size_t k = st.views_done; k < stop; ++k) {
        const Pose& p = st.poses[k];
        if (log)
            *log << "view " << k << " pose " << p.position.x << ' ' << p.position.y << ' '
                 << p.position.z << '\n';
        est.reseed((uint64_t)cfg.seed + 7919 * (k + 1));  // replayable per view
        DepthPanorama rendered_depth;
        Panorama rendered =
            render_novel(st.field, p, input.width, input.height, cfg.n_samples, &rendered_depth);
        ReferenceView candidate =
            inpaint::complete_view(rendered, rendered_depth, st.refs, inp, est, opts);
        candidate = erase(candidate, st.refs, cfg.eps_rel, opts.combine);
        size_t erased = candidate.supervision_mask.bits.size() -
                        candidate.supervision_mask.count_ones();
        st.erased_pixels += erased;
        if (log) *log << "view " << k << " erased " << erased << '\n';
        st.refs.push_back(std::move(candidate));
        tc.seed = (uint64_t)cfg.seed + k + 1;  // distinct ray stream per view
        trainer::finetune(st.field, st.refs, st.refs.size() - 1, tc);
        st.views_done = k + 1;
        if (persistent) {
            size_t ridx = st.refs.size() - 1;
            save_ref(st.refs[ridx], ref_base(run_dir, ridx));
            st.refs[ridx] = load_ref(ref_base(run_dir, ridx), st.refs[ridx].pose);
            persist(st, cfg, run_dir);
        }
    }
    return st;
}

}  // namespace pano::pipeline
