/* Copyright 2026 The panorecon Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C API for the panorecon pipeline: single-panorama indoor scene
 * reconstruction with a depth-supervised radiance field and progressive
 * inpainting. All functions return pr_status; on failure pr_last_error()
 * holds a thread-local message. Handles are opaque and freed with the
 * matching *_free call.
 */
#ifndef PANORECON_H_
#define PANORECON_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pr_status {
    PR_OK = 0,
    PR_ERR_INVALID_ARGUMENT = 1,
    PR_ERR_IO = 2,
    PR_ERR_RUNTIME = 3
} pr_status;

/* Message describing the most recent failure on this thread. */
const char* pr_last_error(void);

/* ---- synthetic scenes (oracle data generation) ---- */

typedef struct pr_scene pr_scene;

pr_status pr_scene_open(const char* scene_file, pr_scene** out);
pr_status pr_scene_make_default(pr_scene** out);
pr_status pr_scene_save(const pr_scene* scene, const char* scene_file);
/* Renders the ground-truth equirect panorama and depth at a pose.
 * depth_png may be NULL to skip the depth output. */
pr_status pr_scene_render(const pr_scene* scene, double x, double y, double z,
                          int width, int height, const char* rgb_png,
                          const char* depth_png);
void pr_scene_free(pr_scene* scene);

/* ---- standalone depth fusion ---- */

/* Estimates a panorama depth map through the perspective rig + Eq. 2
 * fusion. config_text is "key = value" lines (may be empty or NULL). */
pr_status pr_fuse_depth(const char* pano_png, const char* config_text,
                        const char* out_depth_png);

/* ---- pipeline runs ---- */

typedef struct pr_run pr_run;

/* Creates a run directory, fuses depth (or loads depth_png if non-NULL)
 * and trains the initial field. */
pr_status pr_run_create(const char* run_dir, const char* pano_png,
                        const char* depth_png, const char* config_text,
                        pr_run** out);
/* Opens an existing run directory. */
pr_status pr_run_open(const char* run_dir, pr_run** out);
/* Runs the progressive completion loop; resumes after interruption.
 * max_views < 0 consumes every remaining sampled pose. */
pr_status pr_run_complete(pr_run* run, long max_views);
/* Number of completed views / total sampled poses. */
pr_status pr_run_progress(const pr_run* run, size_t* views_done, size_t* views_total);
pr_status pr_run_render_pose(const pr_run* run, double x, double y, double z,
                             const char* out_png, const char* out_depth_png);
/* Renders frame_%04d.png files for every pose in a trajectory file. */
pr_status pr_run_render_path(const pr_run* run, const char* trajectory_file,
                             const char* out_dir, size_t* n_frames);
/* Renders at the ground-truth pose and writes a line-delimited metric
 * report (psnr, ssim, depth_error) comparing against gt_png. gt_depth_png
 * may be NULL to skip the depth metric. */
pr_status pr_run_eval(const pr_run* run, const char* gt_png, const char* gt_depth_png,
                      double x, double y, double z, const char* report_path);
void pr_run_free(pr_run* run);

#ifdef __cplusplus
}
#endif

#endif /* PANORECON_H_ */
