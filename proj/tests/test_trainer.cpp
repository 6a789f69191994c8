// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "core/synthscene.hpp"
#include "core/trainer.hpp"
#include "test_util.hpp"

using namespace pano;
using field::Field;
using field::FieldConfig;

namespace {

FieldConfig small_config() {
    FieldConfig fc;
    fc.levels = 4;
    fc.log2_table = 10;
    fc.base_res = 4;
    fc.finest_res = 32;
    fc.hidden = 16;
    fc.color_hidden = 16;
    fc.geo_feats = 7;
    return fc;
}

trainer::TrainConfig fast_train() {
    trainer::TrainConfig tc;
    tc.rays_per_step = 128;
    tc.init_steps = 60;
    tc.per_view_steps = 30;
    tc.new_view_only_steps = 5;
    tc.n_samples = 24;
    tc.checkpoint_every = 50;
    return tc;
}

}  // namespace

TEST_CASE("cosine schedule endpoints and monotonicity") {
    CHECK(trainer::cosine_lr(1e-3, 1e-4, 0, 100) == doctest::Approx(1e-3));
    CHECK(trainer::cosine_lr(1e-3, 1e-4, 99, 100) == doctest::Approx(1e-4));
    double prev = 1e-3;
    for (long s = 1; s < 100; ++s) {
        double lr = trainer::cosine_lr(1e-3, 1e-4, s, 100);
        CHECK(lr < prev);
        prev = lr;
    }
    CHECK(trainer::cosine_lr(5e-4, 5e-4, 3, 10) == doctest::Approx(5e-4));
}

TEST_CASE("loss on a miss ray is the channel sum of squared color error") {
    // a ray whose t range sits outside the domain renders black; a white
    // target gives color loss 1+1+1 = 3 with no depth or distortion term
    Field<double> f(small_config(), 5);
    trainer::RayTarget rt;
    rt.ray = {{0, 0, 0}, {0, 0, 1}, 5.0, 6.0};  // beyond the [-1,1] domain
    rt.color[0] = rt.color[1] = rt.color[2] = 1.0;
    rt.depth = 0;
    std::mt19937_64 rng(1);
    auto parts = trainer::loss_batch<double>(f, {rt}, 8, 1.0, 1.0, false, false, rng);
    CHECK(parts.color == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(parts.depth == doctest::Approx(0.0));
    CHECK(parts.dist == doctest::Approx(0.0));
    CHECK(parts.total == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("loss matches a manual recomputation from render outputs") {
    Field<double> f(small_config(), 5);
    std::vector<trainer::RayTarget> batch;
    std::mt19937_64 seeder(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 5; ++k) {
        trainer::RayTarget rt;
        Vec3 d{u(seeder), u(seeder), u(seeder)};
        rt.ray = {{0.1, 0.0, -0.1}, d.normalized(), 0.05, 2.0};
        rt.color[0] = 0.4;
        rt.color[1] = 0.6;
        rt.color[2] = 0.2;
        rt.depth = (k % 2) ? 1.2 : 0.0;  // alternate known/unknown depth
        batch.push_back(rt);
    }
    std::mt19937_64 rng(1);
    auto parts = trainer::loss_batch<double>(f, batch, 16, 0.7, 0.3, false, false, rng);

    double color = 0, depth = 0, dist = 0;
    for (const auto& rt : batch) {
        field::RayCache<double> cache;
        field::RenderResult<double> out;
        std::mt19937_64 r2(9);
        f.render_ray(rt.ray, 16, false, r2, &cache, out);
        for (int c = 0; c < 3; ++c)
            color += (out.rgb[c] - rt.color[c]) * (out.rgb[c] - rt.color[c]);
        if (rt.depth > 0) depth += (out.depth - rt.depth) * (out.depth - rt.depth);
        double span = cache.t_far - cache.t_near;
        std::vector<double> s(cache.ts.size()), ds(cache.deltas.size());
        for (size_t q = 0; q < s.size(); ++q) {
            s[q] = (cache.ts[q] - cache.t_near) / span;
            ds[q] = cache.deltas[q] / span;
        }
        dist += field::distortion_loss<double>(s, ds, out.weights, nullptr);
    }
    // depth and dist parts carry their lambda weights
    const double n = batch.size();
    CHECK(parts.color == doctest::Approx(color / n).epsilon(1e-9));
    CHECK(parts.depth == doctest::Approx(0.7 * depth / n).epsilon(1e-9));
    CHECK(parts.dist == doctest::Approx(0.3 * dist / n).epsilon(1e-9));
    CHECK(parts.total ==
          doctest::Approx(color / n + 0.7 * depth / n + 0.3 * dist / n).epsilon(1e-9));
}

TEST_CASE("lambda_depth = 0 removes depth supervision from the gradient") {
    Field<double> a(small_config(), 5), b(small_config(), 5);
    trainer::RayTarget rt;
    rt.ray = {{0, 0, 0}, Vec3{0.2, 0.1, 1}.normalized(), 0.05, 2.0};
    rt.color[0] = rt.color[1] = rt.color[2] = 0.5;
    rt.depth = 1.0;
    trainer::RayTarget rt0 = rt;
    rt0.depth = 0.0;  // unknown depth: term skipped entirely
    std::mt19937_64 rng(1);
    a.zero_grad();
    auto pa = trainer::loss_batch<double>(a, {rt}, 12, 0.0, 0.0, true, false, rng);
    b.zero_grad();
    auto pb = trainer::loss_batch<double>(b, {rt0}, 12, 5.0, 0.0, true, false, rng);
    CHECK(pa.total == doctest::Approx(pb.total).epsilon(1e-12));
    for (size_t k = 0; k < a.grad().size(); ++k) CHECK(a.grad()[k] == b.grad()[k]);
}

TEST_CASE("loss gradients match finite differences through the full loss") {
    Field<double> f(small_config(), 77);
    std::vector<trainer::RayTarget> batch;
    std::mt19937_64 seeder(4);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 3; ++k) {
        trainer::RayTarget rt;
        Vec3 d{u(seeder), u(seeder), u(seeder)};
        rt.ray = {{0, 0.1, 0}, d.normalized(), 0.05, 2.0};
        rt.color[0] = 0.3;
        rt.color[1] = 0.8;
        rt.color[2] = 0.1;
        rt.depth = 0.9;
        batch.push_back(rt);
    }
    std::mt19937_64 rng(1);
    f.zero_grad();
    trainer::loss_batch<double>(f, batch, 12, 0.8, 0.5, true, false, rng);
    auto grad = f.grad();

    std::uniform_int_distribution<size_t> pick(0, f.params().size() - 1);
    int tested = 0;
    // h small enough that the stencil cannot straddle a relu kink
    const double h = 1e-6;
    while (tested < 12) {
        size_t k = pick(rng);
        if (std::abs(grad[k]) < 1e-6) continue;
        double keep = f.params()[k];
        f.params()[k] = keep + h;
        double up = trainer::loss_batch<double>(f, batch, 12, 0.8, 0.5, false, false, rng).total;
        f.params()[k] = keep - h;
        double dn = trainer::loss_batch<double>(f, batch, 12, 0.8, 0.5, false, false, rng).total;
        f.params()[k] = keep;
        double fd = (up - dn) / (2 * h);
        CHECK(std::abs(fd - grad[k]) <=
              1e-3 * std::max(1e-6, std::max(std::abs(fd), std::abs(grad[k]))));
        ++tested;
    }
}

TEST_CASE("initial training reduces the loss on the input view") {
    auto scene = synthscene::make_default_scene(true);
    auto ref = testutil::make_reference(scene, Pose{{0, 0, 0}}, 64, 32);
    Field<float> f(small_config(), 11);
    auto tc = fast_train();
    tc.init_steps = 300;
    std::ostringstream log;
    tc.log = &log;
    auto stats = trainer::train_initial(f, ref, tc);
    CHECK(stats.steps == 300);

    // parse "stage step N loss L ..." records and compare window means
    std::istringstream in(log.str());
    std::vector<double> losses;
    std::string word;
    while (in >> word) {
        if (word == "loss") {
            double v;
            in >> v;
            losses.push_back(v);
        }
    }
    REQUIRE(losses.size() == 300);
    double head = 0, tail = 0;
    for (int q = 0; q < 50; ++q) {
        head += losses[q];
        tail += losses[losses.size() - 1 - q];
    }
    CHECK(tail < head * 0.7);
}

TEST_CASE("finetune draws only from the new view at first") {
    auto scene = synthscene::make_default_scene(true);
    auto ref0 = testutil::make_reference(scene, Pose{{0, 0, 0}}, 32, 16);
    auto ref1 = testutil::make_reference(scene, Pose{{0.2, 0, 0.1}}, 32, 16);
    Field<float> f(small_config(), 8);
    auto tc = fast_train();
    tc.per_view_steps = 20;
    tc.new_view_only_steps = 20;  // every step is new-view-only
    auto stats = trainer::finetune(f, {ref0, ref1}, 1, tc);
    REQUIRE(stats.rays_per_view.size() == 2);
    CHECK(stats.rays_per_view[0] == 0);
    CHECK(stats.rays_per_view[1] == size_t(20) * tc.rays_per_step);

    // with later mixed steps both views must contribute
    Field<float> g(small_config(), 8);
    tc.new_view_only_steps = 5;
    stats = trainer::finetune(g, {ref0, ref1}, 1, tc);
    CHECK(stats.rays_per_view[0] > 0);
    CHECK(stats.rays_per_view[1] > 0);
}

TEST_CASE("finetune rejects an empty new-view supervision mask") {
    auto scene = synthscene::make_default_scene(true);
    auto ref0 = testutil::make_reference(scene, Pose{{0, 0, 0}}, 32, 16);
    auto ref1 = ref0;
    ref1.supervision_mask = BinaryMask(32, 16, 0);
    Field<float> f(small_config(), 8);
    CHECK_THROWS(trainer::finetune(f, {ref0, ref1}, 1, fast_train()));
}

TEST_CASE("checkpoints are written and training is seed deterministic") {
    testutil::TempDir tmp;
    auto scene = synthscene::make_default_scene(true);
    auto ref = testutil::make_reference(scene, Pose{{0, 0, 0}}, 32, 16);
    auto tc = fast_train();
    tc.checkpoint_every = 30;  // divides init_steps: final checkpoint = end state
    tc.checkpoint_dir = tmp.str();
    Field<float> a(small_config(), 2), b(small_config(), 2);
    auto sa = trainer::train_initial(a, ref, tc);
    CHECK(!sa.last_checkpoint.empty());
    CHECK(std::filesystem::exists(sa.last_checkpoint));
    auto restored = Field<float>::load(sa.last_checkpoint);
    trainer::train_initial(b, ref, tc);
    CHECK(a.params() == b.params());
    CHECK(restored.params() == a.params());
}

TEST_CASE("train config validation") {
    auto tc = fast_train();
    tc.rays_per_step = 0;
    CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
    tc = fast_train();
    tc.lr_start = -1;
    CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
    tc = fast_train();
    tc.n_samples = 0;
    CHECK_THROWS_AS(tc.validate(), std::invalid_argument);
}
