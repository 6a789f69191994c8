// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "bias_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pano::solver {

double smooth_l1(double d, double beta) {
    double a = std::abs(d);
    return a <= beta ? 0.5 * d * d / beta : a - 0.5 * beta;
}

double smooth_l1_grad(double d, double beta) {
    return std::clamp(d / beta, -1.0, 1.0);
}

BiasGrid BiasGrid::for_raster(int width, int height, int factor) {
    BiasGrid g;
    g.gw = std::max(1, (width + factor - 1) / factor);
    g.gh = std::max(1, (height + factor - 1) / factor);
    g.v.assign((size_t)g.gw * g.gh, 0.0);
    return g;
}

namespace {

struct Taps {
    int x0, x1, y0, y1;
    double fx, fy;
};

Taps grid_taps(double i, double j, int width, int height, int gw, int gh) {
    double gx = gw > 1 ? (i + 0.5) / width * gw - 0.5 : 0.0;
    double gy = gh > 1 ? (j + 0.5) / height * gh - 0.5 : 0.0;
    gx = std::clamp(gx, 0.0, (double)(gw - 1));
    gy = std::clamp(gy, 0.0, (double)(gh - 1));
    Taps t;
    t.x0 = std::min((int)gx, gw - 1);
    t.x1 = std::min(t.x0 + 1, gw - 1);
    t.y0 = std::min((int)gy, gh - 1);
    t.y1 = std::min(t.y0 + 1, gh - 1);
    t.fx = gx - t.x0;
    t.fy = gy - t.y0;
    return t;
}

}  // namespace

double BiasGrid::at(double i, double j, int width, int height) const {
    Taps t = grid_taps(i, j, width, height, gw, gh);
    double top = v[(size_t)t.y0 * gw + t.x0] * (1 - t.fx) + v[(size_t)t.y0 * gw + t.x1] * t.fx;
    double bot = v[(size_t)t.y1 * gw + t.x0] * (1 - t.fx) + v[(size_t)t.y1 * gw + t.x1] * t.fx;
    return top * (1 - t.fy) + bot * t.fy;
}

void BiasGrid::scatter(double i, double j, int width, int height, double g,
                       std::vector<double>& grad, size_t offset) const {
    Taps t = grid_taps(i, j, width, height, gw, gh);
    grad[offset + (size_t)t.y0 * gw + t.x0] += g * (1 - t.fx) * (1 - t.fy);
    grad[offset + (size_t)t.y0 * gw + t.x1] += g * t.fx * (1 - t.fy);
    grad[offset + (size_t)t.y1 * gw + t.x0] += g * (1 - t.fx) * t.fy;
    grad[offset + (size_t)t.y1 * gw + t.x1] += g * t.fx * t.fy;
}

double BiasGrid::tv(std::vector<double>* grad, size_t offset) const {
    double loss = 0;
    for (int y = 0; y < gh; ++y)
        for (int x = 0; x < gw; ++x) {
            size_t k = (size_t)y * gw + x;
            if (x + 1 < gw) {
                double d = v[k + 1] - v[k];
                loss += smooth_l1(d);
                if (grad) {
                    double g = smooth_l1_grad(d);
                    (*grad)[offset + k + 1] += g;
                    (*grad)[offset + k] -= g;
                }
            }
            if (y + 1 < gh) {
                double d = v[k + gw] - v[k];
                loss += smooth_l1(d);
                if (grad) {
                    double g = smooth_l1_grad(d);
                    (*grad)[offset + k + gw] += g;
                    (*grad)[offset + k] -= g;
                }
            }
        }
    return loss;
}

GdResult minimize(std::vector<double>& x,
                  const std::function<double(const std::vector<double>&, std::vector<double>&)>& f,
                  const GdOptions& opt) {
    std::vector<double> grad(x.size()), vel(x.size(), 0.0), x_prev;
    double step = opt.step;
    double obj = f(x, grad);
    if (!std::isfinite(obj)) throw std::runtime_error("solver: non-finite initial objective");
    GdResult res;
    res.trace.push_back(obj);
    for (int it = 0; it < opt.iters; ++it) {
        x_prev = x;
        for (size_t k = 0; k < x.size(); ++k) {
            vel[k] = opt.momentum * vel[k] - step * grad[k];
            x[k] += vel[k];
        }
        std::vector<double> grad_new(x.size());
        double obj_new = f(x, grad_new);
        if (!std::isfinite(obj_new)) {
            std::ostringstream msg;
            msg << "solver diverged at iteration " << it << "; trace tail:";
            for (size_t k = res.trace.size() > 5 ? res.trace.size() - 5 : 0; k < res.trace.size(); ++k)
                msg << ' ' << res.trace[k];
            throw std::runtime_error(msg.str());
        }
        if (obj_new <= obj) {
            obj = obj_new;
            grad.swap(grad_new);
        } else {
            x = x_prev;
            std::fill(vel.begin(), vel.end(), 0.0);
            step *= 0.5;
        }
        res.trace.push_back(obj);
        ++res.iters_run;
    }
    res.objective = obj;
    return res;
}

}  // namespace pano::solver
