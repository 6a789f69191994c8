// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "metrics.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "depthfusion.hpp"

namespace pano::metrics {

double psnr(const Panorama& a, const Panorama& b, const BinaryMask* mask) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("psnr: image dims mismatch");
    if (mask && (mask->width != a.width || mask->height != a.height))
        throw std::invalid_argument("psnr: mask dims mismatch");
    double se = 0.0;
    size_t n = 0;
    for (int j = 0; j < a.height; ++j)
        for (int i = 0; i < a.width; ++i) {
            if (mask && !mask->at(i, j)) continue;
            const float* pa = a.px(i, j);
            const float* pb = b.px(i, j);
            for (int c = 0; c < 3; ++c) {
                double d = double(pa[c]) - double(pb[c]);
                se += d * d;
            }
            n += 3;
        }
    if (n == 0) throw std::invalid_argument("psnr: empty mask");
    double mse = se / double(n);
    if (mse <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

namespace {

cv::Mat channel_mat(const Panorama& img, int c) {
    cv::Mat m(img.height, img.width, CV_64F);
    for (int j = 0; j < img.height; ++j)
        for (int i = 0; i < img.width; ++i)
            m.at<double>(j, i) = img.px(i, j)[c];
    return m;
}

}  // namespace

double ssim(const Panorama& a, const Panorama& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ssim: image dims mismatch");
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;  // dynamic range 1
    const cv::Size win(11, 11);
    const double sigma = 1.5;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        cv::Mat x = channel_mat(a, c), y = channel_mat(b, c);
        cv::Mat mx, my;
        cv::GaussianBlur(x, mx, win, sigma);
        cv::GaussianBlur(y, my, win, sigma);
        cv::Mat mxx = mx.mul(mx), myy = my.mul(my), mxy = mx.mul(my);
        cv::Mat sxx, syy, sxy;
        cv::GaussianBlur(x.mul(x), sxx, win, sigma);
        cv::GaussianBlur(y.mul(y), syy, win, sigma);
        cv::GaussianBlur(x.mul(y), sxy, win, sigma);
        sxx -= mxx;
        syy -= myy;
        sxy -= mxy;
        cv::Mat num = (2 * mxy + c1).mul(2 * sxy + c2);
        cv::Mat den = (mxx + myy + c1).mul(sxx + syy + c2);
        cv::Mat map;
        cv::divide(num, den, map);
        total += cv::mean(map)[0];
    }
    return total / 3.0;
}

double depth_error(const DepthPanorama& pred, const DepthPanorama& gt) {
    double s = depthfusion::global_scale_align(pred, gt);
    std::vector<double> rel;
    for (size_t k = 0; k < pred.depth.size(); ++k)
        if (pred.depth[k] > 0.0 && gt.depth[k] > 0.0)
            rel.push_back(std::abs(pred.depth[k] * s - gt.depth[k]) / gt.depth[k]);
    if (rel.empty()) throw std::invalid_argument("depth_error: no jointly known pixels");
    size_t mid = rel.size() / 2;
    std::nth_element(rel.begin(), rel.begin() + mid, rel.end());
    return rel[mid];
}

std::string format_report(const std::vector<MetricRecord>& records) {
    std::ostringstream out;
    out.precision(10);
    for (const auto& r : records)
        out << r.metric << ' ' << r.view_id << ' ' << r.value << '\n';
    return out.str();
}

}  // namespace pano::metrics
