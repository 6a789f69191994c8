// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "imageio.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/core.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace pano::io {

namespace {

cv::Mat to_bgr8(const float* rgb, int w, int h) {
    cv::Mat m(h, w, CV_8UC3);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            const float* p = &rgb[3 * (size_t(j) * w + i)];
            auto q = [&](int c) {
                return (uchar)std::lround(std::clamp(p[c], 0.f, 1.f) * 255.f);
            };
            m.at<cv::Vec3b>(j, i) = {q(2), q(1), q(0)};
        }
    return m;
}

void from_bgr8(const cv::Mat& m, float* rgb) {
    for (int j = 0; j < m.rows; ++j)
        for (int i = 0; i < m.cols; ++i) {
            auto v = m.at<cv::Vec3b>(j, i);
            float* p = &rgb[3 * (size_t(j) * m.cols + i)];
            p[0] = v[2] / 255.f;
            p[1] = v[1] / 255.f;
            p[2] = v[0] / 255.f;
        }
}

cv::Mat depth_to_gray16(const double* depth, size_t n, int w, int h, double& scale, double& offset) {
    double dmax = 0;
    for (size_t k = 0; k < n; ++k) dmax = std::max(dmax, depth[k]);
    // raw 0 stays the unknown sentinel; known depths map to [1, 65535]
    scale = dmax > 0 ? dmax : 1.0;
    offset = 0.0;
    cv::Mat m(h, w, CV_16UC1);
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i) {
            double d = depth[size_t(j) * w + i];
            uint16_t raw = 0;
            if (d > 0) raw = (uint16_t)std::clamp(std::lround(d / scale * 65535.0), 1l, 65535l);
            m.at<uint16_t>(j, i) = raw;
        }
    return m;
}

void gray16_to_depth(const cv::Mat& m, double scale, double offset, double* depth) {
    for (int j = 0; j < m.rows; ++j)
        for (int i = 0; i < m.cols; ++i) {
            uint16_t raw = m.at<uint16_t>(j, i);
            depth[size_t(j) * m.cols + i] = raw == 0 ? 0.0 : scale * raw / 65535.0 + offset;
        }
}

}  // namespace

void save_png(const Panorama& img, const std::string& path) {
    if (!cv::imwrite(path, to_bgr8(img.rgb.data(), img.width, img.height)))
        throw std::runtime_error("cannot write " + path);
}

Panorama load_png(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
    if (m.empty()) throw std::runtime_error("cannot read " + path);
    Panorama out(m.cols, m.rows);
    from_bgr8(m, out.rgb.data());
    return out;
}

void save_png(const PerspImage& img, const std::string& path) {
    if (!cv::imwrite(path, to_bgr8(img.rgb.data(), img.width, img.height)))
        throw std::runtime_error("cannot write " + path);
}

void save_depth(const DepthPanorama& d, const std::string& path) {
    double scale, offset;
    cv::Mat m = depth_to_gray16(d.depth.data(), d.depth.size(), d.width, d.height, scale, offset);
    if (!cv::imwrite(path, m)) throw std::runtime_error("cannot write " + path);
    std::ofstream meta(path + ".meta");
    meta.precision(17);
    meta << "scale " << scale << "\noffset " << offset << "\nunknown 0\n";
}

DepthPanorama load_depth(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (m.empty() || m.type() != CV_16UC1)
        throw std::runtime_error("cannot read 16-bit depth png: " + path);
    std::ifstream meta(path + ".meta");
    if (!meta) throw std::runtime_error("missing depth sidecar: " + path + ".meta");
    double scale = 1, offset = 0;
    std::string key;
    double val;
    while (meta >> key >> val) {
        if (key == "scale") scale = val;
        else if (key == "offset") offset = val;
    }
    DepthPanorama out(m.cols, m.rows);
    gray16_to_depth(m, scale, offset, out.depth.data());
    return out;
}

void save_mask(const BinaryMask& m, const std::string& path) {
    cv::Mat img(m.height, m.width, CV_8UC1);
    for (int j = 0; j < m.height; ++j)
        for (int i = 0; i < m.width; ++i)
            img.at<uchar>(j, i) = m.at(i, j) ? 255 : 0;
    if (!cv::imwrite(path, img)) throw std::runtime_error("cannot write " + path);
}

BinaryMask load_mask(const std::string& path) {
    cv::Mat img = cv::imread(path, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw std::runtime_error("cannot read " + path);
    BinaryMask out(img.cols, img.rows);
    for (int j = 0; j < img.rows; ++j)
        for (int i = 0; i < img.cols; ++i)
            out.at(i, j) = img.at<uchar>(j, i) >= 128 ? 1 : 0;
    return out;
}

std::vector<uint8_t> encode_rgb_png(const PerspImage& img) {
    std::vector<uint8_t> buf;
    cv::imencode(".png", to_bgr8(img.rgb.data(), img.width, img.height), buf);
    return buf;
}

PerspImage decode_rgb_png(const std::vector<uint8_t>& bytes) {
    cv::Mat m = cv::imdecode(bytes, cv::IMREAD_COLOR);
    if (m.empty()) throw std::runtime_error("bad png payload");
    PerspImage out(m.cols, m.rows);
    from_bgr8(m, out.rgb.data());
    std::fill(out.valid.begin(), out.valid.end(), 1);
    return out;
}

std::vector<uint8_t> encode_gray16_png(const PerspDepth& d, double& scale, double& offset) {
    cv::Mat m = depth_to_gray16(d.depth.data(), d.depth.size(), d.width, d.height, scale, offset);
    std::vector<uint8_t> buf;
    cv::imencode(".png", m, buf);
    return buf;
}

PerspDepth decode_gray16_png(const std::vector<uint8_t>& bytes, double scale, double offset) {
    cv::Mat m = cv::imdecode(bytes, cv::IMREAD_UNCHANGED);
    if (m.empty() || m.type() != CV_16UC1) throw std::runtime_error("bad 16-bit png payload");
    PerspDepth out(m.cols, m.rows);
    gray16_to_depth(m, scale, offset, out.depth.data());
    return out;
}

std::vector<uint8_t> encode_mask_png(const BinaryMask& m) {
    cv::Mat img(m.height, m.width, CV_8UC1);
    for (int j = 0; j < m.height; ++j)
        for (int i = 0; i < m.width; ++i)
            img.at<uchar>(j, i) = m.at(i, j) ? 255 : 0;
    std::vector<uint8_t> buf;
    cv::imencode(".png", img, buf);
    return buf;
}

BinaryMask decode_mask_png(const std::vector<uint8_t>& bytes) {
    cv::Mat img = cv::imdecode(bytes, cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw std::runtime_error("bad mask payload");
    BinaryMask out(img.cols, img.rows);
    for (int j = 0; j < img.rows; ++j)
        for (int i = 0; i < img.cols; ++i)
            out.at(i, j) = img.at<uchar>(j, i) >= 128 ? 1 : 0;
    return out;
}

}  // namespace pano::io
