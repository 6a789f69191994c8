// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "depthfusion.hpp"
#include "inpaint.hpp"

namespace pano::service {

std::string base64_encode(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> base64_decode(const std::string& text);

struct HttpOptions {
    int timeout_sec = 30;
    int retries = 2;  // attempts beyond the first
};

// POST /depth {"image": b64 png} -> {"depth": b64 gray16 png, "scale", "offset"}
class HttpDepthEstimator : public depthfusion::DepthEstimator {
public:
    HttpDepthEstimator(std::string base_url, HttpOptions opts = {})
        : url_(std::move(base_url)), opts_(opts) {}
    PerspDepth estimate(const PerspImage& rgb, const PerspectiveCamera& cam) override;

private:
    std::string url_;
    HttpOptions opts_;
};

// POST /inpaint {"image": b64 png, "mask": b64 gray png, "prompt"?} -> {"image": b64 png}
class HttpInpainter : public inpaint::RgbInpainter {
public:
    HttpInpainter(std::string base_url, HttpOptions opts = {}, std::string prompt = "")
        : url_(std::move(base_url)), opts_(opts), prompt_(std::move(prompt)) {}
    PerspImage inpaint(const PerspImage& rgb, const BinaryMask& mask,
                       const PerspectiveCamera& cam) override;

private:
    std::string url_;
    HttpOptions opts_;
    std::string prompt_;
};

}  // namespace pano::service
