// Copyright 2026 The panorecon Authors
// SPDX-License-Identifier: Apache-2.0
#include "service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <stdexcept>

#include "imageio.hpp"

namespace pano::service {

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    for (size_t q = 0; q < bytes.size(); q += 3) {
        uint32_t chunk = bytes[q] << 16;
        int n = 1;
        if (q + 1 < bytes.size()) chunk |= bytes[q + 1] << 8, ++n;
        if (q + 2 < bytes.size()) chunk |= bytes[q + 2], ++n;
        out.push_back(kB64[(chunk >> 18) & 63]);
        out.push_back(kB64[(chunk >> 12) & 63]);
        out.push_back(n > 1 ? kB64[(chunk >> 6) & 63] : '=');
        out.push_back(n > 2 ? kB64[chunk & 63] : '=');
    }
    return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
    static int inv[256];
    static bool init = [] {
        for (int& q : inv) q = -1;
        for (int q = 0; q < 64; ++q) inv[(uint8_t)kB64[q]] = q;
        return true;
    }();
    (void)init;
    std::vector<uint8_t> out;
    uint32_t chunk = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        int v = inv[(uint8_t)c];
        if (v < 0) throw std::invalid_argument("invalid base64 character");
        chunk = chunk << 6 | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back((chunk >> bits) & 0xff);
        }
    }
    return out;
}

namespace {

nlohmann::json post_json(const std::string& base_url, const std::string& path,
                         const nlohmann::json& body, const HttpOptions& opts) {
    std::string last_error;
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
        httplib::Client cli(base_url);
        cli.set_connection_timeout(opts.timeout_sec);
        cli.set_read_timeout(opts.timeout_sec);
        cli.set_write_timeout(opts.timeout_sec);
        auto res = cli.Post(path, body.dump(), "application/json");
        if (!res) {
            last_error = "transport error (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status != 200) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const std::exception& e) {
            last_error = std::string("bad json: ") + e.what();
        }
    }
    throw std::runtime_error("POST " + base_url + path + " failed after " +
                             std::to_string(opts.retries + 1) + " attempts: " + last_error);
}

}  // namespace

PerspDepth HttpDepthEstimator::estimate(const PerspImage& rgb, const PerspectiveCamera& cam) {
    nlohmann::json req{{"image", base64_encode(io::encode_rgb_png(rgb))}};
    nlohmann::json res = post_json(url_, "/depth", req, opts_);
    if (!res.contains("depth") || !res.contains("scale") || !res.contains("offset"))
        throw std::runtime_error("depth service response missing depth/scale/offset");
    PerspDepth d = io::decode_gray16_png(base64_decode(res["depth"].get<std::string>()),
                                         res["scale"].get<double>(), res["offset"].get<double>());
    if (d.width != cam.width || d.height != cam.height)
        throw std::runtime_error("depth service returned wrong resolution");
    return d;
}

PerspImage HttpInpainter::inpaint(const PerspImage& rgb, const BinaryMask& mask,
                                  const PerspectiveCamera&) {
    nlohmann::json req{{"image", base64_encode(io::encode_rgb_png(rgb))},
                       {"mask", base64_encode(io::encode_mask_png(mask))}};
    if (!prompt_.empty()) req["prompt"] = prompt_;
    nlohmann::json res = post_json(url_, "/inpaint", req, opts_);
    if (!res.contains("image")) throw std::runtime_error("inpaint service response missing image");
    PerspImage out = io::decode_rgb_png(base64_decode(res["image"].get<std::string>()));
    if (out.width != rgb.width || out.height != rgb.height)
        throw std::runtime_error("inpaint service returned wrong resolution");
    return out;
}

}  // namespace pano::service
