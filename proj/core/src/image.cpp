#include "gt2/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gt2 {

double sample_bilinear(const Image& img, double x, double y, int c) {
    const double xf = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    const double yf = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    const int x0 = static_cast<int>(std::floor(xf));
    const int y0 = static_cast<int>(std::floor(yf));
    const int x1 = std::min(x0 + 1, img.width - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fx = xf - x0;
    const double fy = yf - y0;
    const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
    const double bot = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
    return top * (1.0 - fy) + bot * fy;
}

Image resize_bilinear(const Image& src, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0)
        throw std::invalid_argument("resize_bilinear: output dims must be positive");
    Image out(out_h, out_w, src.channels);
    const double sy = static_cast<double>(src.height) / out_h;
    const double sx = static_cast<double>(src.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const double src_y = (y + 0.5) * sy - 0.5;
            const double src_x = (x + 0.5) * sx - 0.5;
            for (int c = 0; c < src.channels; ++c)
                out.at(y, x, c) = sample_bilinear(src, src_x, src_y, c);
        }
    }
    return out;
}

namespace {

// Largest axis-aligned rectangle inscribed in a w x h rectangle rotated by
// `angle` radians (the classic rotatedRectWithMaxArea construction).
void max_valid_rect(double w, double h, double angle, double& wr, double& hr) {
    const double a = std::fabs(std::fmod(angle, M_PI));
    const double ang = a > M_PI / 2 ? M_PI - a : a;
    const double si = std::sin(ang), co = std::cos(ang);
    if (si < 1e-12) {
        wr = w;
        hr = h;
        return;
    }
    const bool wide = w >= h;
    const double side_long = wide ? w : h;
    const double side_short = wide ? h : w;
    if (side_short <= 2.0 * si * co * side_long || std::fabs(si - co) < 1e-10) {
        const double x = 0.5 * side_short;
        if (wide) {
            wr = x / si;
            hr = x / co;
        } else {
            wr = x / co;
            hr = x / si;
        }
    } else {
        const double cos2 = co * co - si * si;
        wr = (w * co - h * si) / cos2;
        hr = (h * co - w * si) / cos2;
    }
}

}  // namespace

Image rotate_valid_crop(const Image& src, double degrees) {
    double deg = std::fmod(degrees, 360.0);
    if (deg < 0)
        deg += 360.0;
    if (deg == 0.0)
        return src;
    const double rad = deg * M_PI / 180.0;
    double wr = 0, hr = 0;
    max_valid_rect(src.width, src.height, rad, wr, hr);
    const int out_w = std::max(1, static_cast<int>(std::floor(wr)));
    const int out_h = std::max(1, static_cast<int>(std::floor(hr)));

    Image out(out_h, out_w, src.channels);
    const double cx_src = 0.5 * (src.width - 1);
    const double cy_src = 0.5 * (src.height - 1);
    const double cx_out = 0.5 * (out_w - 1);
    const double cy_out = 0.5 * (out_h - 1);
    const double co = std::cos(rad), si = std::sin(rad);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const double dx = x - cx_out;
            const double dy = y - cy_out;
            // inverse rotation of the output grid into source coords
            const double sx = co * dx + si * dy + cx_src;
            const double sy = -si * dx + co * dy + cy_src;
            for (int c = 0; c < src.channels; ++c)
                out.at(y, x, c) = sample_bilinear(src, sx, sy, c);
        }
    }
    return out;
}

Image to_luma(const Image& rgb) {
    if (rgb.channels != 3)
        throw std::invalid_argument("to_luma: expected 3 channels");
    Image out(rgb.height, rgb.width, 1);
    for (int y = 0; y < rgb.height; ++y)
        for (int x = 0; x < rgb.width; ++x)
            out.at(y, x, 0) = 0.299 * rgb.at(y, x, 0) + 0.587 * rgb.at(y, x, 1) +
                              0.114 * rgb.at(y, x, 2);
    return out;
}

Image minmax_normalize(const Image& m) {
    Image out = m;
    if (m.empty())
        return out;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : m.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    if (range <= 0.0) {
        std::fill(out.data.begin(), out.data.end(), 0.0);
        return out;
    }
    for (double& v : out.data)
        v = (v - lo) / range;
    return out;
}

double mean_abs_diff(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("mean_abs_diff: shape mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i)
        s += std::fabs(a.data[i] - b.data[i]);
    return a.data.empty() ? 0.0 : s / a.data.size();
}

}  // namespace gt2
