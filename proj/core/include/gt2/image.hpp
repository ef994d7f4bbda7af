#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gt2 {

// Row-major H x W x C grid of doubles. Used for RGB images (c=3),
// depth/weight maps (c=1) and anything else grid-shaped.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, fill) {
        if (h < 0 || w < 0 || c < 0)
            throw std::invalid_argument("Image: negative dimensions");
    }

    double& at(int y, int x, int c) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Image& o) const {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

// Bilinear resize to (out_h, out_w), all channels. Uses pixel-center
// alignment (sample at (y+0.5)*scale-0.5), edge clamped.
Image resize_bilinear(const Image& src, int out_h, int out_w);

// Rotate about the image center by `degrees` (counter-clockwise, y-down
// pixel coords so visually clockwise), bilinear sampling, then crop to the
// largest centered axis-aligned rectangle that contains no out-of-source
// samples. degrees == 0 returns the input unchanged.
Image rotate_valid_crop(const Image& src, double degrees);

// Bilinear sample of channel c at real pixel coords (x, y), edge clamped.
double sample_bilinear(const Image& img, double x, double y, int c);

// Rec.601 luma of an RGB image.
Image to_luma(const Image& rgb);

// Min-max normalize to [0,1]; a constant map normalizes to all zeros.
Image minmax_normalize(const Image& m);

double mean_abs_diff(const Image& a, const Image& b);

}  // namespace gt2
