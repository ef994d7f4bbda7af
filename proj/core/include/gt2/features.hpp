#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gt2/image.hpp"

namespace gt2 {

// Dense feature grid at 1/4 image resolution.
struct FeatureMap {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    FeatureMap() = default;
    FeatureMap(int h, int w, int c)
        : height(h), width(w), channels(c),
          data(static_cast<size_t>(h) * w * c, 0.0) {}

    std::span<const double> cell(int i, int j) const {
        return {&data[(static_cast<size_t>(i) * width + j) * channels],
                static_cast<size_t>(channels)};
    }
    std::span<double> cell(int i, int j) {
        return {&data[(static_cast<size_t>(i) * width + j) * channels],
                static_cast<size_t>(channels)};
    }
    int cells() const { return height * width; }
};

// 1 - a.b / (|a| |b|), epsilon-guarded; two zero vectors have distance 0.
double cosine_distance(std::span<const double> a, std::span<const double> b);

// identical arithmetic to cosine_distance given cached norms (NN search
// caches norms; selections must match the pairwise form bit-for-bit)
inline double cosine_distance_cached(double dot, double norm_a, double norm_b) {
    if (norm_a < 1e-12 && norm_b < 1e-12)
        return 0.0;
    return 1.0 - dot / ((norm_a + 1e-8) * (norm_b + 1e-8));
}

// Three-stage convolutional descriptor: 3x3 filter bank -> ReLU -> 2x average
// pool on the first two stages, final stage unpooled, total stride 4. Filter
// banks are semi-orthogonal from a seeded draw; a weights file in the layout
// documented in the README can replace them.
class FeatureExtractor {
public:
    explicit FeatureExtractor(uint64_t seed = 17, int out_channels = 128);

    int out_channels() const { return stage_out_[2]; }
    static constexpr int kStride = 4;
    static constexpr int kMinInput = 16;

    FeatureMap extract(const Image& image) const;

    // Forward pass retaining the intermediates backward() needs.
    struct Tape {
        Image input;
        std::vector<std::vector<double>> pre_act;  // per stage, pre-ReLU
        std::vector<int> h, w;                     // conv output dims per stage
        FeatureMap output;
    };
    Tape extract_with_tape(const Image& image) const;

    // dL/dImage from dL/dFeatureMap.
    Image backward(const Tape& tape, const FeatureMap& grad_output) const;

    void load_weights(const std::string& path);
    void save_weights(const std::string& path) const;

private:
    // weights[s] laid out [out][(dy*3+dx)*in + cin]
    std::array<std::vector<double>, 3> weights_;
    std::array<int, 3> stage_in_{3, 0, 0};
    std::array<int, 3> stage_out_{};
};

}  // namespace gt2
