#pragma once

#include <vector>

#include "gt2/image.hpp"
#include "gt2/scene.hpp"

namespace gt2 {

enum class ColorChannel { appearance, geometry };

struct RenderOutput {
    Image image;           // H x W x 3
    Image depth;           // H x W x 1, raw transmittance-weighted depth
    Image alpha;           // H x W x 1, accumulated opacity
    double depth_sentinel = 1.0;      // written to pixels no Gaussian touched
    std::vector<double> screen_radius;  // pixels, 0 for culled Gaussians
};

struct ParamGradients {
    std::vector<Eigen::Vector3d> mu;
    std::vector<Eigen::Vector4d> rot;
    std::vector<Eigen::Vector3d> log_scale;
    std::vector<double> logit_opacity;
    std::vector<Eigen::Vector3d> color;  // for the channel the loss touched

    explicit ParamGradients(size_t n = 0)
        : mu(n, Eigen::Vector3d::Zero()),
          rot(n, Eigen::Vector4d::Zero()),
          log_scale(n, Eigen::Vector3d::Zero()),
          logit_opacity(n, 0.0),
          color(n, Eigen::Vector3d::Zero()) {}
};

// Accumulated over an optimization window, consumed by densify_and_prune.
struct DensifyStats {
    std::vector<double> grad_accum;  // sum of ||dL/dmu|| per Gaussian
    std::vector<int> steps;          // how many backward passes contributed
    std::vector<double> max_radius;  // max screen radius seen

    void resize(size_t n) {
        grad_accum.assign(n, 0.0);
        steps.assign(n, 0);
        max_radius.assign(n, 0.0);
    }
    size_t size() const { return grad_accum.size(); }
};

struct DensifyResult {
    GaussianScene scene;
    // For each Gaussian of the new scene, the index it was derived from in
    // the old scene (survivor, clone or split child).
    std::vector<int> source_index;
};

RenderOutput render(const GaussianScene& scene, const Camera& camera,
                    ColorChannel channel = ColorChannel::appearance);

// Gradients of L = sum(grad_wrt_image * image) + sum(grad_wrt_depth * depth)
// with respect to all Gaussian parameters. grad_wrt_depth may be empty.
ParamGradients backward(const GaussianScene& scene, const Camera& camera,
                        ColorChannel channel, const Image& grad_wrt_image,
                        const Image& grad_wrt_depth = Image());

// Clones small / splits large Gaussians whose mean positional gradient
// exceeds grad_threshold; drops Gaussians below opacity_floor.
DensifyResult densify_and_prune(const GaussianScene& scene, const DensifyStats& stats,
                                double grad_threshold, double size_threshold,
                                double opacity_floor);

}  // namespace gt2
