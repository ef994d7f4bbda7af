#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace gt2 {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p) - std::log1p(-p); }

// One splat. Scale and opacity are stored pre-activation: the rasterizer
// applies exp() to log_scale and a logistic to logit_opacity.
struct Gaussian {
    Eigen::Vector3d mu = Eigen::Vector3d::Zero();
    Eigen::Vector4d rot = Eigen::Vector4d(1, 0, 0, 0);  // (w, x, y, z), unit norm
    Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
    double logit_opacity = 0.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero();    // appearance branch
    Eigen::Vector3d color_g = Eigen::Vector3d::Zero();  // geometry branch

    Eigen::Vector3d scale() const { return log_scale.array().exp(); }
    double opacity() const { return sigmoid(logit_opacity); }
    Eigen::Matrix3d rotation() const;

    void normalize_rot();
};

struct GaussianScene {
    std::vector<Gaussian> gaussians;
    Eigen::Vector3d background = Eigen::Vector3d::Zero();
    std::string name;
    double unit_scale = 1.0;

    // Throws ValidationError naming the offending Gaussian on NaN/Inf or a
    // badly denormalized quaternion.
    void validate() const;

    // Radius of the bounding sphere of the means around their centroid.
    double extent() const;
};

struct Projection {
    Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
    double depth = 0.0;
    bool behind_camera = false;
};

struct Camera {
    double fx = 1, fy = 1, cx = 0, cy = 0;
    int width = 1, height = 1;
    Eigen::Matrix4d world_to_cam = Eigen::Matrix4d::Identity();

    Eigen::Matrix3d rotation() const { return world_to_cam.topLeftCorner<3, 3>(); }
    Eigen::Vector3d translation() const { return world_to_cam.topRightCorner<3, 1>(); }
    Eigen::Matrix4d cam_to_world() const;

    void validate() const;
};

// Pinhole projection of a world point; z <= 0 is flagged, not thrown.
Projection project(const Camera& cam, const Eigen::Vector3d& world_point);

// Inverse of project for depth > 0; throws std::invalid_argument otherwise.
Eigen::Vector3d unproject(const Camera& cam, const Eigen::Vector2d& pixel, double depth);

// Camera placed at `eye` looking at `target` (y-down image convention).
Camera look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                      double fx, double fy, int width, int height);

}  // namespace gt2
