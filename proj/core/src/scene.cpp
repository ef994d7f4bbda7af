#include "gt2/scene.hpp"

#include <cmath>

namespace gt2 {

Eigen::Matrix3d Gaussian::rotation() const {
    const Eigen::Vector4d q = rot.normalized();
    return Eigen::Quaterniond(q[0], q[1], q[2], q[3]).toRotationMatrix();
}

void Gaussian::normalize_rot() {
    const double n = rot.norm();
    if (n <= 0.0 || !std::isfinite(n))
        throw ValidationError("Gaussian quaternion has zero or non-finite norm");
    if (std::fabs(n - 1.0) > 1e-9)
        rot /= n;
}

void GaussianScene::validate() const {
    auto finite3 = [](const Eigen::Vector3d& v) { return v.allFinite(); };
    for (size_t i = 0; i < gaussians.size(); ++i) {
        const Gaussian& g = gaussians[i];
        const std::string where = "Gaussian " + std::to_string(i);
        if (!finite3(g.mu))
            throw ValidationError(where + ": non-finite position");
        if (!g.rot.allFinite() || std::fabs(g.rot.norm() - 1.0) > 1e-6)
            throw ValidationError(where + ": quaternion not unit-norm/finite");
        if (!finite3(g.log_scale))
            throw ValidationError(where + ": non-finite scale");
        if (!std::isfinite(g.logit_opacity))
            throw ValidationError(where + ": non-finite opacity");
        if (!finite3(g.color) || !finite3(g.color_g))
            throw ValidationError(where + ": non-finite color");
    }
    if (!background.allFinite())
        throw ValidationError("scene background is non-finite");
}

double GaussianScene::extent() const {
    if (gaussians.empty())
        return 0.0;
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const Gaussian& g : gaussians)
        centroid += g.mu;
    centroid /= static_cast<double>(gaussians.size());
    double r = 0.0;
    for (const Gaussian& g : gaussians)
        r = std::max(r, (g.mu - centroid).norm());
    return r;
}

Eigen::Matrix4d Camera::cam_to_world() const {
    Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
    const Eigen::Matrix3d rt = rotation().transpose();
    inv.topLeftCorner<3, 3>() = rt;
    inv.topRightCorner<3, 1>() = -rt * translation();
    return inv;
}

void Camera::validate() const {
    if (!(fx > 0) || !(fy > 0))
        throw ValidationError("camera: fx, fy must be positive");
    if (width <= 0 || height <= 0)
        throw ValidationError("camera: width, height must be positive");
    if (!(cx > 0 && cx < width) || !(cy > 0 && cy < height))
        throw ValidationError("camera: principal point outside image");
    if (!world_to_cam.allFinite())
        throw ValidationError("camera: non-finite extrinsics");
    const Eigen::Matrix3d r = rotation();
    if ((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-6)
        throw ValidationError("camera: rotation not orthonormal");
    if (r.determinant() < 0)
        throw ValidationError("camera: rotation has negative determinant");
    if ((world_to_cam.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-12)
        throw ValidationError("camera: last extrinsic row must be (0,0,0,1)");
}

Projection project(const Camera& cam, const Eigen::Vector3d& world_point) {
    const Eigen::Vector3d p = cam.rotation() * world_point + cam.translation();
    Projection out;
    out.depth = p.z();
    if (p.z() <= 0.0) {
        out.behind_camera = true;
        return out;
    }
    out.pixel.x() = cam.fx * p.x() / p.z() + cam.cx;
    out.pixel.y() = cam.fy * p.y() / p.z() + cam.cy;
    return out;
}

Eigen::Vector3d unproject(const Camera& cam, const Eigen::Vector2d& pixel, double depth) {
    if (!(depth > 0.0))
        throw std::invalid_argument("unproject: depth must be positive");
    const Eigen::Vector3d p_cam((pixel.x() - cam.cx) / cam.fx * depth,
                                (pixel.y() - cam.cy) / cam.fy * depth, depth);
    return cam.rotation().transpose() * (p_cam - cam.translation());
}

Camera look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                      double fx, double fy, int width, int height) {
    Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d up(0, -1, 0);  // y-down image rows
    if (std::fabs(forward.dot(up)) > 0.999)
        up = Eigen::Vector3d(0, 0, forward.z() > 0 ? -1 : 1);
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right).normalized();

    Eigen::Matrix3d r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();

    Camera cam;
    cam.fx = fx;
    cam.fy = fy;
    cam.width = width;
    cam.height = height;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    cam.world_to_cam = Eigen::Matrix4d::Identity();
    cam.world_to_cam.topLeftCorner<3, 3>() = r;
    cam.world_to_cam.topRightCorner<3, 1>() = -r * eye;
    return cam;
}

}  // namespace gt2
