#include "gt2/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gt2 {

namespace {

constexpr int kTileSize = 16;
constexpr double kNearPlane = 0.01;
constexpr double kAlphaClamp = 0.99;
constexpr double kAlphaMin = 1e-10;  // contributions below this are dropped
constexpr double kTransmittanceEps = 1e-4;
constexpr double kBlur = 0.3;  // screen-space low-pass added to the 2D covariance

Eigen::Matrix3d quat_to_mat(const Eigen::Vector4d& q) {
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

struct Splat {
    int index = -1;
    Eigen::Vector2d mean2d;
    Eigen::Matrix2d cov2d;   // with blur
    Eigen::Matrix2d conic;   // inverse of cov2d
    double z = 0;            // camera-frame depth of the mean
    double opacity = 0;      // activated
    Eigen::Vector3d color;
    double radius = 0;       // pixels
    // cached intermediates for the backward pass
    Eigen::Vector3d t;       // camera-frame mean
    Eigen::Matrix3d rot_mat; // from normalized quaternion
    Eigen::Vector3d scale;   // activated
    Eigen::Vector4d q_unit;
    double q_norm = 1;
};

struct Frame {
    std::vector<Splat> splats;                 // visible only
    std::vector<std::vector<int>> tile_lists;  // indices into splats, depth-sorted
    int tiles_x = 0, tiles_y = 0;
    double sentinel = 1.0;
};

Frame preprocess(const GaussianScene& scene, const Camera& cam, ColorChannel channel) {
    Frame fr;
    fr.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
    fr.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
    fr.tile_lists.assign(static_cast<size_t>(fr.tiles_x) * fr.tiles_y, {});

    const Eigen::Matrix3d rc = cam.rotation();
    const Eigen::Vector3d tc = cam.translation();

    double max_z = 0.0;
    for (size_t i = 0; i < scene.gaussians.size(); ++i) {
        const Gaussian& g = scene.gaussians[i];
        const Eigen::Vector3d t = rc * g.mu + tc;
        if (t.z() <= kNearPlane)
            continue;
        max_z = std::max(max_z, t.z());

        Splat s;
        s.index = static_cast<int>(i);
        s.t = t;
        s.z = t.z();
        s.q_norm = g.rot.norm();
        s.q_unit = g.rot / s.q_norm;
        s.rot_mat = quat_to_mat(s.q_unit);
        s.scale = g.scale();
        s.opacity = g.opacity();
        s.color = channel == ColorChannel::appearance ? g.color : g.color_g;
        if (s.opacity <= kAlphaMin)
            continue;

        const Eigen::Matrix3d m3 = s.rot_mat * s.scale.asDiagonal();
        const Eigen::Matrix3d v3 = m3 * m3.transpose();

        const double iz = 1.0 / t.z();
        Eigen::Matrix<double, 2, 3> jac;
        jac << cam.fx * iz, 0, -cam.fx * t.x() * iz * iz,
            0, cam.fy * iz, -cam.fy * t.y() * iz * iz;
        const Eigen::Matrix<double, 2, 3> mjw = jac * rc;
        Eigen::Matrix2d v2 = mjw * v3 * mjw.transpose();
        v2(0, 0) += kBlur;
        v2(1, 1) += kBlur;
        const double det = v2(0, 0) * v2(1, 1) - v2(0, 1) * v2(1, 0);
        if (det <= 0 || !std::isfinite(det))
            continue;
        s.cov2d = v2;
        s.conic << v2(1, 1) / det, -v2(0, 1) / det, -v2(1, 0) / det, v2(0, 0) / det;
        s.mean2d = Eigen::Vector2d(cam.fx * t.x() * iz + cam.cx, cam.fy * t.y() * iz + cam.cy);

        const double mid = 0.5 * (v2(0, 0) + v2(1, 1));
        const double lam_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
        // radius where opacity * exp(-0.5 d^2/lam_max) falls below kAlphaMin
        const double chi = 2.0 * std::log(s.opacity / kAlphaMin);
        s.radius = std::sqrt(std::max(chi, 0.0) * lam_max);

        const int x0 = std::max(0, static_cast<int>(std::floor((s.mean2d.x() - s.radius) / kTileSize)));
        const int x1 = std::min(fr.tiles_x - 1, static_cast<int>(std::floor((s.mean2d.x() + s.radius) / kTileSize)));
        const int y0 = std::max(0, static_cast<int>(std::floor((s.mean2d.y() - s.radius) / kTileSize)));
        const int y1 = std::min(fr.tiles_y - 1, static_cast<int>(std::floor((s.mean2d.y() + s.radius) / kTileSize)));
        if (x1 < x0 || y1 < y0)
            continue;
        const int si = static_cast<int>(fr.splats.size());
        fr.splats.push_back(s);
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx)
                fr.tile_lists[static_cast<size_t>(ty) * fr.tiles_x + tx].push_back(si);
    }

    // front-to-back, ties broken by original index
    for (auto& list : fr.tile_lists) {
        std::sort(list.begin(), list.end(), [&](int a, int b) {
            if (fr.splats[a].z != fr.splats[b].z)
                return fr.splats[a].z < fr.splats[b].z;
            return fr.splats[a].index < fr.splats[b].index;
        });
    }
    fr.sentinel = fr.splats.empty() ? 1.0 : 1.05 * max_z;
    return fr;
}

inline double gaussian_alpha(const Splat& s, double px, double py, double& gval) {
    const double dx = px - s.mean2d.x();
    const double dy = py - s.mean2d.y();
    const double e = s.conic(0, 0) * dx * dx + 2.0 * s.conic(0, 1) * dx * dy +
                     s.conic(1, 1) * dy * dy;
    gval = std::exp(-0.5 * e);
    return std::min(kAlphaClamp, s.opacity * gval);
}

}  // namespace

RenderOutput render(const GaussianScene& scene, const Camera& camera, ColorChannel channel) {
    const Frame fr = preprocess(scene, camera, channel);
    RenderOutput out;
    out.image = Image(camera.height, camera.width, 3);
    out.depth = Image(camera.height, camera.width, 1);
    out.alpha = Image(camera.height, camera.width, 1);
    out.depth_sentinel = fr.sentinel;
    out.screen_radius.assign(scene.gaussians.size(), 0.0);
    for (const Splat& s : fr.splats)
        out.screen_radius[s.index] = s.radius;

    for (int ty = 0; ty < fr.tiles_y; ++ty) {
        for (int tx = 0; tx < fr.tiles_x; ++tx) {
            const auto& list = fr.tile_lists[static_cast<size_t>(ty) * fr.tiles_x + tx];
            const int y_end = std::min((ty + 1) * kTileSize, camera.height);
            const int x_end = std::min((tx + 1) * kTileSize, camera.width);
            for (int y = ty * kTileSize; y < y_end; ++y) {
                for (int x = tx * kTileSize; x < x_end; ++x) {
                    const double px = x + 0.5, py = y + 0.5;
                    double T = 1.0;
                    Eigen::Vector3d color = Eigen::Vector3d::Zero();
                    double depth = 0.0;
                    bool touched = false;
                    for (int si : list) {
                        const Splat& s = fr.splats[si];
                        double gval;
                        const double a = gaussian_alpha(s, px, py, gval);
                        if (a < kAlphaMin)
                            continue;
                        color += T * a * s.color;
                        depth += T * a * s.z;
                        touched = true;
                        T *= 1.0 - a;
                        if (T < kTransmittanceEps)
                            break;
                    }
                    color += T * scene.background;
                    out.image.at(y, x, 0) = color.x();
                    out.image.at(y, x, 1) = color.y();
                    out.image.at(y, x, 2) = color.z();
                    out.alpha.at(y, x, 0) = 1.0 - T;
                    out.depth.at(y, x, 0) = touched ? depth : fr.sentinel;
                }
            }
        }
    }
    return out;
}

ParamGradients backward(const GaussianScene& scene, const Camera& camera, ColorChannel channel,
                        const Image& grad_wrt_image, const Image& grad_wrt_depth) {
    if (grad_wrt_image.height != camera.height || grad_wrt_image.width != camera.width ||
        grad_wrt_image.channels != 3)
        throw std::invalid_argument("backward: grad_wrt_image shape mismatch");
    const bool has_depth_grad = !grad_wrt_depth.empty();
    if (has_depth_grad &&
        (grad_wrt_depth.height != camera.height || grad_wrt_depth.width != camera.width ||
         grad_wrt_depth.channels != 1))
        throw std::invalid_argument("backward: grad_wrt_depth shape mismatch");

    const Frame fr = preprocess(scene, camera, channel);
    ParamGradients grads(scene.gaussians.size());

    // per-splat screen-space accumulators, reduced to parameters afterwards
    std::vector<Eigen::Vector2d> d_mean2d(fr.splats.size(), Eigen::Vector2d::Zero());
    std::vector<Eigen::Matrix2d> d_cov2d(fr.splats.size(), Eigen::Matrix2d::Zero());
    std::vector<double> d_z(fr.splats.size(), 0.0);
    std::vector<double> d_opacity(fr.splats.size(), 0.0);
    std::vector<Eigen::Vector3d> d_color(fr.splats.size(), Eigen::Vector3d::Zero());

    struct Contrib {
        int si;
        double alpha, gval, T;
        bool clamped;
    };
    std::vector<Contrib> chain;
    chain.reserve(64);

    for (int ty = 0; ty < fr.tiles_y; ++ty) {
        for (int tx = 0; tx < fr.tiles_x; ++tx) {
            const auto& list = fr.tile_lists[static_cast<size_t>(ty) * fr.tiles_x + tx];
            if (list.empty())
                continue;
            const int y_end = std::min((ty + 1) * kTileSize, camera.height);
            const int x_end = std::min((tx + 1) * kTileSize, camera.width);
            for (int y = ty * kTileSize; y < y_end; ++y) {
                for (int x = tx * kTileSize; x < x_end; ++x) {
                    const double px = x + 0.5, py = y + 0.5;
                    const Eigen::Vector3d g_img(grad_wrt_image.at(y, x, 0),
                                                grad_wrt_image.at(y, x, 1),
                                                grad_wrt_image.at(y, x, 2));
                    const double g_dep = has_depth_grad ? grad_wrt_depth.at(y, x, 0) : 0.0;
                    if (g_img.isZero(0.0) && g_dep == 0.0)
                        continue;

                    // replay the forward chain for this pixel
                    chain.clear();
                    double T = 1.0;
                    for (int si : list) {
                        const Splat& s = fr.splats[si];
                        double gval;
                        const double a = gaussian_alpha(s, px, py, gval);
                        if (a < kAlphaMin)
                            continue;
                        chain.push_back({si, a, gval, T, s.opacity * gval > kAlphaClamp});
                        T *= 1.0 - a;
                        if (T < kTransmittanceEps)
                            break;
                    }

                    // suffix sums: contribution of everything behind entry k
                    Eigen::Vector3d suffix_color = T * scene.background;
                    double suffix_depth = 0.0;
                    for (size_t k = chain.size(); k-- > 0;) {
                        const Contrib& c = chain[k];
                        const Splat& s = fr.splats[c.si];

                        d_color[c.si] += g_img * (c.T * c.alpha);
                        d_z[c.si] += g_dep * c.T * c.alpha;

                        const double one_m_a = 1.0 - c.alpha;
                        double dL_da = g_img.dot(c.T * s.color - suffix_color / one_m_a);
                        dL_da += g_dep * (c.T * s.z - suffix_depth / one_m_a);

                        if (!c.clamped) {
                            d_opacity[c.si] += dL_da * c.gval;
                            const double dL_dG = dL_da * s.opacity;
                            const Eigen::Vector2d delta(px - s.mean2d.x(), py - s.mean2d.y());
                            const Eigen::Vector2d conic_d = s.conic * delta;
                            d_mean2d[c.si] += dL_dG * c.gval * conic_d;
                            d_cov2d[c.si] +=
                                (dL_dG * c.gval * 0.5) * (s.conic * delta * delta.transpose() * s.conic);
                            // note: d/dV2 of exp(-.5 d^T V2^-1 d) = +.5 G (A d)(A d)^T
                        }

                        suffix_color += c.T * c.alpha * s.color;
                        suffix_depth += c.T * c.alpha * s.z;
                    }
                }
            }
        }
    }

    // screen-space gradients -> Gaussian parameters
    const Eigen::Matrix3d rc = camera.rotation();
    for (size_t si = 0; si < fr.splats.size(); ++si) {
        const Splat& s = fr.splats[si];
        const int gi = s.index;

        grads.color[gi] += d_color[si];
        grads.logit_opacity[gi] += d_opacity[si] * s.opacity * (1.0 - s.opacity);

        const double iz = 1.0 / s.t.z();
        Eigen::Matrix<double, 2, 3> jac;
        jac << camera.fx * iz, 0, -camera.fx * s.t.x() * iz * iz,
            0, camera.fy * iz, -camera.fy * s.t.y() * iz * iz;
        const Eigen::Matrix<double, 2, 3> mjw = jac * rc;
        const Eigen::Matrix3d m3 = s.rot_mat * s.scale.asDiagonal();
        const Eigen::Matrix3d v3 = m3 * m3.transpose();

        // mean2d and raw depth pull on the camera-frame position
        Eigen::Vector3d d_t = jac.transpose() * d_mean2d[si];
        d_t.z() += d_z[si];

        // covariance path
        const Eigen::Matrix2d dv2 = d_cov2d[si];
        const Eigen::Matrix<double, 2, 3> d_mjw = 2.0 * dv2 * mjw * v3;
        const Eigen::Matrix3d d_v3 = mjw.transpose() * dv2 * mjw;
        const Eigen::Matrix<double, 2, 3> d_jac = d_mjw * rc.transpose();

        const double fx = camera.fx, fy = camera.fy;
        const double tx = s.t.x(), tyy = s.t.y(), tz = s.t.z();
        d_t.x() += d_jac(0, 2) * (-fx * iz * iz);
        d_t.y() += d_jac(1, 2) * (-fy * iz * iz);
        d_t.z() += d_jac(0, 0) * (-fx * iz * iz) + d_jac(1, 1) * (-fy * iz * iz) +
                   d_jac(0, 2) * (2.0 * fx * tx * iz * iz * iz) +
                   d_jac(1, 2) * (2.0 * fy * tyy * iz * iz * iz);

        grads.mu[gi] += rc.transpose() * d_t;

        // V3 = M3 M3^T
        const Eigen::Matrix3d d_m3 = 2.0 * d_v3 * m3;
        // M3 = R * diag(scale)
        Eigen::Vector3d d_scale;
        for (int b = 0; b < 3; ++b)
            d_scale[b] = d_m3.col(b).dot(s.rot_mat.col(b));
        grads.log_scale[gi] += d_scale.cwiseProduct(s.scale);

        const Eigen::Matrix3d d_rot = d_m3 * s.scale.asDiagonal();
        const double w = s.q_unit[0], qx = s.q_unit[1], qy = s.q_unit[2], qz = s.q_unit[3];
        Eigen::Vector4d d_q;
        d_q[0] = 2.0 * (d_rot(0, 1) * -qz + d_rot(0, 2) * qy + d_rot(1, 0) * qz +
                        d_rot(1, 2) * -qx + d_rot(2, 0) * -qy + d_rot(2, 1) * qx);
        d_q[1] = 2.0 * (d_rot(0, 1) * qy + d_rot(0, 2) * qz + d_rot(1, 0) * qy +
                        d_rot(1, 1) * -2.0 * qx + d_rot(1, 2) * -w + d_rot(2, 0) * qz +
                        d_rot(2, 1) * w + d_rot(2, 2) * -2.0 * qx);
        d_q[2] = 2.0 * (d_rot(0, 0) * -2.0 * qy + d_rot(0, 1) * qx + d_rot(0, 2) * w +
                        d_rot(1, 0) * qx + d_rot(1, 2) * qz + d_rot(2, 0) * -w +
                        d_rot(2, 1) * qz + d_rot(2, 2) * -2.0 * qy);
        d_q[3] = 2.0 * (d_rot(0, 0) * -2.0 * qz + d_rot(0, 1) * -w + d_rot(0, 2) * qx +
                        d_rot(1, 0) * w + d_rot(1, 1) * -2.0 * qz + d_rot(1, 2) * qy +
                        d_rot(2, 0) * qx + d_rot(2, 1) * qy);
        // through q = q_raw / ||q_raw||
        grads.rot[gi] += (d_q - s.q_unit * s.q_unit.dot(d_q)) / s.q_norm;
    }
    return grads;
}

DensifyResult densify_and_prune(const GaussianScene& scene, const DensifyStats& stats,
                                double grad_threshold, double size_threshold,
                                double opacity_floor) {
    if (stats.size() != scene.gaussians.size())
        throw std::invalid_argument("densify_and_prune: stats size mismatch");

    DensifyResult out;
    out.scene.background = scene.background;
    out.scene.name = scene.name;
    out.scene.unit_scale = scene.unit_scale;

    for (size_t i = 0; i < scene.gaussians.size(); ++i) {
        const Gaussian& g = scene.gaussians[i];
        if (g.opacity() < opacity_floor)
            continue;
        const double mean_grad =
            stats.steps[i] > 0 ? stats.grad_accum[i] / stats.steps[i] : 0.0;
        const double world_extent = g.scale().maxCoeff();

        if (mean_grad <= grad_threshold) {
            out.scene.gaussians.push_back(g);
            out.source_index.push_back(static_cast<int>(i));
            continue;
        }
        if (world_extent < size_threshold) {
            // clone in place; opacities adjusted so the pair composites to the
            // original contribution: 1-(1-a')^2 == a
            Gaussian c = g;
            const double a = g.opacity();
            const double a_half = 1.0 - std::sqrt(std::max(0.0, 1.0 - a));
            c.logit_opacity = logit(std::clamp(a_half, 1e-12, 1.0 - 1e-12));
            out.scene.gaussians.push_back(c);
            out.source_index.push_back(static_cast<int>(i));
            out.scene.gaussians.push_back(c);
            out.source_index.push_back(static_cast<int>(i));
        } else {
            // split into two children along the major axis, scale / 1.6
            const Eigen::Vector3d s = g.scale();
            int major = 0;
            s.maxCoeff(&major);
            const Eigen::Vector3d axis = g.rotation().col(major);
            const double step = 0.5 * s[major];
            for (int k = 0; k < 2; ++k) {
                Gaussian child = g;
                child.mu = g.mu + (k == 0 ? step : -step) * axis;
                child.log_scale = g.log_scale.array() - std::log(1.6);
                out.scene.gaussians.push_back(child);
                out.source_index.push_back(static_cast<int>(i));
            }
        }
    }
    return out;
}

}  // namespace gt2
