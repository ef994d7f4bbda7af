#include "gt2/scene_io.hpp"

#include <fstream>

#include <json.hpp>

namespace gt2 {

using json = nlohmann::ordered_json;

namespace {

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ParseError("cannot open " + path);
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return doc;
}

void write_json(const json& doc, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw ParseError("cannot open " + path + " for writing");
    f << doc.dump(2) << '\n';
    if (!f)
        throw ParseError("write failed: " + path);
}

Eigen::Vector3d vec3(const json& a, const std::string& ctx) {
    if (!a.is_array() || a.size() != 3)
        throw ParseError(ctx + ": expected array of 3 numbers");
    return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

json arr(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

}  // namespace

GaussianScene load_scene(const std::string& path) {
    const json doc = load_json(path);
    GaussianScene scene;
    try {
        scene.name = doc.value("name", "");
        scene.unit_scale = doc.value("unit_scale", 1.0);
        scene.background = vec3(doc.at("background"), "background");
        const json& gs = doc.at("gaussians");
        if (!gs.is_array())
            throw ParseError("gaussians: expected array");
        scene.gaussians.reserve(gs.size());
        for (size_t i = 0; i < gs.size(); ++i) {
            const std::string ctx = "gaussian " + std::to_string(i);
            const json& r = gs[i];
            Gaussian g;
            g.mu = vec3(r.at("mu"), ctx + ".mu");
            const json& q = r.at("rot");
            if (!q.is_array() || q.size() != 4)
                throw ParseError(ctx + ".rot: expected array of 4 numbers");
            g.rot = Eigen::Vector4d(q[0].get<double>(), q[1].get<double>(),
                                    q[2].get<double>(), q[3].get<double>());
            g.log_scale = vec3(r.at("log_scale"), ctx + ".log_scale");
            g.logit_opacity = r.at("logit_opacity").get<double>();
            g.color = vec3(r.at("color"), ctx + ".color");
            g.color_g = r.contains("color_g") ? vec3(r.at("color_g"), ctx + ".color_g") : g.color;
            g.normalize_rot();
            scene.gaussians.push_back(g);
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    scene.validate();
    return scene;
}

void save_scene(const GaussianScene& scene, const std::string& path) {
    scene.validate();
    json doc;
    doc["name"] = scene.name;
    doc["unit_scale"] = scene.unit_scale;
    doc["background"] = arr(scene.background);
    json gs = json::array();
    for (const Gaussian& g : scene.gaussians) {
        json r;
        r["mu"] = arr(g.mu);
        r["rot"] = json::array({g.rot[0], g.rot[1], g.rot[2], g.rot[3]});
        r["log_scale"] = arr(g.log_scale);
        r["logit_opacity"] = g.logit_opacity;
        r["color"] = arr(g.color);
        r["color_g"] = arr(g.color_g);
        gs.push_back(std::move(r));
    }
    doc["gaussians"] = std::move(gs);
    write_json(doc, path);
}

std::vector<Camera> load_cameras(const std::string& path) {
    const json doc = load_json(path);
    std::vector<Camera> cams;
    try {
        const json& arr_ = doc.at("cameras");
        if (!arr_.is_array())
            throw ParseError("cameras: expected array");
        for (size_t i = 0; i < arr_.size(); ++i) {
            const std::string ctx = "camera " + std::to_string(i);
            const json& r = arr_[i];
            Camera c;
            c.fx = r.at("fx").get<double>();
            c.fy = r.at("fy").get<double>();
            c.cx = r.at("cx").get<double>();
            c.cy = r.at("cy").get<double>();
            c.width = r.at("width").get<int>();
            c.height = r.at("height").get<int>();
            const json& m = r.at("world_to_cam");
            if (!m.is_array() || m.size() != 16)
                throw ParseError(ctx + ".world_to_cam: expected 16 numbers (row-major)");
            for (int k = 0; k < 16; ++k)
                c.world_to_cam(k / 4, k % 4) = m[k].get<double>();
            c.validate();
            cams.push_back(c);
        }
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return cams;
}

void save_cameras(const std::vector<Camera>& cams, const std::string& path) {
    json doc;
    json arr_ = json::array();
    for (const Camera& c : cams) {
        json r;
        r["fx"] = c.fx;
        r["fy"] = c.fy;
        r["cx"] = c.cx;
        r["cy"] = c.cy;
        r["width"] = c.width;
        r["height"] = c.height;
        json m = json::array();
        for (int k = 0; k < 16; ++k)
            m.push_back(c.world_to_cam(k / 4, k % 4));
        r["world_to_cam"] = std::move(m);
        arr_.push_back(std::move(r));
    }
    doc["cameras"] = std::move(arr_);
    write_json(doc, path);
}

}  // namespace gt2
