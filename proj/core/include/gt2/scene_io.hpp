#pragma once

#include <string>
#include <vector>

#include "gt2/scene.hpp"

namespace gt2 {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scene and camera documents are UTF-8 JSON; field layout is documented in
// the README and pinned by golden-file tests. Loading validates and throws
// ParseError / ValidationError with the offending record index.
GaussianScene load_scene(const std::string& path);
void save_scene(const GaussianScene& scene, const std::string& path);

std::vector<Camera> load_cameras(const std::string& path);
void save_cameras(const std::vector<Camera>& cams, const std::string& path);

}  // namespace gt2
