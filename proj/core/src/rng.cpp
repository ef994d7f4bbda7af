#include "gt2/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace gt2 {

int Rng::uniform_int(int lo, int hi) {
    if (hi < lo)
        throw std::invalid_argument("uniform_int: hi < lo");
    const uint64_t span = static_cast<uint64_t>(hi) - lo + 1;
    return lo + static_cast<int>(next_u64() % span);
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
}

}  // namespace gt2
