#include "latentshield/rng.hpp"

#include <cmath>

namespace latentshield {

double SplitMix64::next_gaussian(double sigma) {
    if (has_spare_) {
        has_spare_ = false;
        return spare_ * sigma;
    }
    // Box-Muller; u1 is nudged away from 0 so log stays finite.
    double u1 = next_unit();
    const double u2 = next_unit();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta) * sigma;
}

}  // namespace latentshield
