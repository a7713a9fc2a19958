#pragma once

#include "fxtnes/linalg.hpp"

namespace fxtnes {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Maps an angle to [0, 2*pi).
double wrap_angle(double phi);

/// phase_i <- wrap(phase_i + rates_i * dt). Rates are in radians per unit time.
Vector rotate_phases(const Vector& phase, const Vector& rates, double dt);

}  // namespace fxtnes
