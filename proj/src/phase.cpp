#include "fxtnes/phase.hpp"

#include <cmath>

namespace fxtnes {

double wrap_angle(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  // fmod of a tiny negative can round back up to exactly 2*pi.
  if (w >= kTwoPi) w = 0.0;
  return w;
}

Vector rotate_phases(const Vector& phase, const Vector& rates, double dt) {
  Vector out(phase.size());
  for (Eigen::Index i = 0; i < phase.size(); ++i)
    out(i) = wrap_angle(phase(i) + rates(i) * dt);
  return out;
}

}  // namespace fxtnes
