#include "fewbody/kinematics.hpp"

#include <cmath>

#include "fewbody/errors.hpp"

namespace fewbody {

void MassCharge::validate() const {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(m3 > 0.0))
    throw InvalidInput("masses must be positive");
  if (q1 < 0.0 || q2 < 0.0)
    throw InvalidInput("charges q1, q2 must be non-negative");
}

namespace {

Eigen::Vector2d normalize_sign(Eigen::Vector2d w) {
  for (int i = 0; i < 2; ++i) {
    if (w[i] != 0.0) {
      if (w[i] < 0.0) w = -w;
      break;
    }
  }
  return w;
}

} // namespace

JacobiFrame build_frame(const MassCharge& mc) {
  mc.validate();
  JacobiFrame f;
  f.source = mc;
  f.s = mc.m3 / (mc.m2 + mc.m3);
  f.mu23 = mc.m2 * mc.m3 / (mc.m2 + mc.m3);
  f.mu13 = mc.m1 * mc.m3 / (mc.m1 + mc.m3);
  f.mu = mc.m1 * (mc.m2 + mc.m3) / (mc.m1 + mc.m2 + mc.m3);
  f.lambda.setZero();
  f.lambda(0, 0) = 1.0 / (2.0 * f.mu23);
  f.lambda(1, 1) = 1.0 / (2.0 * f.mu);

  // r3 - r2 = xi ; r1 - r3 = R - (1-s)xi ; r1 - r2 = R + s*xi.
  f.pairs[0] = {normalize_sign({1.0, 0.0}), mc.q2 * (-1.0), "23"};
  f.pairs[1] = {normalize_sign({-(1.0 - f.s), 1.0}), mc.q1 * (-1.0), "13"};
  f.pairs[2] = {normalize_sign({f.s, 1.0}), mc.q1 * mc.q2, "12"};
  return f;
}

double eta_radial(double alpha, double radius) {
  if (radius < 0.0) throw InvalidInput("eta: negative radius");
  return radius <= 1.0 ? 1.0 : std::pow(radius, alpha);
}

double eta(double alpha, const Eigen::Vector3d& r) {
  return eta_radial(alpha, r.norm());
}

ThresholdInfo threshold_energy(const JacobiFrame& frame, double q1,
                               double q2) {
  if (q1 < 0.0 || q2 < 0.0) throw InvalidInput("threshold: negative charge");
  const double e23 = frame.mu23 * q2 * q2;
  const double e13 = frame.mu13 * q1 * q1;
  ThresholdInfo info;
  if (e23 == 0.0 && e13 == 0.0) {
    info.energy = 0.0;
    info.channel = ThresholdChannel::None;
    return info;
  }
  const double big = std::max(e23, e13);
  info.energy = -0.5 * big;
  if (std::abs(e23 - e13) <= 1e-12 * big)
    info.channel = ThresholdChannel::Tied;
  else
    info.channel =
        e23 > e13 ? ThresholdChannel::Pair23 : ThresholdChannel::Pair13;
  return info;
}

double equal_threshold_q2(const JacobiFrame& frame, double q1) {
  if (q1 < 0.0) throw InvalidInput("equal_threshold_q2: negative charge");
  return q1 * std::sqrt(frame.mu13 / frame.mu23);
}

const char* channel_name(ThresholdChannel c) {
  switch (c) {
    case ThresholdChannel::None: return "none";
    case ThresholdChannel::Pair23: return "23";
    case ThresholdChannel::Pair13: return "13";
    case ThresholdChannel::Tied: return "tied";
  }
  return "?";
}

} // namespace fewbody
