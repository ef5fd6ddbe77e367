#ifndef FEWBODY_KINEMATICS_HPP
#define FEWBODY_KINEMATICS_HPP

#include <array>
#include <string>

#include <Eigen/Core>

namespace fewbody {

// Three particles with charges {q1, q2, -1} and masses {m1, m2, m3}.
// Units: hbar = 1, kinetic coefficients carried explicitly.
struct MassCharge {
  double m1 = 1.0, m2 = 1.0, m3 = 1.0;
  double q1 = 1.0, q2 = 1.0;

  void validate() const;
};

// One internal pair: the separation r_i - r_j equals w^T (xi, R) up to
// sign (only |w^T x| is ever consumed; w is normalized so its first
// nonzero entry is positive).
struct PairDescriptor {
  Eigen::Vector2d w;
  double charge_product = 0.0;
  std::string label; // "23", "13", "12"
};

// Internal coordinates xi = r3 - r2, R = r1 - r2 - s*xi with
// s = m3/(m2+m3); kinetic form is -grad^T Lambda grad over (xi, R).
struct JacobiFrame {
  double s = 0.5;
  double mu23 = 0.5, mu13 = 0.5, mu = 2.0 / 3.0;
  Eigen::Matrix2d lambda = Eigen::Matrix2d::Zero();
  std::array<PairDescriptor, 3> pairs; // order: {23}, {13}, {12}
  MassCharge source;
};

JacobiFrame build_frame(const MassCharge& mc);

// eta_alpha(r): 1 inside the unit ball, |r|^alpha outside.
double eta_radial(double alpha, double radius);
double eta(double alpha, const Eigen::Vector3d& r);

enum class ThresholdChannel { None, Pair23, Pair13, Tied };

struct ThresholdInfo {
  double energy = 0.0;
  ThresholdChannel channel = ThresholdChannel::None;
};

// Lowest two-cluster dissociation energy: the deeper of the hydrogenic
// ground energies -mu23*q2^2/2 (channel {23}+1) and -mu13*q1^2/2
// (channel {13}+2). Ties within 1e-12 relative are reported as Tied.
ThresholdInfo threshold_energy(const JacobiFrame& frame, double q1, double q2);

// q2 on the equal-threshold line mu23*q2^2 = mu13*q1^2 for a given q1.
double equal_threshold_q2(const JacobiFrame& frame, double q1);

const char* channel_name(ThresholdChannel c);

} // namespace fewbody

#endif
