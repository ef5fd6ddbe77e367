#ifndef FEWBODY_DECAY_CLR_HPP
#define FEWBODY_DECAY_CLR_HPP

#include <cmath>
#include <vector>

#include "fewbody/cg_engine.hpp"

namespace fewbody {

// Lieb's bound on the 3D CLR constant (N <= L3 * int |V_-|^{3/2} dx for
// -Delta + V), L. Lieb, Bull. AMS 82 (1976). The packaged coefficient
// below additionally carries the unit-ball volume because the state-count
// formula integrates a constant well depth over a ball.
inline constexpr double kLiebL3 = 0.1156;
inline const double kUnitBallVolume3 = 4.0 * M_PI / 3.0;
inline const double kClrC3 = kLiebL3 * kUnitBallVolume3;

// C = Z/(2|de|) + sqrt(Z^2 + 2|de|)/(2|de|); decay rate beta = 1/(4 C N_e).
double ahlrichs_constant(double z, double gap);

struct DecayBudget {
  double z = 1.0;
  double gap = 0.1; // threshold gap |Delta eps| > 0
  int n_e = 2;

  double c_const() const { return ahlrichs_constant(z, gap); }
  double beta() const { return 1.0 / (4.0 * c_const() * n_e); }
};

// Right-hand side of the single-coordinate moment recursion
//   (psi,|r1|^{n+1}psi)/(psi,|r1|^n psi) <= rhs(n),
// which transforms into rhs(n) <= (n+1) C.
double moment_ratio_bound(double z, double gap, int n);

struct MomentEntry {
  int n = 0;
  double moment = 0.0; // (psi, |r|^n psi), state normalized
  double bound = 0.0;  // (C N_e)^n n!
  double ratio = 0.0;
  bool pass = false;
};

struct MomentReport {
  std::vector<MomentEntry> entries;
  double c_const = 0.0;
  double beta = 0.0;
  double series_value = 0.0; // sum_{n<=n_max} (2 beta)^n / n! * moment_n
  double series_tail = 0.0;  // rigorous remainder: 2^{-n_max}
  bool series_pass = false;  // series_value + tail <= 2
  bool all_pass = false;
};

// Moments (psi, |r|^n psi) with |r| = sum_i |r_i| for a correlated-
// Gaussian state, via the multinomial expansion over per-coordinate
// radial moments (2D radial quadrature per basis pair). Throws
// BoundPreconditionError when E0 >= threshold - gap.
MomentReport verify_decay(const SystemSpec& spec, const GaussianBasis& basis,
                          const SpectralResult& state,
                          const DecayBudget& budget, double threshold,
                          int n_max);

// Raw mixed radial moments (psi, |r_1|^m |r_2|^p psi) / (psi, psi) for
// tests and diagnostics (n_vec == 2), plus the 1-coordinate variant.
double mixed_radial_moment(const SystemSpec& spec, const GaussianBasis& basis,
                           const SpectralResult& state, int m, int p);

// N <= C_d (2T)^{d/2} |ln 2A|^d / (2 beta)^d * n_s. Throws for d < 3.
double clr_count_bound(double t, double a_weight, double beta, int d, int n_s,
                       double c_d);

// Exact bound-state count of -Delta - 2T chi_{|x|<=R} in R^3 by
// partial-wave node counting of the zero-energy regular solution.
int square_well_count(double t, double radius);

} // namespace fewbody

#endif
