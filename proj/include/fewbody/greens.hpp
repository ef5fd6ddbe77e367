#ifndef FEWBODY_GREENS_HPP
#define FEWBODY_GREENS_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fewbody/reports.hpp"

namespace fewbody {

// Repulsive-Coulomb resolvent G = [-Delta + A*eta_{-1}(r) + k^2]^{-1} on
// L^2(R^3), built channel by channel from the radial equation
//   [-d2/dr2 + l(l+1)/r^2 + A*eta_{-1}(r) + k^2] g_l(r,r') = delta(r-r').
// Everything is carried in log space: the regular and decaying solutions
// are positive and non-oscillatory, so ln(u) and its derivative are the
// stable variables at both ends of the grid.

struct GreensParams {
  double r_min = 1e-4;
  int per_decade = 160;
  double defect_tol = 1e-8;     // ODE residual bound at interval midpoints
  double wronskian_tol = 1e-8;  // relative drift along the grid
  double ode_tol = 1e-13;       // integrator step tolerance
};

struct RadialGrid {
  std::vector<double> r;
  double r_min = 0.0, r_max = 0.0;
  int index_of_floor(double radius) const; // largest i with r[i] <= radius
};

struct Channel {
  int l = 0;
  std::vector<double> log_reg, dlog_reg; // ln u_reg and (ln u_reg)'
  std::vector<double> log_dec, dlog_dec;
  double log_wronskian = 0.0;
  double max_defect = 0.0;       // max relative ODE residual at midpoints
  double wronskian_drift = 0.0;  // max |W_i/W_ref - 1|
  int first_valid = 0;           // nodes below this were power-law seeded
};

struct KernelValue {
  double value = 0.0;
  double trunc_error = 0.0;
};

class ResolventSolver {
public:
  // r_max = max(40/k, r_max_hint); the grid resolves both the resolvent
  // range and the unit cutoff radius of eta_{-1}.
  ResolventSolver(double a, double k, double r_max_hint,
                  GreensParams params = {});

  double a() const { return a_; }
  double k() const { return k_; }
  const RadialGrid& grid() const { return grid_; }
  const GreensParams& params() const { return params_; }

  // Lazily solves and caches the radial channel; throws ResolutionError
  // when the defect or Wronskian checks fail.
  const Channel& channel(int l);

  // g_l(r, r') by Hermite interpolation between grid nodes.
  double reduced_kernel(int l, double r, double rp);

  // Full kernel G(r, r'; cos theta) via the Legendre sum, with a
  // ratio-test tail estimate. Throws LmaxInsufficientError if the series
  // has not converged to rel_tol by l_cap.
  KernelValue kernel(double r, double rp, double cos_theta,
                     double rel_tol = 1e-10, int l_cap = 4000);

  // Operator norm of G_l * (column weight), restricted to columns
  // r' <= col_cutoff (no restriction when col_cutoff <= 0), and rows
  // r <= row_cutoff (same convention). `col_weight_alpha` applies
  // eta_{-alpha}(r') to the columns when set.
  double channel_norm(int l, double row_cutoff, double col_cutoff,
                      std::optional<double> col_weight_alpha = {});

private:
  double a_ = 1.0, k_ = 1.0;
  GreensParams params_;
  RadialGrid grid_;
  std::vector<std::optional<Channel>> channels_;

  double potential(double r) const;  // A*eta_{-1}(r) + k^2
  Channel solve_channel(int l) const;
};

// Positive root of a(a+1) = 4A (comparison-potential strength).
double comparison_root(double a_coulomb);

// sup_l ||G_l chi_n|| with the monotone-tail stopping rule; the channel
// norms decrease in l (larger centrifugal term, pointwise smaller
// kernel), which the scan verifies before stopping.
struct OpNormResult {
  double norm = 0.0;
  int l_at_max = 0;
  std::vector<double> per_channel;
};
OpNormResult op_norm_chi(ResolventSolver& solver, double n,
                         int l_max = 256);

// ||chi_R G chi_R|| (both sides restricted).
double op_norm_windowed(ResolventSolver& solver, double radius);

// sup_l ||G_l eta_{-alpha}||.
OpNormResult op_norm_eta(ResolventSolver& solver, double alpha,
                         int l_max = 256);

// Rigorous per-n coefficient from the far-field estimate:
// ||G chi_n||/n <= 4/A + HS(n)/n with HS the Hilbert-Schmidt bound of
// the far block, computable in closed form. Valid for n >= 1.
double far_field_tail_coefficient(double a_coulomb, double n);

// Far-field kernel bound on {|r| >= 4n, |r'| <= n}:
//   G <= exp((a/2)(sqrt(2n) - sqrt(|r| - n))) / (12 pi n),
// sampled against the numerical kernel. Also checks the short-range
// branch G <= 1/(4 pi |r - r'|) for |r - r'| <= 2n.
BoundReport verify_far_field(ResolventSolver& solver, double n, int samples,
                             std::uint64_t seed);

// A*eta_{-1}(r) >= (a^2/4 r^{-1} + a/4 r^{-3/2}) chi_{r>=1}.
BoundReport verify_comparison_potential(double a_coulomb, int samples);

// | chi_{|s-s'|>=1}/|s-s'| - eta_{-1}(s) | <= 2 eta_2(s') eta_{-2}(s).
BoundReport verify_two_point_inequality(int samples, std::uint64_t seed);

struct EtaCorollaryResult {
  double alpha = 0.0;
  BoundReport report;
  double b_hat = 0.0;       // max_{n<=n_max,k} op_norm_chi/n
  double series_factor = 0.0;
  double tail_term = 0.0;   // rigorous contribution of shells n > n_max
  double bound = 0.0;
  std::vector<double> measured; // ||G eta_{-alpha}|| per k
};

// ||G eta_{-alpha}|| <= sqrt(b_hat^2 (1 + sum n^2 (n-1)^{-2 alpha}) + tail)
// verified uniformly over k_list, one result per alpha (> 3/2). The
// chi_n norm measurements are shared across the alpha list.
std::vector<EtaCorollaryResult> verify_eta_corollary(
    double a_coulomb, const std::vector<double>& alphas,
    const std::vector<double>& k_list, int n_max, double r_max_hint,
    GreensParams params = {});

} // namespace fewbody

#endif
