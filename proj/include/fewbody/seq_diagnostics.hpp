#ifndef FEWBODY_SEQ_DIAGNOSTICS_HPP
#define FEWBODY_SEQ_DIAGNOSTICS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "fewbody/reports.hpp"

namespace fewbody {

// An L^2 function carried as an evaluation callback plus the quadrature
// recipe that computes its tail mass. Deterministic radial quadrature
// serves the radial-profile families; Monte Carlo covers generic
// high-dimensional callbacks.
class SampledFunction {
public:
  int dimension() const { return d_; }
  double norm() const { return norm_; }
  double eval(const Eigen::VectorXd& x) const { return eval_(x); }

  struct TailMass {
    double value = 0.0;
    double error = 0.0;
  };
  // ||chi_{|x|>R} f||, with an error estimate from the quadrature.
  TailMass tail_mass(double radius) const;

  // f(x) = profile(|x - center|) on R^3; exact spherical-cap weights make
  // the tail integral deterministic and accurate.
  static SampledFunction radial3d(std::function<double(double)> profile,
                                  const Eigen::Vector3d& center,
                                  double support_hint);

  // f(xa, ra) = u(|xa|) v(|ra|) on R^{d1} x R^3 with the cluster
  // convention |x| = |xa| + |ra|.
  static SampledFunction product_radial(int d1,
                                        std::function<double(double)> u,
                                        std::function<double(double)> v,
                                        double support_hint);

  // Generic callback integrated by Monte Carlo over a Gaussian proposal.
  static SampledFunction generic_mc(int d,
                                    std::function<double(const Eigen::VectorXd&)> f,
                                    const Eigen::VectorXd& proposal_center,
                                    double proposal_sigma, int mc_samples,
                                    std::uint64_t seed);

private:
  int d_ = 3;
  double norm_ = 0.0;
  std::function<double(const Eigen::VectorXd&)> eval_;
  std::function<TailMass(double)> tail_;
};

double tail_mass(const SampledFunction& f, double radius);

struct SpreadProbe {
  std::vector<std::vector<double>> tail_table; // [n][R index]
  std::vector<double> r_grid;
  double a_level = 0.0;
  bool spread_proxy = false;
};

// Finite-sequence proxy for the spreading definition: the limsup is
// replaced by the max over the trailing half of the sequence. Verdict
// spread-proxy iff that max exceeds `a` for every R in the grid.
SpreadProbe probe_sequence(const std::vector<SampledFunction>& seq,
                           const std::vector<double>& r_grid, double a);

// |f_n| <= |f_{n+1}| on the sample points and norms uniformly bounded.
bool check_monotone_domination(const std::vector<SampledFunction>& seq,
                               const std::vector<Eigen::VectorXd>& samples,
                               double norm_bound);

// Greedy extraction of a pointwise-monotone subsequence (indices).
std::vector<int> extract_monotone_subsequence(
    const std::vector<SampledFunction>& seq,
    const std::vector<Eigen::VectorXd>& samples);

// Indicator split chi_{|x|>=2R} <= chi_{|xa|>=R} + chi_{|ra|>=R} under
// |x| = |xa| + |ra|, on random samples.
BoundReport check_indicator_split(int d1, int samples, std::uint64_t seed);

// Tail split for weighted-multiplier families (A_n f_n)(xa, ra) =
// w(|xa|) f_n(xa, ra): given sup_n ||weight_growth * w||_inf < K, a
// non-spreading f_n family stays non-spreading. Verified on product
// families by direct tail computation.
struct ProductSplitCheck {
  BoundReport indicator;
  bool composed_non_spread = false;
};
ProductSplitCheck check_product_split(
    const std::vector<SampledFunction>& composed_seq,
    const std::vector<double>& r_grid, double a, int d1, int samples,
    std::uint64_t seed);

} // namespace fewbody

#endif
