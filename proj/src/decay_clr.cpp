#include "fewbody/decay_clr.hpp"

#include <algorithm>
#include <cmath>

#include "fewbody/errors.hpp"
#include "fewbody/quadrature.hpp"

namespace fewbody {

double ahlrichs_constant(double z, double gap) {
  if (!(gap > 0.0)) throw InvalidInput("ahlrichs_constant: gap must be > 0");
  if (z < 0.0) throw InvalidInput("ahlrichs_constant: Z must be >= 0");
  return z / (2.0 * gap) + std::sqrt(z * z + 2.0 * gap) / (2.0 * gap);
}

double moment_ratio_bound(double z, double gap, int n) {
  if (!(gap > 0.0)) throw InvalidInput("moment_ratio_bound: gap must be > 0");
  if (n < 0) throw InvalidInput("moment_ratio_bound: n must be >= 0");
  const double m = n + 2.0;
  return (z + std::sqrt(z * z + 0.5 * gap * m * m)) / (2.0 * gap);
}

namespace {

// Expanded plain-Gaussian representation of the (optionally symmetrized)
// state: psi = sum_t weight_t * exp(-x^T A_t x / 2).
struct Expanded {
  std::vector<Eigen::MatrixXd> widths;
  std::vector<double> weights;
};

Expanded expand_state(const SystemSpec& spec, const GaussianBasis& basis,
                      const SpectralResult& state) {
  Expanded ex;
  const int m = basis.size();
  if (state.coeff.size() != m)
    throw InvalidInput("verify_decay: coefficient/basis size mismatch");
  for (int i = 0; i < m; ++i) {
    if (spec.exchange) {
      const Eigen::MatrixXd& p = *spec.exchange;
      ex.widths.push_back(basis[i]);
      ex.weights.push_back(0.5 * state.coeff[i]);
      ex.widths.push_back(p.transpose() * basis[i] * p);
      ex.weights.push_back(0.5 * state.coeff[i]);
    } else {
      ex.widths.push_back(basis[i]);
      ex.weights.push_back(state.coeff[i]);
    }
  }
  return ex;
}

// Mixed radial moments int |r1|^m |r2|^p exp(-x^T B x / 2) over R^3 x R^3
// for all m+p <= n_max at once. The angular integrals reduce the pair
// density to exp(-(b11 r1^2 + b22 r2^2)/2) * sinh(|b12| r1 r2)/(b12 r1 r2),
// evaluated in overflow-safe form.
Eigen::MatrixXd pair_moments_2d(const Eigen::MatrixXd& b, int n_max) {
  const double b11 = b(0, 0), b22 = b(1, 1), b12 = std::abs(b(0, 1));
  const double det = b11 * b22 - b12 * b12;
  if (!(det > 0.0) || !(b11 > 0.0))
    throw InvalidInput("pair_moments: B not positive-definite");
  const double sigma1 = std::sqrt(b22 / det);
  const double sigma2 = std::sqrt(b11 / det);
  const double reach = std::sqrt(n_max + 2.0) + 9.0;
  const int nq = 96;
  const QuadRule q1 = gauss_legendre(nq, 0.0, sigma1 * reach);
  const QuadRule q2 = gauss_legendre(nq, 0.0, sigma2 * reach);

  Eigen::MatrixXd pow1(nq, n_max + 1), pow2(nq, n_max + 1);
  for (int i = 0; i < nq; ++i) {
    pow1(i, 0) = 1.0;
    pow2(i, 0) = 1.0;
    for (int m = 1; m <= n_max; ++m) {
      pow1(i, m) = pow1(i, m - 1) * q1.x[i];
      pow2(i, m) = pow2(i, m - 1) * q2.x[i];
    }
  }

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  std::vector<double> col_acc(n_max + 1);
  for (int j = 0; j < nq; ++j) {
    const double r2 = q2.x[j];
    std::fill(col_acc.begin(), col_acc.end(), 0.0);
    for (int i = 0; i < nq; ++i) {
      const double r1 = q1.x[i];
      const double c = b12 * r1 * r2;
      const double expo = -0.5 * b11 * r1 * r1 - 0.5 * b22 * r2 * r2 + c;
      double shfac; // e^{-c} sinh(c)/c, folded with the exponent above
      if (c < 1e-8)
        shfac = 1.0 - c; // series of (1 - e^{-2c})/(2c)
      else
        shfac = -std::expm1(-2.0 * c) / (2.0 * c);
      const double w = q1.w[i] * std::exp(expo) * shfac * r1 * r1;
      for (int m = 0; m <= n_max; ++m) col_acc[m] += w * pow1(i, m);
    }
    const double wj = q2.w[j] * r2 * r2;
    for (int m = 0; m <= n_max; ++m)
      for (int p = 0; p + m <= n_max; ++p)
        out(m, p) += col_acc[m] * wj * pow2(j, p);
  }
  // 8 pi^2 from the angular measure (4 pi) x (2 pi) x the cos-angle
  // integral already folded into shfac.
  return out * (8.0 * M_PI * M_PI);
}

Eigen::VectorXd pair_moments_1d(double b, int n_max) {
  // 4 pi int r^{2+m} e^{-b r^2/2} dr, by quadrature for consistency with
  // the 2D engine.
  const double sigma = 1.0 / std::sqrt(b);
  const double reach = std::sqrt(n_max + 2.0) + 9.0;
  const int nq = 96;
  const QuadRule q = gauss_legendre(nq, 0.0, sigma * reach);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_max + 1);
  for (int i = 0; i < nq; ++i) {
    const double r = q.x[i];
    const double w = q.w[i] * std::exp(-0.5 * b * r * r) * r * r;
    double pm = 1.0;
    for (int m = 0; m <= n_max; ++m) {
      out[m] += w * pm;
      pm *= r;
    }
  }
  return out * (4.0 * M_PI);
}

// All normalized moments (psi, |r1|^m |r2|^p psi)/(psi,psi), m+p <= n_max.
Eigen::MatrixXd state_mixed_moments(const SystemSpec& spec,
                                    const GaussianBasis& basis,
                                    const SpectralResult& state, int n_max) {
  if (spec.n_vec != 2)
    throw InvalidInput("mixed moments: only n_vec == 2 is supported");
  const Expanded ex = expand_state(spec, basis, state);
  const int t = static_cast<int>(ex.widths.size());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int a = 0; a < t; ++a)
    for (int b = a; b < t; ++b) {
      const double wgt = ex.weights[a] * ex.weights[b] * (a == b ? 1.0 : 2.0);
      if (wgt == 0.0) continue;
      acc += wgt * pair_moments_2d(ex.widths[a] + ex.widths[b], n_max);
    }
  const double norm2 = acc(0, 0);
  if (!(norm2 > 0.0)) throw InvalidInput("mixed moments: zero-norm state");
  return acc / norm2;
}

} // namespace

double mixed_radial_moment(const SystemSpec& spec, const GaussianBasis& basis,
                           const SpectralResult& state, int m, int p) {
  if (spec.n_vec == 1) {
    if (p != 0) throw InvalidInput("mixed_radial_moment: p must be 0 in 1D");
    const Expanded ex = expand_state(spec, basis, state);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m + 1);
    for (std::size_t a = 0; a < ex.widths.size(); ++a)
      for (std::size_t b = a; b < ex.widths.size(); ++b) {
        const double wgt =
            ex.weights[a] * ex.weights[b] * (a == b ? 1.0 : 2.0);
        acc += wgt * pair_moments_1d(ex.widths[a](0, 0) + ex.widths[b](0, 0),
                                     m);
      }
    return acc[m] / acc[0];
  }
  return state_mixed_moments(spec, basis, state, m + p)(m, p);
}

MomentReport verify_decay(const SystemSpec& spec, const GaussianBasis& basis,
                          const SpectralResult& state,
                          const DecayBudget& budget, double threshold,
                          int n_max) {
  if (n_max < 1) throw InvalidInput("verify_decay: n_max must be >= 1");
  if (state.e0 >= threshold - budget.gap)
    throw BoundPreconditionError(
        "verify_decay: state does not sit below threshold by the budget gap");

  const double c = budget.c_const();
  const double beta = budget.beta();
  const Eigen::MatrixXd mixed =
      state_mixed_moments(spec, basis, state, n_max);

  MomentReport report;
  report.c_const = c;
  report.beta = beta;

  // |r|^n = (|r1| + |r2|)^n expanded binomially over the mixed moments.
  double series = 0.0;
  double two_beta_pow = 1.0; // (2 beta)^n / n!
  for (int n = 0; n <= n_max; ++n) {
    double moment = 0.0;
    double bc = 1.0;
    for (int m = 0; m <= n; ++m) {
      moment += bc * mixed(m, n - m);
      bc = bc * (n - m) / (m + 1.0);
    }
    if (n > 0) {
      MomentEntry e;
      e.n = n;
      e.moment = moment;
      double bound = 1.0;
      for (int j = 1; j <= n; ++j) bound *= c * budget.n_e * j;
      e.bound = bound;
      e.ratio = moment / bound;
      e.pass = e.ratio <= 1.0;
      report.entries.push_back(e);
    }
    series += two_beta_pow * moment;
    two_beta_pow *= 2.0 * beta / (n + 1.0);
  }

  report.series_value = series;
  // Per-n bounds give (2 beta)^n moment_n / n! <= (2 beta C N_e)^n = 2^{-n}.
  report.series_tail = std::pow(2.0, -n_max);
  report.series_pass = report.series_value + report.series_tail <= 2.0;
  report.all_pass = report.series_pass;
  for (const auto& e : report.entries) report.all_pass &= e.pass;
  return report;
}

double clr_count_bound(double t, double a_weight, double beta, int d, int n_s,
                       double c_d) {
  if (d < 3)
    throw InvalidInput("clr_count_bound: only d >= 3 is in scope");
  if (!(t > 0.0) || !(a_weight > 0.0) || !(beta > 0.0) || n_s < 1)
    throw InvalidInput("clr_count_bound: T, A, beta must be positive");
  const double ln2a = std::abs(std::log(2.0 * a_weight));
  return c_d * std::pow(2.0 * t, 0.5 * d) * std::pow(ln2a, d) /
         std::pow(2.0 * beta, d) * n_s;
}

namespace {

double sph_j(int l, double x) { return std::sph_bessel(l, x); }

} // namespace

int square_well_count(double t, double radius) {
  if (!(t > 0.0) || !(radius > 0.0))
    throw InvalidInput("square_well_count: T and R must be positive");
  const double kk = std::sqrt(2.0 * t);
  const double x_max = kk * radius;
  int total = 0;
  for (int l = 0;; ++l) {
    // Interior nodes: zeros of j_l on (0, K R). Zero spacing exceeds
    // pi/2, so a pi/8 scan cannot skip one.
    int nodes = 0;
    const double x0 = std::max(1e-9, 0.2 * l);
    double prev = sph_j(l, x0);
    const double step = M_PI / 8.0;
    for (double x = x0 + step; x < x_max; x += step) {
      const double cur = sph_j(l, x);
      if (prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0)) ++nodes;
      if (cur != 0.0) prev = cur;
    }
    {
      const double cur = sph_j(l, x_max * (1.0 - 1e-14));
      if (prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0)) ++nodes;
    }

    // Match u = r j_l(K r) to alpha r^{l+1} + gamma r^{-l} at R; a node
    // beyond R exists iff the asymptotic branch flips sign against u(R).
    const double u = radius * sph_j(l, x_max);
    const double jp =
        l == 0 ? -sph_j(1, x_max)
               : sph_j(l - 1, x_max) - (l + 1.0) / x_max * sph_j(l, x_max);
    const double up = sph_j(l, x_max) + radius * kk * jp;
    const double alpha = (l * u + radius * up) /
                         ((2.0 * l + 1.0) * std::pow(radius, l + 1.0));
    if (alpha * u < 0.0) ++nodes;

    if (nodes == 0) break; // channel counts are non-increasing in l
    total += (2 * l + 1) * nodes;
  }
  return total;
}

} // namespace fewbody
