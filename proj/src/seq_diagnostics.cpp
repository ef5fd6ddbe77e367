#include "fewbody/seq_diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "fewbody/errors.hpp"
#include "fewbody/quadrature.hpp"
#include "fewbody/rng.hpp"

namespace fewbody {

namespace {

// Fraction of the sphere {c + rho*omega} lying outside the ball B_R(0).
double cap_fraction_outside(double rho, double c, double big_r) {
  if (c + rho <= big_r) return 0.0;
  if (rho >= c + big_r || c >= rho + big_r) return 1.0;
  if (c < 1e-300) return rho > big_r ? 1.0 : 0.0;
  const double t =
      std::clamp((big_r * big_r - c * c - rho * rho) / (2.0 * c * rho), -1.0,
                 1.0);
  return 0.5 * (1.0 - t);
}

double sphere_surface(int d) {
  return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

} // namespace

SampledFunction::TailMass SampledFunction::tail_mass(double radius) const {
  if (radius < 0.0) throw InvalidInput("tail_mass: R must be >= 0");
  return tail_(radius);
}

double tail_mass(const SampledFunction& f, double radius) {
  return f.tail_mass(radius).value;
}

SampledFunction SampledFunction::radial3d(std::function<double(double)> profile,
                                          const Eigen::Vector3d& center,
                                          double support_hint) {
  if (!(support_hint > 0.0))
    throw InvalidInput("radial3d: support_hint must be positive");
  SampledFunction f;
  f.d_ = 3;
  const double c = center.norm();
  auto squared_tail = [profile, c, support_hint](double big_r) {
    auto integrand = [&](double rho) {
      const double p = profile(rho);
      return 4.0 * M_PI * rho * rho * p * p *
             cap_fraction_outside(rho, c, big_r);
    };
    return integrate_adaptive(integrand, 0.0, support_hint, 1e-24, 1e-12);
  };
  const QuadResult full = squared_tail(0.0);
  f.norm_ = std::sqrt(std::max(0.0, full.value));
  f.eval_ = [profile, center](const Eigen::VectorXd& x) {
    return profile((Eigen::Vector3d(x) - center).norm());
  };
  f.tail_ = [squared_tail](double big_r) {
    const QuadResult q = squared_tail(big_r);
    TailMass t;
    t.value = std::sqrt(std::max(0.0, q.value));
    t.error = t.value > 0.0 ? 0.5 * q.error / t.value : std::sqrt(q.error);
    return t;
  };
  return f;
}

SampledFunction SampledFunction::product_radial(
    int d1, std::function<double(double)> u, std::function<double(double)> v,
    double support_hint) {
  if (d1 < 1) throw InvalidInput("product_radial: d1 must be >= 1");
  if (!(support_hint > 0.0))
    throw InvalidInput("product_radial: support_hint must be positive");
  SampledFunction f;
  f.d_ = d1 + 3;
  const double su = sphere_surface(d1);
  const double sv = 4.0 * M_PI;
  // ||chi f||^2 = S_{d1} S_3 \int\int s^{d1-1} t^2 u^2 v^2 [s+t>R] ds dt.
  auto squared_tail = [=](double big_r) {
    auto outer = [&](double s) {
      const double us = u(s);
      if (us == 0.0) return 0.0;
      const double t_lo = std::max(0.0, big_r - s);
      if (t_lo >= support_hint) return 0.0;
      auto inner = [&](double t) {
        const double vt = v(t);
        return t * t * vt * vt;
      };
      const QuadResult qi =
          integrate_adaptive(inner, t_lo, support_hint, 1e-24, 1e-11);
      return std::pow(s, d1 - 1.0) * us * us * qi.value;
    };
    return integrate_adaptive(outer, 0.0, support_hint, 1e-22, 1e-10);
  };
  const QuadResult full = squared_tail(0.0);
  f.norm_ = std::sqrt(std::max(0.0, su * sv * full.value));
  f.eval_ = [d1, u, v](const Eigen::VectorXd& x) {
    const double s = x.head(d1).norm();
    const double t = x.tail(3).norm();
    return u(s) * v(t);
  };
  f.tail_ = [=](double big_r) {
    const QuadResult q = squared_tail(big_r);
    TailMass t;
    t.value = std::sqrt(std::max(0.0, su * sv * q.value));
    t.error = t.value > 0.0 ? 0.5 * su * sv * q.error / t.value : 0.0;
    return t;
  };
  return f;
}

SampledFunction SampledFunction::generic_mc(
    int d, std::function<double(const Eigen::VectorXd&)> fn,
    const Eigen::VectorXd& proposal_center, double proposal_sigma,
    int mc_samples, std::uint64_t seed) {
  if (proposal_center.size() != d)
    throw InvalidInput("generic_mc: proposal center has wrong dimension");
  if (!(proposal_sigma > 0.0) || mc_samples < 100)
    throw InvalidInput("generic_mc: bad proposal parameters");
  SampledFunction f;
  f.d_ = d;
  f.eval_ = fn;
  // Importance sampling from N(center, sigma^2 I); one fixed sample set
  // serves every radius so tails are consistent and deterministic.
  auto draw = std::make_shared<std::vector<Eigen::VectorXd>>();
  auto weight = std::make_shared<std::vector<double>>();
  Rng rng(seed);
  const double log_norm =
      -0.5 * d * std::log(2.0 * M_PI * proposal_sigma * proposal_sigma);
  for (int s = 0; s < mc_samples; ++s) {
    Eigen::VectorXd x(d);
    double q2 = 0.0;
    for (int i = 0; i < d; ++i) {
      const double g = rng.normal();
      q2 += g * g;
      x[i] = proposal_center[i] + proposal_sigma * g;
    }
    const double fx = fn(x);
    draw->push_back(x);
    weight->push_back(fx * fx / std::exp(log_norm - 0.5 * q2));
  }
  auto squared_tail = [draw, weight](double big_r) {
    double acc = 0.0, acc2 = 0.0;
    const int n = static_cast<int>(draw->size());
    for (int s = 0; s < n; ++s) {
      const double w = (*draw)[s].norm() > big_r ? (*weight)[s] : 0.0;
      acc += w;
      acc2 += w * w;
    }
    const double mean = acc / n;
    const double var = std::max(0.0, acc2 / n - mean * mean) / n;
    return std::pair<double, double>(mean, std::sqrt(var));
  };
  const auto full = squared_tail(0.0);
  f.norm_ = std::sqrt(std::max(0.0, full.first));
  f.tail_ = [squared_tail](double big_r) {
    const auto q = squared_tail(big_r);
    TailMass t;
    t.value = std::sqrt(std::max(0.0, q.first));
    t.error = t.value > 0.0 ? 0.5 * q.second / t.value : std::sqrt(q.second);
    return t;
  };
  return f;
}

SpreadProbe probe_sequence(const std::vector<SampledFunction>& seq,
                           const std::vector<double>& r_grid, double a) {
  if (seq.size() < 8)
    throw InvalidInput("probe_sequence: need at least 8 sequence members");
  if (r_grid.empty()) throw InvalidInput("probe_sequence: empty R grid");
  SpreadProbe probe;
  probe.r_grid = r_grid;
  probe.a_level = a;
  probe.tail_table.resize(seq.size());
  for (std::size_t n = 0; n < seq.size(); ++n) {
    probe.tail_table[n].reserve(r_grid.size());
    for (double r : r_grid)
      probe.tail_table[n].push_back(seq[n].tail_mass(r).value);
  }
  const std::size_t half = seq.size() / 2;
  probe.spread_proxy = true;
  for (std::size_t j = 0; j < r_grid.size(); ++j) {
    double best = 0.0;
    for (std::size_t n = half; n < seq.size(); ++n)
      best = std::max(best, probe.tail_table[n][j]);
    if (!(best > a)) {
      probe.spread_proxy = false;
      break;
    }
  }
  return probe;
}

bool check_monotone_domination(const std::vector<SampledFunction>& seq,
                               const std::vector<Eigen::VectorXd>& samples,
                               double norm_bound) {
  for (const auto& f : seq)
    if (f.norm() > norm_bound) return false;
  for (std::size_t n = 0; n + 1 < seq.size(); ++n)
    for (const auto& x : samples) {
      const double a = std::abs(seq[n].eval(x));
      const double b = std::abs(seq[n + 1].eval(x));
      if (a > b + 1e-12 * (1.0 + b)) return false;
    }
  return true;
}

std::vector<int> extract_monotone_subsequence(
    const std::vector<SampledFunction>& seq,
    const std::vector<Eigen::VectorXd>& samples) {
  std::vector<int> kept;
  for (int j = 0; j < static_cast<int>(seq.size()); ++j) {
    if (kept.empty()) {
      kept.push_back(j);
      continue;
    }
    const auto& last = seq[kept.back()];
    bool dominated = true;
    for (const auto& x : samples) {
      const double a = std::abs(last.eval(x));
      const double b = std::abs(seq[j].eval(x));
      if (a > b + 1e-12 * (1.0 + b)) {
        dominated = false;
        break;
      }
    }
    if (dominated) kept.push_back(j);
  }
  return kept;
}

BoundReport check_indicator_split(int d1, int samples, std::uint64_t seed) {
  if (d1 < 1) throw InvalidInput("check_indicator_split: d1 must be >= 1");
  Rng rng(seed);
  BoundReport report;
  report.name = "indicator_split";
  report.params = {{"d1", d1}, {"samples", samples}};
  report.tolerance = 0.0;
  report.max_violation = -1.0;
  for (int s = 0; s < samples; ++s) {
    const double scale_a = rng.log_uniform(1e-2, 1e2);
    const double scale_b = rng.log_uniform(1e-2, 1e2);
    double xa = 0.0;
    for (int i = 0; i < d1; ++i) {
      const double g = rng.normal() * scale_a;
      xa += g * g;
    }
    xa = std::sqrt(xa);
    double ra = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double g = rng.normal() * scale_b;
      ra += g * g;
    }
    ra = std::sqrt(ra);
    const double big_r = rng.log_uniform(1e-2, 1e2);
    const int lhs = (xa + ra >= 2.0 * big_r) ? 1 : 0;
    const int rhs = (xa >= big_r ? 1 : 0) + (ra >= big_r ? 1 : 0);
    const double violation = lhs - rhs;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.location = {{"xa", xa}, {"ra", ra}, {"R", big_r}};
    }
  }
  report.finalize();
  return report;
}

ProductSplitCheck check_product_split(
    const std::vector<SampledFunction>& composed_seq,
    const std::vector<double>& r_grid, double a, int d1, int samples,
    std::uint64_t seed) {
  ProductSplitCheck out;
  out.indicator = check_indicator_split(d1, samples, seed);
  out.composed_non_spread =
      !probe_sequence(composed_seq, r_grid, a).spread_proxy;
  return out;
}

} // namespace fewbody
