#include "fewbody/quadrature.hpp"

#include <cmath>
#include <mutex>
#include <unordered_map>

#include "fewbody/errors.hpp"

namespace fewbody {

QuadRule gauss_legendre(int n) {
  static std::unordered_map<int, QuadRule> cache;
  static std::mutex cache_mutex;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  QuadRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    // Chebyshev-angle initial guess, then Newton on P_n.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    rule.w[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.w[n - 1 - i] = rule.w[i];
  }
  std::lock_guard<std::mutex> lock(cache_mutex);
  cache[n] = rule;
  return rule;
}

QuadRule gauss_legendre(int n, double a, double b) {
  QuadRule base = gauss_legendre(n);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    base.x[i] = mid + half * base.x[i];
    base.w[i] *= half;
  }
  return base;
}

namespace {

// (G7,K15) node/weight pairs on [-1,1]; Kronrod weights for all 15 nodes,
// Gauss weights for the embedded 7.
constexpr double kKronrodX[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};
constexpr double kKronrodW[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};
constexpr double kGaussW[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct Segment {
  double a, b, value, error;
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double ik = 0.0, ig = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double y = f(mid + half * kKronrodX[i]);
    ik += kKronrodW[i] * y;
    if (i % 2 == 1) ig += kGaussW[i / 2] * y;
  }
  ik *= half;
  ig *= half;
  return Segment{a, b, ik, std::abs(ik - ig)};
}

} // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b, double abs_tol,
                              double rel_tol, int max_depth) {
  QuadResult out;
  if (a == b) return out;
  // Globally adaptive: always split the segment with the worst error
  // estimate, so kinks get localized without starving the leaf budget.
  std::vector<Segment> segments{gk15(f, a, b)};
  const std::size_t max_segments =
      64 * static_cast<std::size_t>(std::max(1, max_depth));
  for (;;) {
    double total = 0.0, err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      total += segments[i].value;
      err += segments[i].error;
      if (segments[i].error > segments[worst].error) worst = i;
    }
    if (err <= abs_tol + rel_tol * std::abs(total)) {
      out.value = total;
      out.error = err;
      return out;
    }
    if (segments.size() >= max_segments)
      throw ResolutionError("adaptive quadrature: segment budget exceeded");
    const Segment s = segments[worst];
    const double mid = 0.5 * (s.a + s.b);
    if (mid <= s.a || mid >= s.b) {
      // Interval at machine resolution; accept its estimate as is.
      out.value = total;
      out.error = err;
      return out;
    }
    segments[worst] = gk15(f, s.a, mid);
    segments.push_back(gk15(f, mid, s.b));
  }
}

} // namespace fewbody
