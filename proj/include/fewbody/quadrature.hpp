#ifndef FEWBODY_QUADRATURE_HPP
#define FEWBODY_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace fewbody {

struct QuadRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Gauss-Legendre rule on [-1,1]; nodes by Newton iteration on P_n.
QuadRule gauss_legendre(int n);

// Same rule mapped to [a,b].
QuadRule gauss_legendre(int n, double a, double b);

struct QuadResult {
  double value = 0.0;
  double error = 0.0; // estimated absolute error
};

// Adaptive Gauss-Kronrod (G7,K15) on [a,b]. Bisects until the local error
// estimate meets abs_tol + rel_tol*|I|; throws ResolutionError past
// max_depth.
QuadResult integrate_adaptive(const std::function<double(double)>& f,
                              double a, double b, double abs_tol,
                              double rel_tol, int max_depth = 48);

} // namespace fewbody

#endif
