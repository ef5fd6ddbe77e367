#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "fewbody/decay_clr.hpp"
#include "fewbody/errors.hpp"
#include "fewbody/rng.hpp"
#include "oracles.hpp"

using namespace fewbody;

TEST_CASE("ahlrichs constant pinned values") {
  CHECK(ahlrichs_constant(1.0, 0.5) ==
        doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK(ahlrichs_constant(0.0, 0.125) ==
        doctest::Approx(1.0 / std::sqrt(0.25)).epsilon(1e-14));
  CHECK(ahlrichs_constant(2.0, 1e9) < 1e-3);
  CHECK_THROWS_AS(ahlrichs_constant(1.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(ahlrichs_constant(-1.0, 0.5), InvalidInput);
}

TEST_CASE("ahlrichs constant monotonicity") {
  Rng rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    const double z = rng.uniform(0.0, 5.0);
    const double gap = rng.log_uniform(1e-3, 10.0);
    CHECK(ahlrichs_constant(z, gap * 1.01) < ahlrichs_constant(z, gap));
    CHECK(ahlrichs_constant(z + 0.01, gap) > ahlrichs_constant(z, gap));
  }
}

TEST_CASE("moment ratio bound transformation") {
  // n = 0 reproduces C exactly.
  CHECK(moment_ratio_bound(1.0, 0.5, 0) ==
        doctest::Approx(ahlrichs_constant(1.0, 0.5)).epsilon(1e-14));
  // rhs(n)/(n+1) <= C across sweeps.
  Rng rng(9);
  for (int rep = 0; rep < 300; ++rep) {
    const double z = rng.uniform(0.0, 6.0);
    const double gap = rng.log_uniform(1e-2, 5.0);
    const double c = ahlrichs_constant(z, gap);
    for (int n = 0; n <= 40; ++n)
      CHECK(moment_ratio_bound(z, gap, n) <= (n + 1.0) * c * (1.0 + 1e-12));
  }
  // Large-n growth is asymptotically linear in n.
  const double r100 = moment_ratio_bound(1.0, 0.5, 100);
  const double r200 = moment_ratio_bound(1.0, 0.5, 200);
  CHECK(r200 / r100 == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("decay budget derived quantities") {
  DecayBudget b;
  b.z = 1.0;
  b.gap = 0.5;
  b.n_e = 2;
  CHECK(b.c_const() == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-14));
  CHECK(b.beta() ==
        doctest::Approx(1.0 / (8.0 * (1.0 + std::sqrt(2.0)))).epsilon(1e-14));
}

namespace {

// A 1-gaussian "state" in n_vec = 1 for the analytic-moment cross-check.
struct OneGaussian {
  SystemSpec spec;
  GaussianBasis basis;
  SpectralResult state;
};

OneGaussian one_gaussian(double width) {
  OneGaussian og;
  og.spec.n_vec = 1;
  og.spec.lambda = Eigen::MatrixXd::Identity(1, 1);
  Interaction t;
  t.w = Eigen::VectorXd::Constant(1, 1.0);
  t.g = -1.0;
  og.spec.interactions.push_back(t);
  og.basis.add(Eigen::MatrixXd::Constant(1, 1, width));
  og.state.coeff = Eigen::VectorXd::Constant(1, 1.0);
  og.state.e0 = -1.0;
  return og;
}

} // namespace

TEST_CASE("radial moments of a single gaussian match the analytic oracle") {
  const OneGaussian og = one_gaussian(1.0); // exp(-r^2/2), pair width b = 2
  for (int m = 1; m <= 8; ++m) {
    const double got = mixed_radial_moment(og.spec, og.basis, og.state, m, 0);
    const double expect = oracles::gaussian_radial_moment(2.0, m) /
                          oracles::gaussian_radial_moment(2.0, 0);
    CHECK(got == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("two coordinate moments factorize for diagonal widths") {
  SystemSpec spec = atomic_spec(1.0, std::numeric_limits<double>::infinity());
  spec.exchange.reset();
  GaussianBasis basis;
  Eigen::MatrixXd a(2, 2);
  a << 0.8, 0.0, 0.0, 1.7;
  basis.add(a);
  SpectralResult st;
  st.coeff = Eigen::VectorXd::Constant(1, 1.0);
  st.e0 = -1.0;
  for (int m : {1, 2, 3}) {
    for (int p : {0, 1, 2}) {
      const double got = mixed_radial_moment(spec, basis, st, m, p);
      const double expect =
          (oracles::gaussian_radial_moment(1.6, m) /
           oracles::gaussian_radial_moment(1.6, 0)) *
          (oracles::gaussian_radial_moment(3.4, p) /
           oracles::gaussian_radial_moment(3.4, 0));
      CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }
  }
}

TEST_CASE("verify_decay on a synthetic tight gaussian state") {
  // Gaussian moments grow like (n!!) sigma^n, far below (C N_e)^n n!
  // provided C N_e stays above the state's radial scale.
  SystemSpec spec = atomic_spec(1.0, std::numeric_limits<double>::infinity());
  GaussianBasis basis;
  Eigen::MatrixXd a(2, 2);
  a << 4.0, 0.2, 0.2, 4.0;
  basis.add(a);
  SpectralResult st;
  st.coeff = Eigen::VectorXd::Constant(1, 1.0);
  st.e0 = -10.0; // deep below the fake threshold
  DecayBudget budget;
  budget.z = 1.0;
  budget.gap = 1.0; // C N_e = 2.73 vs <|r|> about 1.1
  budget.n_e = 2;
  const MomentReport report = verify_decay(spec, basis, st, budget, -0.5, 12);
  CHECK(report.all_pass);
  CHECK(report.series_pass);
  CHECK(report.series_value + report.series_tail <= 2.0);
  for (const auto& e : report.entries) CHECK(e.ratio <= 1.0);

  // Doubling the gap loosens C; assert only the monotonicity of C.
  DecayBudget doubled = budget;
  doubled.gap = 2.0;
  CHECK(doubled.c_const() < budget.c_const());
}

TEST_CASE("verify_decay enforces the gap precondition") {
  SystemSpec spec = atomic_spec(1.0, std::numeric_limits<double>::infinity());
  GaussianBasis basis;
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.0, 0.0, 1.0;
  basis.add(a);
  SpectralResult st;
  st.coeff = Eigen::VectorXd::Constant(1, 1.0);
  st.e0 = -0.4; // above threshold - gap
  DecayBudget budget;
  budget.gap = 0.2;
  CHECK_THROWS_AS(verify_decay(spec, basis, st, budget, -0.5, 5),
                  BoundPreconditionError);
}

TEST_CASE("clr count bound formula") {
  // Direct evaluation with C_d = 1.
  CHECK(clr_count_bound(1.0, 2.0, 1.0, 3, 1, 1.0) ==
        doctest::Approx(std::pow(2.0, 1.5) * std::pow(std::log(4.0), 3) / 8.0)
            .epsilon(1e-13));
  // Scaling relations.
  const double base = clr_count_bound(1.0, 2.0, 1.0, 3, 1, kClrC3);
  CHECK(clr_count_bound(4.0, 2.0, 1.0, 3, 1, kClrC3) ==
        doctest::Approx(8.0 * base).epsilon(1e-12));
  CHECK(clr_count_bound(1.0, 2.0, 2.0, 3, 1, kClrC3) ==
        doctest::Approx(base / 8.0).epsilon(1e-12));
  CHECK(clr_count_bound(1.0, 2.0, 1.0, 3, 2, kClrC3) ==
        doctest::Approx(2.0 * base).epsilon(1e-12));
  CHECK_THROWS_AS(clr_count_bound(1.0, 2.0, 1.0, 2, 1, kClrC3), InvalidInput);
}

TEST_CASE("square well counts") {
  const double thr = M_PI * M_PI / 8.0; // 2 T R^2 = (pi/2)^2 at R = 1
  SUBCASE("no binding below the s-wave threshold") {
    CHECK(square_well_count(thr * 0.999, 1.0) == 0);
    CHECK(square_well_count(0.3, 0.5) == 0);
  }
  SUBCASE("one state just above") {
    CHECK(square_well_count(thr * 1.001, 1.0) == 1);
  }
  SUBCASE("p wave joins at the j1 threshold") {
    // First l = 1 state binds at K R = pi, adding 3 states.
    const double t_pi = M_PI * M_PI / 2.0; // K R = pi at R = 1
    CHECK(square_well_count(t_pi * 1.02, 1.0) >= 4);
    CHECK(square_well_count(t_pi * 0.9, 1.0) < 4);
  }
  SUBCASE("monotone in T and R") {
    int prev = -1;
    for (double t = 0.2; t < 8.0; t *= 1.4) {
      const int c = square_well_count(t, 1.3);
      CHECK(c >= prev);
      prev = c;
    }
    prev = -1;
    for (double r = 0.2; r < 6.0; r *= 1.4) {
      const int c = square_well_count(1.7, r);
      CHECK(c >= prev);
      prev = c;
    }
  }
  SUBCASE("input validation") {
    CHECK_THROWS_AS(square_well_count(0.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(square_well_count(1.0, -2.0), InvalidInput);
  }
}

TEST_CASE("square well count stays below the packaged clr bound") {
  // A inverted through R = ln(2A)/(2 beta): the formula then equals the
  // CLR bound of the radius-R well.
  for (double t : {0.5, 1.0, 2.5}) {
    for (double r : {0.5, 1.5, 3.0}) {
      const double beta = 1.0;
      const double a_w = 0.5 * std::exp(2.0 * beta * r);
      CHECK(square_well_count(t, r) <=
            clr_count_bound(t, a_w, beta, 3, 1, kClrC3));
    }
  }
}
