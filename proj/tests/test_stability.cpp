#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fewbody/errors.hpp"
#include "fewbody/stability.hpp"

using namespace fewbody;

namespace {

ClassifyBudget small_budget(int basis = 16, std::uint64_t seed = 5) {
  ClassifyBudget b;
  b.basis.target_size = basis;
  b.basis.trials_per_slot = 12;
  b.basis.refine_cycles = 1;
  b.basis.seed = seed;
  return b;
}

// Budget that resolves the thin margins just outside the unit square.
ClassifyBudget edge_budget(std::uint64_t seed = 9) {
  ClassifyBudget b;
  b.basis.target_size = 28;
  b.basis.trials_per_slot = 20;
  b.basis.refine_cycles = 2;
  b.basis.seed = seed;
  return b;
}

const JacobiFrame kEqual = build_frame({1, 1, 1, 1, 1});

} // namespace

TEST_CASE("instability criterion arithmetic at equal masses") {
  // mu = 2/3, mu23 = 1/2: cap = sqrt(9/64) = 0.375.
  const CriterionDetail d = instability_criterion_detail(kEqual, 0.01);
  CHECK(d.first_rhs == doctest::Approx(9.0 / 64.0).epsilon(1e-15));
  CHECK(d.first_ok);
  // Direct arithmetic: 8*0.01*(1 + 0.0326599/(1.2247449 - 0.0326599)).
  const double root_mu = std::sqrt(2.0 / 3.0);
  const double expect = 8.0 * 0.01 *
                        (1.0 + 4.0 * 0.01 * root_mu /
                                   (std::sqrt(1.5) - 4.0 * 0.01 * root_mu));
  CHECK(d.second_lhs == doctest::Approx(expect).epsilon(1e-14));
  CHECK(d.second_lhs == doctest::Approx(0.0822).epsilon(1e-2));
  CHECK(d.holds);

  // At the first-inequality cap the criterion fails strictly.
  CHECK_FALSE(instability_criterion(kEqual, 0.375));
  // Zero charge is reported false by policy.
  CHECK_FALSE(instability_criterion(kEqual, 0.0));
  CHECK_THROWS_AS(instability_criterion(kEqual, -0.1), InvalidInput);
}

TEST_CASE("criterion q1 supremum by bisection") {
  const double sup = instability_q1_sup(kEqual);
  CHECK(sup > 0.0);
  CHECK(sup < 0.375);
  CHECK(instability_criterion(kEqual, sup * 0.999999));
  CHECK_FALSE(instability_criterion(kEqual, sup * 1.000001));
  // The region is an interval: spot checks below the sup all fire.
  for (double f : {0.1, 0.3, 0.5, 0.7, 0.9})
    CHECK(instability_criterion(kEqual, f * sup));
}

TEST_CASE("interchanged frame swaps the reduced masses") {
  MassCharge mc;
  mc.m1 = 2.0;
  mc.m2 = 3.0;
  mc.m3 = 5.0;
  const JacobiFrame f = build_frame(mc);
  const JacobiFrame g = interchanged_frame(f);
  CHECK(g.mu23 == doctest::Approx(f.mu13).epsilon(1e-15));
  CHECK(g.mu13 == doctest::Approx(f.mu23).epsilon(1e-15));
  // Twice interchanged is the original.
  const JacobiFrame h = interchanged_frame(g);
  CHECK(h.mu == doctest::Approx(f.mu).epsilon(1e-15));
  CHECK(h.s == doctest::Approx(f.s).epsilon(1e-15));
}

TEST_CASE("classify inside the unit square certifies stability") {
  const StabilityVerdict v = classify(kEqual, 0.5, 0.5, small_budget(14));
  CHECK(v.state == VerdictState::CertifiedStable);
  CHECK(v.margin > 1e-6);
  CHECK(v.e_thr == doctest::Approx(-0.0625).epsilon(1e-14));
}

TEST_CASE("classify on the q2 = 1 edge below the criterion sup") {
  const StabilityVerdict v = classify(kEqual, 0.01, 1.0, small_budget(10));
  CHECK(v.state == VerdictState::CriterionUnstable);
  // The variational margin never certifies here (true energy sits at the
  // threshold).
  CHECK(v.margin <= 1e-6);
}

TEST_CASE("classify at q1 = 0 never certifies") {
  const StabilityVerdict v = classify(kEqual, 0.0, 1.0, small_budget(10));
  CHECK(v.state == VerdictState::Undecided);
  CHECK(v.margin <= 1e-6);
}

TEST_CASE("upper-sector certified margins grow with q1") {
  // Restatement of the instability monotonicity at the certified level:
  // moving toward the equal-threshold line inside the upper sector keeps
  // certification at equal-or-larger margin, within solver noise.
  ClassifyBudget budget = edge_budget();
  const StabilityVerdict a = classify(kEqual, 0.95, 1.0, budget);
  const StabilityVerdict b = classify(kEqual, 1.0, 1.0, budget);
  CHECK(a.state == VerdictState::CertifiedStable);
  CHECK(b.state == VerdictState::CertifiedStable);
  CHECK(b.margin >= a.margin - 2e-6);
}

TEST_CASE("trace border on the q2 = 1 edge") {
  ClassifyBudget budget = edge_budget(21);
  const auto pts =
      trace_border(kEqual, Sector::Upper, budget, {1.0}, 0.05, 1.0, 0.1);
  REQUIRE(pts.size() == 1);
  REQUIRE(pts[0].found);
  CHECK(pts[0].hi > pts[0].lo);
  CHECK(pts[0].margin_hi > 1e-6);
  CHECK(pts[0].margin_lo <= 1e-6);
  // Consistency with the closed-form criterion: the certified border
  // cannot sit below the criterion's instability extent on the edge.
  CHECK(pts[0].hi >= instability_q1_sup(kEqual));
}

TEST_CASE("ray inside the unit square reports no border") {
  ClassifyBudget budget = edge_budget(31);
  const auto pts =
      trace_border(kEqual, Sector::Upper, budget, {0.8}, 0.4, 0.9, 0.1);
  REQUIRE(pts.size() == 1);
  CHECK_FALSE(pts[0].found);
}

TEST_CASE("symmetric frame borders mirror under q1 <-> q2") {
  ClassifyBudget budget = edge_budget(41);
  const double res = 0.1;
  const auto upper = trace_border(kEqual, Sector::Upper, budget, {1.02}, 0.2,
                                  1.02, res);
  const auto lower = trace_border(kEqual, Sector::Lower, budget, {1.02}, 0.2,
                                  1.02, res);
  REQUIRE(upper[0].found);
  REQUIRE(lower[0].found);
  CHECK(std::abs(upper[0].hi - lower[0].hi) <= 2.0 * res);
}

TEST_CASE("trace border input validation") {
  CHECK_THROWS_AS(trace_border(kEqual, Sector::Upper, small_budget(), {1.0},
                               0.1, 0.9, 0.0),
                  InvalidInput);
  CHECK_THROWS_AS(trace_border(kEqual, Sector::Upper, small_budget(), {1.0},
                               0.9, 0.1, 0.05),
                  InvalidInput);
}

TEST_CASE("hydrogen anion certifies below the one-electron threshold") {
  // E(1,2) < -0.5 at modest basis: the Z=1 endpoint of the critical
  // bracket is certified, so Z_cr < 1.
  ClassifyBudget budget = small_budget(24, 51);
  budget.basis.trials_per_slot = 20;
  BasisBudget bb = budget.basis;
  const OptimizeResult r = optimize_basis(
      atomic_spec(1.0, std::numeric_limits<double>::infinity()), bb);
  CHECK(r.spectrum.e0 < -0.5 - 1e-4);
}

TEST_CASE("critical charge bisection at a coarse budget") {
  ClassifyBudget budget;
  budget.basis.target_size = 32;
  budget.basis.trials_per_slot = 16;
  budget.basis.refine_cycles = 1;
  budget.basis.seed = 61;
  const CriticalChargeResult r = critical_charge_atomic(
      std::numeric_limits<double>::infinity(), budget, 0.02);
  CHECK(r.z_hi - r.z_lo <= 0.02);
  CHECK(r.z_lo > 0.0);
  CHECK(r.z_hi < 1.0); // Z_cr < N_e - 1
  CHECK(r.z_lo < r.z_hi);
  // Bracket endpoints carry the defining pattern.
  CHECK(r.iterations.front().certified == false);
  CHECK(r.iterations[1].certified == true);
}

TEST_CASE("critical charge rejects bad tolerances") {
  CHECK_THROWS_AS(critical_charge_atomic(
                      std::numeric_limits<double>::infinity(),
                      small_budget(), 0.0),
                  InvalidInput);
}

TEST_CASE("scan grid shape and determinism") {
  ClassifyBudget budget = small_budget(8, 71);
  const std::vector<double> q1s{0.4, 0.5};
  const std::vector<double> q2s{0.4, 0.5, 0.6};
  const StabilityDiagram a = scan_grid(kEqual, q1s, q2s, budget, 1);
  const StabilityDiagram b = scan_grid(kEqual, q1s, q2s, budget, 3);
  REQUIRE(a.points.size() == 6);
  CHECK(diagram_csv(a) == diagram_csv(b)); // jobs never change bytes
  CHECK(a.points[0].q1 == 0.4);
  CHECK(a.points[0].q2 == 0.4);
  CHECK(a.points[5].q1 == 0.5);
  CHECK(a.points[5].q2 == 0.6);
  const std::string csv = diagram_csv(a);
  CHECK(csv.rfind("q1,q2,state,margin,E0,E_thr,basis_size\n", 0) == 0);
}
