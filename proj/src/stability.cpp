#include "fewbody/stability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fewbody/errors.hpp"
#include "fewbody/numfmt.hpp"
#include "fewbody/rng.hpp"
#include "fewbody/threading.hpp"

namespace fewbody {

const char* verdict_name(VerdictState v) {
  switch (v) {
    case VerdictState::CertifiedStable: return "certified_stable";
    case VerdictState::CriterionUnstable: return "criterion_unstable";
    case VerdictState::Undecided: return "undecided";
  }
  return "?";
}

JacobiFrame interchanged_frame(const JacobiFrame& frame) {
  MassCharge mc = frame.source;
  std::swap(mc.m1, mc.m2);
  std::swap(mc.q1, mc.q2);
  return build_frame(mc);
}

CriterionDetail instability_criterion_detail(const JacobiFrame& frame,
                                             double q1) {
  if (q1 < 0.0) throw InvalidInput("instability_criterion: negative charge");
  CriterionDetail d;
  d.first_lhs = q1 * q1;
  d.first_rhs = (3.0 / 16.0) * frame.mu23 / frame.mu;
  if (q1 == 0.0) {
    // Zero charge decouples particle 1; the edge criterion is vacuous.
    d.holds = false;
    return d;
  }
  d.first_ok = d.first_lhs < d.first_rhs;
  const double root_mu = std::sqrt(frame.mu);
  const double denom = std::sqrt(3.0 * frame.mu23) - 4.0 * q1 * root_mu;
  if (denom <= 0.0) {
    d.second_ok = false;
    d.second_lhs = std::numeric_limits<double>::infinity();
  } else {
    d.second_lhs = (6.0 * frame.mu / frame.mu23) * q1 *
                   (1.0 + 4.0 * q1 * root_mu / denom);
    d.second_ok = d.second_lhs < 1.0;
  }
  d.holds = d.first_ok && d.second_ok;
  return d;
}

bool instability_criterion(const JacobiFrame& frame, double q1) {
  return instability_criterion_detail(frame, q1).holds;
}

double instability_q1_sup(const JacobiFrame& frame, double tol) {
  const double cap = std::sqrt((3.0 / 16.0) * frame.mu23 / frame.mu);
  double lo = cap * 1e-9;
  if (!instability_criterion(frame, lo)) return 0.0;
  double hi = cap;
  // Both inequality left-hand sides increase in q1 below the cap, so the
  // criterion region is an interval and bisection applies.
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (instability_criterion(frame, mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

namespace {

StabilityVerdict classify_with_seed(const JacobiFrame& frame, double q1,
                                    double q2, const ClassifyBudget& budget,
                                    std::uint64_t seed) {
  const ThresholdInfo thr = threshold_energy(frame, q1, q2);
  const SystemSpec spec = three_body_spec(frame, q1, q2);
  BasisBudget bb = budget.basis;
  bb.seed = seed;
  const OptimizeResult opt = optimize_basis(spec, bb);

  StabilityVerdict v;
  v.e0 = opt.spectrum.e0;
  v.e_thr = thr.energy;
  v.margin = thr.energy - opt.spectrum.e0;
  v.basis_size = opt.basis.size();

  bool criterion = false;
  if (std::abs(q2 - 1.0) <= budget.edge_tol)
    criterion = criterion || instability_criterion(frame, q1);
  if (std::abs(q1 - 1.0) <= budget.edge_tol)
    criterion =
        criterion || instability_criterion(interchanged_frame(frame), q2);

  const bool certified = v.margin > budget.eps_num;
  if (criterion && certified)
    throw std::logic_error(
        "classify: certified stability at a point where the instability "
        "criterion holds");
  if (criterion)
    v.state = VerdictState::CriterionUnstable;
  else if (certified)
    v.state = VerdictState::CertifiedStable;
  else
    v.state = VerdictState::Undecided;
  return v;
}

} // namespace

StabilityVerdict classify(const JacobiFrame& frame, double q1, double q2,
                          const ClassifyBudget& budget) {
  return classify_with_seed(frame, q1, q2, budget, budget.basis.seed);
}

std::vector<BorderPoint> trace_border(const JacobiFrame& frame, Sector sector,
                                      const ClassifyBudget& budget,
                                      const std::vector<double>& rays,
                                      double scan_lo, double scan_hi,
                                      double resolution, int jobs) {
  if (!(resolution > 0.0)) throw InvalidInput("trace_border: resolution <= 0");
  if (!(scan_hi > scan_lo))
    throw InvalidInput("trace_border: empty scan range");
  std::vector<BorderPoint> out(rays.size());

  parallel_for(rays.size(), jobs, [&](std::size_t ri) {
    std::uint64_t counter = 0;
    auto eval = [&](double t) {
      const std::uint64_t seed =
          derive_seed(budget.basis.seed,
                      (static_cast<std::uint64_t>(ri) << 20) + counter++);
      const double q1 = sector == Sector::Upper ? t : rays[ri];
      const double q2 = sector == Sector::Upper ? rays[ri] : t;
      return classify_with_seed(frame, q1, q2, budget, seed);
    };

    BorderPoint bp;
    bp.fixed = rays[ri];
    const StabilityVerdict vlo = eval(scan_lo);
    const StabilityVerdict vhi = eval(scan_hi);
    const bool lo_cert = vlo.state == VerdictState::CertifiedStable;
    const bool hi_cert = vhi.state == VerdictState::CertifiedStable;
    if (lo_cert == hi_cert) {
      bp.found = false; // no sign change on this ray
      out[ri] = bp;
      return;
    }
    // Bisect with `cert_side` tracking which end certifies.
    double lo = scan_lo, hi = scan_hi;
    double margin_lo = vlo.margin, margin_hi = vhi.margin;
    const bool cert_at_lo = lo_cert;
    while (std::abs(hi - lo) > resolution) {
      const double mid = 0.5 * (lo + hi);
      const StabilityVerdict vm = eval(mid);
      if ((vm.state == VerdictState::CertifiedStable) == cert_at_lo) {
        lo = mid;
        margin_lo = vm.margin;
      } else {
        hi = mid;
        margin_hi = vm.margin;
      }
    }
    bp.found = true;
    if (cert_at_lo) {
      bp.lo = hi;          // not-certified side
      bp.hi = lo;          // certified side
      bp.margin_lo = margin_hi;
      bp.margin_hi = margin_lo;
    } else {
      bp.lo = lo;
      bp.hi = hi;
      bp.margin_lo = margin_lo;
      bp.margin_hi = margin_hi;
    }
    out[ri] = bp;
  });
  return out;
}

CriticalChargeResult critical_charge_atomic(double nuclear_mass,
                                            const ClassifyBudget& budget,
                                            double tol) {
  if (!(tol > 0.0))
    throw InvalidInput("critical_charge: tol must be positive");
  CriticalChargeResult out;
  std::uint64_t counter = 0;

  auto eval = [&](double z) {
    const std::uint64_t seed = derive_seed(budget.basis.seed, counter++);
    BasisBudget bb = budget.basis;
    bb.seed = seed;
    const OptimizeResult opt =
        optimize_basis(atomic_spec(z, nuclear_mass), bb);
    CriticalChargeIteration it;
    it.z = z;
    it.e0 = opt.spectrum.e0;
    it.e_thr = atomic_threshold_energy(z, nuclear_mass);
    it.residual = opt.spectrum.residual;
    it.certified = it.e0 < it.e_thr - budget.eps_num;
    out.iterations.push_back(it);
    return it.certified;
  };

  double lo = 0.5, hi = 1.0;
  if (eval(lo))
    throw BudgetInsufficientError(
        "critical_charge: lower bracket endpoint certifies stable");
  if (!eval(hi))
    throw BudgetInsufficientError(
        "critical_charge: upper bracket endpoint not certified at this "
        "budget");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (eval(mid))
      hi = mid;
    else
      lo = mid;
  }
  out.z_lo = lo;
  out.z_hi = hi;
  return out;
}

StabilityDiagram scan_grid(const JacobiFrame& frame,
                           const std::vector<double>& q1s,
                           const std::vector<double>& q2s,
                           const ClassifyBudget& budget, int jobs) {
  StabilityDiagram diagram;
  diagram.masses = frame.source;
  diagram.budget = budget;
  diagram.points.resize(q1s.size() * q2s.size());
  parallel_for(diagram.points.size(), jobs, [&](std::size_t idx) {
    const std::size_t i = idx / q2s.size();
    const std::size_t j = idx % q2s.size();
    DiagramPoint pt;
    pt.q1 = q1s[i];
    pt.q2 = q2s[j];
    pt.verdict = classify_with_seed(frame, pt.q1, pt.q2, budget,
                                    derive_seed(budget.basis.seed, idx));
    diagram.points[idx] = pt;
  });
  return diagram;
}

std::string diagram_csv(const StabilityDiagram& diagram) {
  std::string out = "q1,q2,state,margin,E0,E_thr,basis_size\n";
  for (const auto& pt : diagram.points) {
    out += fmt_double(pt.q1);
    out += ',';
    out += fmt_double(pt.q2);
    out += ',';
    out += verdict_name(pt.verdict.state);
    out += ',';
    out += fmt_double(pt.verdict.margin);
    out += ',';
    out += fmt_double(pt.verdict.e0);
    out += ',';
    out += fmt_double(pt.verdict.e_thr);
    out += ',';
    out += std::to_string(pt.verdict.basis_size);
    out += '\n';
  }
  return out;
}

} // namespace fewbody
