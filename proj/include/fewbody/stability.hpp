#ifndef FEWBODY_STABILITY_HPP
#define FEWBODY_STABILITY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fewbody/cg_engine.hpp"
#include "fewbody/kinematics.hpp"

namespace fewbody {

enum class VerdictState { CertifiedStable, CriterionUnstable, Undecided };

const char* verdict_name(VerdictState v);

// Three-state verdict. Variational energies are upper bounds, so only
// stability is ever certified numerically; instability comes solely from
// the closed-form edge criterion.
struct StabilityVerdict {
  VerdictState state = VerdictState::Undecided;
  double margin = 0.0; // E_thr - E0
  double e0 = 0.0;
  double e_thr = 0.0;
  int basis_size = 0;
};

struct ClassifyBudget {
  BasisBudget basis;
  double eps_num = 1e-6;
  // Edge tolerance for recognizing the q2 = 1 / q1 = 1 criterion edges.
  double edge_tol = 1e-12;
};

StabilityVerdict classify(const JacobiFrame& frame, double q1, double q2,
                          const ClassifyBudget& budget);

struct CriterionDetail {
  bool holds = false;
  double first_lhs = 0.0;  // q1^2
  double first_rhs = 0.0;  // (3/16) mu23/mu
  double second_lhs = 0.0; // the bracketed expression
  bool first_ok = false;
  bool second_ok = false;
};

// Closed-form instability test on the q2 = 1 edge (apply to the q1 = 1
// edge by relabeling the frame). q1 = 0 is reported false by policy: the
// zero-charge system has a different threshold structure.
CriterionDetail instability_criterion_detail(const JacobiFrame& frame,
                                             double q1);
bool instability_criterion(const JacobiFrame& frame, double q1);

// Supremum of the q1 interval on which both inequalities hold (a lower
// bound on the true edge-instability extent), located by bisection.
double instability_q1_sup(const JacobiFrame& frame, double tol = 1e-12);

// Frame with particle labels 1 <-> 2 interchanged (for the q1 = 1 edge).
JacobiFrame interchanged_frame(const JacobiFrame& frame);

enum class Sector { Upper, Lower };

struct BorderPoint {
  double fixed = 0.0;      // the ray's fixed coordinate
  double lo = 0.0;         // not-certified side of the bracket
  double hi = 0.0;         // certified-stable side
  double margin_lo = 0.0;
  double margin_hi = 0.0;
  bool found = false;      // false: no sign change on this ray
};

// Bisects the certified-stable border along rays: fixed q2 scanning q1 in
// the upper sector, fixed q1 scanning q2 in the lower one. The result is
// an inner approximation of the true stable region.
std::vector<BorderPoint> trace_border(const JacobiFrame& frame, Sector sector,
                                      const ClassifyBudget& budget,
                                      const std::vector<double>& rays,
                                      double scan_lo, double scan_hi,
                                      double resolution, int jobs = 1);

struct CriticalChargeIteration {
  double z = 0.0;
  double e0 = 0.0;
  double e_thr = 0.0;
  double residual = 0.0;
  bool certified = false;
};

struct CriticalChargeResult {
  double z_lo = 0.0;
  double z_hi = 0.0;
  std::vector<CriticalChargeIteration> iterations;
};

// Bisection for the two-electron critical charge: the bracket narrows on
// the boundary between certified-stable Z and not-certified Z, starting
// from [0.5, 1.0]. Throws BudgetInsufficientError when the start bracket
// shows no sign change.
CriticalChargeResult critical_charge_atomic(double nuclear_mass,
                                            const ClassifyBudget& budget,
                                            double tol);

struct DiagramPoint {
  double q1 = 0.0, q2 = 0.0;
  StabilityVerdict verdict;
};

struct StabilityDiagram {
  MassCharge masses;
  std::vector<DiagramPoint> points; // row-major over (q1 index, q2 index)
  std::vector<BorderPoint> upper_border; // optional, filled by trace_border
  std::vector<BorderPoint> lower_border;
  ClassifyBudget budget;
};

StabilityDiagram scan_grid(const JacobiFrame& frame,
                           const std::vector<double>& q1s,
                           const std::vector<double>& q2s,
                           const ClassifyBudget& budget, int jobs = 1);

std::string diagram_csv(const StabilityDiagram& diagram);

} // namespace fewbody

#endif
