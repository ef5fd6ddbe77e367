#include "fewbody/app.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "fewbody/cg_engine.hpp"
#include "fewbody/decay_clr.hpp"
#include "fewbody/errors.hpp"
#include "fewbody/greens.hpp"
#include "fewbody/kinematics.hpp"
#include "fewbody/numfmt.hpp"
#include "fewbody/rng.hpp"
#include "fewbody/seq_diagnostics.hpp"
#include "fewbody/stability.hpp"

namespace fewbody::app {

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw InvalidInput("grid step must be positive");
  if (hi < lo) throw InvalidInput("grid range is empty");
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = lo + i * step;
  return g;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw InvalidInput("range must be lo:hi, got '" + text + "'");
  try {
    const double lo = std::stod(text.substr(0, colon));
    const double hi = std::stod(text.substr(colon + 1));
    return {lo, hi};
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse range '" + text + "'");
  }
}

MassCharge parse_masses(const std::string& text) {
  MassCharge mc;
  std::istringstream in(text);
  char comma = 0;
  if (!(in >> mc.m1 >> comma >> mc.m2 >> comma >> mc.m3))
    throw InvalidInput("masses must be m1,m2,m3");
  return mc;
}

double parse_nuclear_mass(const std::string& text) {
  if (text == "inf" || text == "infinity")
    return std::numeric_limits<double>::infinity();
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse nuclear mass '" + text + "'");
  }
}

} // namespace

// ---------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------

std::vector<BoundReport> suite_inequalities(const VerifyOptions& opt) {
  std::vector<BoundReport> reports;
  reports.push_back(verify_two_point_inequality(opt.samples, opt.seed));
  for (double a : {0.01, 1.0, 4.0, 100.0})
    reports.push_back(
        verify_comparison_potential(a, std::max(1000, opt.samples / 10)));
  return reports;
}

namespace {

BoundReport near_diagonal_report(ResolventSolver& solver, double n,
                                 int samples, std::uint64_t seed) {
  Rng rng(seed);
  BoundReport report;
  report.name = "near_diagonal_coulomb_bound";
  report.params = {{"A", solver.a()}, {"k", solver.k()}, {"n", n},
                   {"samples", samples}};
  report.tolerance = 1e-6;
  report.max_violation = -std::numeric_limits<double>::infinity();
  const double r_hi = 0.4 * solver.grid().r_max;
  for (int s = 0; s < samples; ++s) {
    const double r = rng.log_uniform(0.05, r_hi);
    const double rp = r * rng.uniform(0.5, 1.5);
    const double ct = rng.uniform(-1.0, 0.999);
    const double d =
        std::sqrt(std::max(1e-300, r * r + rp * rp - 2.0 * r * rp * ct));
    // Points essentially on the diagonal need O(r/d) Legendre terms (and
    // at equal radii the partial-wave amplitudes stop decaying); keep a
    // few percent of radial separation.
    if (d < 0.02 * std::max(r, rp) || d > 2.0 * n) continue;
    if (std::min(r, rp) / std::max(r, rp) > 0.95) continue;
    if (rp < solver.grid().r_min || rp > solver.grid().r_max) continue;
    const double bound = 1.0 / (4.0 * M_PI * d);
    const double kv = solver.kernel(r, rp, ct, 1e-7, 3000).value;
    const double violation = (kv - bound) / bound;
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.location = {{"r", r}, {"rp", rp}, {"dist", d}};
    }
  }
  report.finalize();
  return report;
}

BoundReport kernel_monotonicity_report(ResolventSolver& low,
                                       ResolventSolver& high,
                                       const std::string& name, int samples,
                                       std::uint64_t seed) {
  // `high` carries the larger (A, k) parameter; its kernel must sit below.
  Rng rng(seed);
  BoundReport report;
  report.name = name;
  report.params = {{"A_low", low.a()},
                   {"k_low", low.k()},
                   {"A_high", high.a()},
                   {"k_high", high.k()},
                   {"samples", samples}};
  report.tolerance = 1e-10;
  report.max_violation = -std::numeric_limits<double>::infinity();
  const double r_hi = 0.4 * std::min(low.grid().r_max, high.grid().r_max);
  for (int s = 0; s < samples; ++s) {
    const double r = rng.log_uniform(0.05, r_hi);
    const double rp = rng.log_uniform(0.05, r_hi);
    const double ct = rng.uniform(-1.0, 0.99);
    if (std::min(r, rp) / std::max(r, rp) > 0.95) continue;
    const double klow = low.kernel(r, rp, ct, 1e-8, 3000).value;
    const double khigh = high.kernel(r, rp, ct, 1e-8, 3000).value;
    const double violation = (khigh - klow) / std::max(klow, 1e-300);
    if (violation > report.max_violation) {
      report.max_violation = violation;
      report.location = {{"r", r}, {"rp", rp}, {"cos_theta", ct}};
    }
  }
  report.finalize();
  return report;
}

} // namespace

std::vector<BoundReport> suite_greens(const VerifyOptions& opt,
                                      std::string* slices_csv) {
  std::vector<BoundReport> reports;
  const std::vector<double> a_list{1.0, 4.0};
  const std::vector<double> k_kernel{0.01, 0.1, 1.0};
  const std::vector<double> n_list{2.0, 4.0};
  const int far_samples = std::max(500, opt.samples / 12);
  if (slices_csv) *slices_csv = "A,k,r,rp,cos_theta,value\n";

  for (double a : a_list) {
    for (double k : k_kernel) {
      ResolventSolver solver(a, k, 8.0 * 4.0);
      for (double n : n_list)
        reports.push_back(verify_far_field(
            solver, n, far_samples,
            derive_seed(opt.seed, static_cast<std::uint64_t>(
                                      1000 * a + 100 * k + n))));
      if (k == 0.1)
        reports.push_back(near_diagonal_report(
            solver, 4.0, std::max(500, opt.samples / 20),
            derive_seed(opt.seed, static_cast<std::uint64_t>(77 + a))));
      if (slices_csv) {
        // One fixed slice per (A, k) for plotting.
        const double rp = 1.0, ct = 0.5;
        for (int i = 0; i < 50; ++i) {
          const double r = 0.05 * std::pow(15.0 / 0.05, i / 49.0);
          if (std::min(r, rp) / std::max(r, rp) > 0.95) continue;
          const double value = solver.kernel(r, rp, ct, 1e-7, 3000).value;
          *slices_csv += fmt_double(a) + "," + fmt_double(k) + "," +
                         fmt_double(r) + "," + fmt_double(rp) + "," +
                         fmt_double(ct) + "," + fmt_double(value) + "\n";
        }
      }
    }

    // ||G chi_n||/n <= 4/A + 1/2 uniformly over k in [1e-3, 10], n <= 32.
    {
      BoundReport report;
      report.name = "op_norm_linear_in_n";
      const std::vector<double> k_grid{1e-3, 1e-2, 0.1, 1.0, 3.0, 10.0};
      const std::vector<double> n_grid{1, 2, 4, 8, 16, 32};
      report.params = {{"A", a}, {"k_grid", k_grid}, {"n_grid", n_grid},
                       {"bound", 4.0 / a + 0.5}};
      report.tolerance = 0.0;
      report.max_violation = -std::numeric_limits<double>::infinity();
      for (double k : k_grid) {
        ResolventSolver solver(a, k, 8.0 * 32.0);
        for (double n : n_grid) {
          const double ratio = op_norm_chi(solver, n).norm / n;
          const double violation = ratio - (4.0 / a + 0.5);
          if (violation > report.max_violation) {
            report.max_violation = violation;
            report.location = {{"k", k}, {"n", n}, {"ratio", ratio}};
          }
        }
      }
      report.finalize();
      reports.push_back(report);
    }

    // ||chi_4n G chi_4n|| <= 4n/A.
    {
      BoundReport report;
      report.name = "windowed_norm_bound";
      report.params = {{"A", a}, {"k", 0.01}, {"n_list", n_list}};
      report.tolerance = 0.0;
      report.max_violation = -std::numeric_limits<double>::infinity();
      ResolventSolver solver(a, 0.01, 8.0 * 16.0);
      for (double n : n_list) {
        const double norm = op_norm_windowed(solver, 4.0 * n);
        const double violation = norm * a / (4.0 * n) - 1.0;
        if (violation > report.max_violation) {
          report.max_violation = violation;
          report.location = {{"n", n}, {"norm", norm}};
        }
      }
      report.finalize();
      reports.push_back(report);
    }

    reports.push_back(verify_comparison_potential(
        a, std::max(1000, opt.samples / 10)));
  }

  // Norm monotonicity in k at fixed (A, n).
  {
    BoundReport report;
    report.name = "op_norm_k_monotonicity";
    report.params = {{"A", 1.0}, {"n", 4.0}, {"k_pair", {0.1, 1.0}}};
    report.tolerance = 1e-10;
    ResolventSolver s_low(1.0, 0.1, 8.0 * 4.0);
    ResolventSolver s_high(1.0, 1.0, 8.0 * 4.0);
    const double n_low = op_norm_chi(s_low, 4.0).norm;
    const double n_high = op_norm_chi(s_high, 4.0).norm;
    report.max_violation = (n_high - n_low) / n_low;
    report.location = {{"norm_k_0.1", n_low}, {"norm_k_1", n_high}};
    report.finalize();
    reports.push_back(report);
  }

  // Pointwise kernel monotonicity in A and in k.
  {
    const int mono_samples = std::max(200, opt.samples / 100);
    ResolventSolver a1(1.0, 0.1, 32.0), a4(4.0, 0.1, 32.0);
    reports.push_back(kernel_monotonicity_report(
        a1, a4, "kernel_monotonicity_in_A", mono_samples,
        derive_seed(opt.seed, 301)));
    ResolventSolver kl(1.0, 0.1, 32.0), kh(1.0, 1.0, 32.0);
    reports.push_back(kernel_monotonicity_report(
        kl, kh, "kernel_monotonicity_in_k", mono_samples,
        derive_seed(opt.seed, 302)));
  }

  // Free-resolvent limit at A -> 0.
  {
    BoundReport report;
    report.name = "free_kernel_limit";
    report.params = {{"A", 1e-8}, {"k", 1.0}};
    report.tolerance = 1e-4;
    report.max_violation = -std::numeric_limits<double>::infinity();
    ResolventSolver solver(1e-8, 1.0, 32.0);
    Rng rng(derive_seed(opt.seed, 303));
    for (int s = 0; s < 200; ++s) {
      const double r = rng.log_uniform(0.1, 10.0);
      const double rp = rng.log_uniform(0.1, 10.0);
      const double ct = rng.uniform(-1.0, 0.9);
      const double d = std::sqrt(r * r + rp * rp - 2.0 * r * rp * ct);
      if (d < 0.05 || std::min(r, rp) / std::max(r, rp) > 0.95) continue;
      const double exact = std::exp(-d) / (4.0 * M_PI * d);
      const double kv = solver.kernel(r, rp, ct, 1e-9, 3000).value;
      const double violation = std::abs(kv - exact) / exact;
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.location = {{"r", r}, {"rp", rp}, {"dist", d}};
      }
    }
    report.finalize();
    reports.push_back(report);
  }

  // Kernel positivity and exchange symmetry at sampled points.
  {
    BoundReport report;
    report.name = "kernel_positivity_symmetry";
    report.params = {{"A", 1.0}, {"k", 0.1}};
    report.tolerance = 0.0;
    report.max_violation = -std::numeric_limits<double>::infinity();
    ResolventSolver solver(1.0, 0.1, 32.0);
    Rng rng(derive_seed(opt.seed, 304));
    for (int s = 0; s < 300; ++s) {
      const double r = rng.log_uniform(0.05, 12.0);
      const double rp = rng.log_uniform(0.05, 12.0);
      const double ct = rng.uniform(-1.0, 0.95);
      if (std::min(r, rp) / std::max(r, rp) > 0.95) continue;
      const KernelValue kv = solver.kernel(r, rp, ct, 1e-8, 3000);
      const KernelValue kv_swapped = solver.kernel(rp, r, ct, 1e-8, 3000);
      const double pos_violation = -(kv.value + kv.trunc_error);
      const double sym_violation =
          std::abs(kv.value - kv_swapped.value) / kv.value - 1e-10;
      const double violation = std::max(pos_violation, sym_violation);
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.location = {{"r", r}, {"rp", rp}, {"cos_theta", ct}};
      }
    }
    report.finalize();
    reports.push_back(report);
  }

  return reports;
}

std::vector<BoundReport> suite_decay(const VerifyOptions& opt,
                                     std::string* moments_csv) {
  std::vector<BoundReport> reports;

  // Converged H^- state feeds the exponential-moment bounds.
  SystemSpec spec = atomic_spec(1.0, std::numeric_limits<double>::infinity());
  BasisBudget budget;
  budget.target_size = opt.basis;
  budget.trials_per_slot = opt.trials;
  budget.refine_cycles = opt.refine;
  budget.seed = opt.seed;
  const OptimizeResult run = optimize_basis(spec, budget);
  const double e_thr =
      atomic_threshold_energy(1.0, std::numeric_limits<double>::infinity());

  DecayBudget decay;
  decay.z = 1.0;
  decay.n_e = 2;
  decay.gap = (e_thr - run.spectrum.e0) * 0.999;

  {
    BoundReport report;
    report.name = "hydrogen_anion_binding";
    report.params = {{"basis", opt.basis}, {"E0", run.spectrum.e0},
                     {"E_thr", e_thr}};
    report.tolerance = 0.0;
    // Needs strictly negative: the decay bounds require E0 below threshold.
    report.max_violation = run.spectrum.e0 - (e_thr - 1e-4);
    report.finalize();
    reports.push_back(report);
  }

  const int n_max = 10;
  const MomentReport moments =
      verify_decay(spec, run.basis, run.spectrum, decay, e_thr, n_max);
  if (moments_csv) {
    *moments_csv = "n,moment,bound,ratio\n";
    for (const auto& e : moments.entries)
      *moments_csv += std::to_string(e.n) + "," + fmt_double(e.moment) + "," +
                      fmt_double(e.bound) + "," + fmt_double(e.ratio) + "\n";
  }
  {
    BoundReport report;
    report.name = "ahlrichs_moment_bounds";
    report.params = {{"Z", decay.z}, {"gap", decay.gap},
                     {"C", moments.c_const}, {"n_max", n_max}};
    report.tolerance = 0.0;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (const auto& e : moments.entries) {
      const double violation = e.ratio - 1.0;
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.location = {{"n", e.n}, {"moment", e.moment}, {"bound", e.bound}};
      }
    }
    report.finalize();
    reports.push_back(report);
  }
  {
    BoundReport report;
    report.name = "ahlrichs_exponential_series";
    report.params = {{"beta", moments.beta},
                     {"series", moments.series_value},
                     {"tail", moments.series_tail}};
    report.tolerance = 0.0;
    report.max_violation = moments.series_value + moments.series_tail - 2.0;
    report.finalize();
    reports.push_back(report);
  }

  // rhs(n)/(n+1) <= C, the transformation step, as a numeric sweep.
  {
    BoundReport report;
    report.name = "moment_ratio_transformation";
    report.params = {{"Z_list", {0.5, 1.0, 2.0, 5.0}},
                     {"gap_list", {0.05, 0.5, 2.0}},
                     {"n_max", 40}};
    report.tolerance = 1e-12;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (double z : {0.5, 1.0, 2.0, 5.0})
      for (double gap : {0.05, 0.5, 2.0}) {
        const double c = ahlrichs_constant(z, gap);
        for (int n = 0; n <= 40; ++n) {
          const double violation =
              moment_ratio_bound(z, gap, n) / ((n + 1.0) * c) - 1.0;
          if (violation > report.max_violation) {
            report.max_violation = violation;
            report.location = {{"Z", z}, {"gap", gap}, {"n", n}};
          }
        }
      }
    report.finalize();
    reports.push_back(report);
  }

  // C strictly decreasing in the gap and increasing in Z.
  {
    BoundReport report;
    report.name = "ahlrichs_constant_monotonicity";
    report.params = nlohmann::json::object();
    report.tolerance = 0.0;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (double z : {0.0, 0.5, 1.0, 3.0}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double gap = 0.02; gap < 20.0; gap *= 1.7) {
        const double c = ahlrichs_constant(z, gap);
        report.max_violation = std::max(report.max_violation, c - prev);
        prev = c;
      }
    }
    for (double gap : {0.05, 0.5, 2.0}) {
      double prev = -std::numeric_limits<double>::infinity();
      for (double z = 0.0; z < 6.0; z += 0.5) {
        const double c = ahlrichs_constant(z, gap);
        report.max_violation = std::max(report.max_violation, prev - c);
        prev = c;
      }
    }
    report.finalize();
    reports.push_back(report);
  }

  return reports;
}

std::vector<BoundReport> suite_clr(const VerifyOptions& opt) {
  (void)opt;
  std::vector<BoundReport> reports;
  const double beta = 1.0;

  // Oracle count vs the packaged bound over a 10x10 desk-scale grid. The
  // decay weight A is inverted through the localization relation
  // R = ln(2A)/(2 beta), which turns the packaged formula into exactly
  // the CLR bound of the radius-R well.
  {
    BoundReport report;
    report.name = "clr_count_vs_bound";
    report.params = {{"T_range", {0.3, 3.0}}, {"R_range", {0.3, 3.0}},
                     {"grid", 10},           {"beta", beta},
                     {"C3", kClrC3}};
    report.tolerance = 0.0;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double t = 0.3 * std::pow(10.0, i / 9.0);
        const double r = 0.3 * std::pow(10.0, j / 9.0);
        const int count = square_well_count(t, r);
        const double a_w = 0.5 * std::exp(2.0 * beta * r);
        const double bound = clr_count_bound(t, a_w, beta, 3, 1, kClrC3);
        const double violation = count - bound;
        if (violation > report.max_violation) {
          report.max_violation = violation;
          report.location = {{"T", t}, {"R", r}, {"count", count},
                             {"bound", bound}};
        }
      }
    report.finalize();
    reports.push_back(report);
  }

  // Exactly zero states below the s-wave threshold 2 T R^2 < (pi/2)^2,
  // and at least one just above it.
  {
    BoundReport report;
    report.name = "square_well_threshold";
    report.params = {{"threshold", M_PI * M_PI / 4.0}};
    report.tolerance = 0.0;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (double r : {0.3, 1.0, 2.5}) {
      const double t_crit = M_PI * M_PI / (8.0 * r * r);
      const int below = square_well_count(t_crit * 0.995, r);
      const int above = square_well_count(t_crit * 1.005, r);
      const double violation =
          std::max<double>(below, 1.0 - above);
      if (violation > report.max_violation) {
        report.max_violation = violation;
        report.location = {{"R", r}, {"below", below}, {"above", above}};
      }
    }
    report.finalize();
    reports.push_back(report);
  }

  // Counts non-decreasing in T and in R.
  {
    BoundReport report;
    report.name = "square_well_monotonicity";
    report.params = nlohmann::json::object();
    report.tolerance = 0.0;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (double r : {0.5, 1.0, 2.0, 3.0}) {
      int prev = 0;
      for (double t = 0.2; t < 6.0; t *= 1.3) {
        const int c = square_well_count(t, r);
        report.max_violation =
            std::max<double>(report.max_violation, prev - c);
        prev = c;
      }
    }
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      int prev = 0;
      for (double r = 0.2; r < 5.0; r *= 1.3) {
        const int c = square_well_count(t, r);
        report.max_violation =
            std::max<double>(report.max_violation, prev - c);
        prev = c;
      }
    }
    report.finalize();
    reports.push_back(report);
  }

  return reports;
}

std::vector<BoundReport> suite_spreading(const VerifyOptions& opt,
                                         std::string* tails_csv) {
  std::vector<BoundReport> reports;

  if (tails_csv) {
    // Tail-mass table of a reference translation family for plotting.
    *tails_csv = "n,R,mass\n";
    auto ref_bump = [](double rho) {
      const double t = rho;
      return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
    };
    for (int n = 1; n <= 12; ++n) {
      const SampledFunction f = SampledFunction::radial3d(
          ref_bump, Eigen::Vector3d(2.5 * n, 0.0, 0.0), 1.000001);
      for (double r = 1.0; r <= 8.0; r += 1.0)
        *tails_csv += std::to_string(n) + "," + fmt_double(r) + "," +
                      fmt_double(tail_mass(f, r)) + "\n";
    }
  }

  // Monotone-dominated, norm-bounded families never earn spread-proxy.
  {
    BoundReport report;
    report.name = "monotone_families_non_spreading";
    const int families = 1000;
    report.params = {{"families", families}};
    report.tolerance = 0.0;
    int spread_count = 0;
    Rng rng(derive_seed(opt.seed, 401));
    for (int f = 0; f < families; ++f) {
      const double sigma = rng.log_uniform(0.3, 3.0);
      const double cmax = rng.uniform(0.5, 2.0);
      const int len = 8 + static_cast<int>(rng.below(5));
      const bool saturating = rng.uniform01() < 0.5;
      std::vector<SampledFunction> seq;
      for (int n = 1; n <= len; ++n) {
        const double c = cmax * (1.0 - 1.0 / (n + 1.0));
        const double w = 0.3 * n;
        auto profile = [sigma, c, w, saturating](double rho) {
          const double g = std::exp(-0.5 * rho * rho / (sigma * sigma));
          return saturating ? c * g : (1.0 - std::exp(-w)) * g;
        };
        seq.push_back(SampledFunction::radial3d(
            profile, Eigen::Vector3d::Zero(), 12.0 * sigma));
      }
      std::vector<double> r_grid;
      for (int j = 1; j <= 5; ++j) r_grid.push_back(2.0 * j * sigma);
      const double a = 0.25 * seq.back().norm();
      if (probe_sequence(seq, r_grid, a).spread_proxy) ++spread_count;
    }
    report.max_violation = spread_count;
    report.location = {{"spread_count", spread_count}};
    report.finalize();
    reports.push_back(report);
  }

  // Translation families always spread at a = 0.9 ||g||.
  {
    BoundReport report;
    report.name = "translation_families_spreading";
    const int families = 100;
    report.params = {{"families", families}};
    report.tolerance = 0.0;
    int miss = 0;
    Rng rng(derive_seed(opt.seed, 402));
    for (int f = 0; f < families; ++f) {
      const double width = rng.log_uniform(0.5, 2.0);
      const double spacing = rng.uniform(2.0, 4.0);
      auto bump = [width](double rho) {
        const double t = rho / width;
        return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
      };
      std::vector<SampledFunction> seq;
      const int len = 16;
      for (int n = 1; n <= len; ++n)
        seq.push_back(SampledFunction::radial3d(
            bump, Eigen::Vector3d(n * spacing, 0.0, 0.0), width * 1.001));
      const double a = 0.9 * seq.front().norm();
      std::vector<double> r_grid{1.0, 2.0, 3.0, 4.0, 5.0};
      if (!probe_sequence(seq, r_grid, a).spread_proxy) ++miss;
    }
    report.max_violation = miss;
    report.location = {{"non_spread_count", miss}};
    report.finalize();
    reports.push_back(report);
  }

  reports.push_back(
      check_indicator_split(3, opt.samples, derive_seed(opt.seed, 403)));

  // Weighted-multiplier composition preserves non-spreading, with both
  // the exponential and the polynomial weight variants.
  for (int variant = 0; variant < 2; ++variant) {
    BoundReport report;
    report.name = variant == 0 ? "weighted_multiplier_exponential"
                               : "weighted_multiplier_polynomial";
    const double alpha = 1.0;
    report.params = {{"alpha", alpha}, {"d1", 3}};
    report.tolerance = 0.0;
    std::vector<SampledFunction> composed;
    const int len = 10;
    for (int n = 1; n <= len; ++n) {
      const double c = 1.0 - 1.0 / (n + 1.0);
      auto u = [c, alpha, variant](double s) {
        const double base = c * std::exp(-0.25 * s * s);
        return variant == 0 ? std::exp(-2.0 * alpha * s) * base
                            : std::pow(1.0 + s, -2.0 * alpha) * base;
      };
      auto v = [](double t) { return std::exp(-0.5 * t * t); };
      composed.push_back(SampledFunction::product_radial(3, u, v, 20.0));
    }
    std::vector<double> r_grid{2.0, 4.0, 6.0, 8.0};
    const ProductSplitCheck check = check_product_split(
        composed, r_grid, 0.25 * composed.back().norm(), 3,
        std::max(1000, opt.samples / 10), derive_seed(opt.seed, 404));
    report.max_violation = std::max(check.indicator.max_violation,
                                    check.composed_non_spread ? -1.0 : 1.0);
    report.location = {{"indicator_violation", check.indicator.max_violation},
                       {"composed_non_spread", check.composed_non_spread}};
    report.finalize();
    reports.push_back(report);
  }

  return reports;
}

// ---------------------------------------------------------------------
// SVG renderer
// ---------------------------------------------------------------------

std::string svg_from_diagram_csv(const std::string& csv_text) {
  struct Pt {
    double q1, q2;
    std::string state;
  };
  std::vector<Pt> pts;
  std::istringstream in(csv_text);
  std::string line;
  std::getline(in, line); // header
  double q1_min = 1e300, q1_max = -1e300, q2_min = 1e300, q2_max = -1e300;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f1, f2, st;
    std::getline(ls, f1, ',');
    std::getline(ls, f2, ',');
    std::getline(ls, st, ',');
    Pt p{std::stod(f1), std::stod(f2), st};
    q1_min = std::min(q1_min, p.q1);
    q1_max = std::max(q1_max, p.q1);
    q2_min = std::min(q2_min, p.q2);
    q2_max = std::max(q2_max, p.q2);
    pts.push_back(p);
  }
  const double size = 640.0, margin = 40.0;
  const double span1 = std::max(1e-12, q1_max - q1_min);
  const double span2 = std::max(1e-12, q2_max - q2_min);
  auto sx = [&](double q1) {
    return margin + (q1 - q1_min) / span1 * (size - 2 * margin);
  };
  auto sy = [&](double q2) {
    return size - margin - (q2 - q2_min) / span2 * (size - 2 * margin);
  };
  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
      "viewBox=\"0 0 640 640\">\n<rect width=\"640\" height=\"640\" "
      "fill=\"white\"/>\n";
  for (const auto& p : pts) {
    const char* color = p.state == "certified_stable" ? "#2a9d4f"
                        : p.state == "criterion_unstable" ? "#cd3b3b"
                                                          : "#9a9a9a";
    svg += "<circle cx=\"" + fmt_double(sx(p.q1), 6) + "\" cy=\"" +
           fmt_double(sy(p.q2), 6) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

// ---------------------------------------------------------------------
// Subcommand runners
// ---------------------------------------------------------------------

namespace {

struct CommonArgs {
  std::string masses = "1,1,1";
  int basis = 24;
  int trials = 16;
  int refine = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double tol = 1e-3;
  double eps_num = 1e-6;
  int jobs = 1;
  std::string out;
  std::string format = "csv";
};

ClassifyBudget make_budget(const CommonArgs& args) {
  ClassifyBudget budget;
  budget.basis.target_size = args.basis;
  budget.basis.trials_per_slot = args.trials;
  budget.basis.refine_cycles = args.refine;
  budget.basis.seed = args.seed;
  budget.eps_num = args.eps_num;
  return budget;
}

int run_scan(const CommonArgs& args, const std::string& q1_range,
             const std::string& q2_range, double step) {
  const auto [q1_lo, q1_hi] = parse_range(q1_range);
  const auto [q2_lo, q2_hi] = parse_range(q2_range);
  const JacobiFrame frame = build_frame(parse_masses(args.masses));
  const auto q1s = make_grid(q1_lo, q1_hi, step);
  const auto q2s = make_grid(q2_lo, q2_hi, step);
  const StabilityDiagram diagram =
      scan_grid(frame, q1s, q2s, make_budget(args), args.jobs);
  const std::string csv = diagram_csv(diagram);
  if (args.out.empty()) {
    if (args.format == "svg")
      throw InvalidInput("svg output requires --out");
    std::cout << csv;
    return 0;
  }
  write_file(args.out, csv);
  if (args.format == "svg")
    write_file(args.out + ".svg", svg_from_diagram_csv(csv));
  return 0;
}

int run_trace_border(const CommonArgs& args, const std::string& sector_name,
                     const std::string& q1_range, const std::string& q2_range,
                     double step) {
  const JacobiFrame frame = build_frame(parse_masses(args.masses));
  const Sector sector =
      sector_name == "upper" ? Sector::Upper : Sector::Lower;
  const auto [ray_lo, ray_hi] =
      parse_range(sector == Sector::Upper ? q2_range : q1_range);
  const auto [scan_lo, scan_hi] =
      parse_range(sector == Sector::Upper ? q1_range : q2_range);
  const auto rays = make_grid(ray_lo, ray_hi, step);
  const auto border = trace_border(frame, sector, make_budget(args), rays,
                                   scan_lo, scan_hi, args.tol, args.jobs);
  std::string csv = "sector,fixed,lo,hi,margin_lo,margin_hi,found\n";
  for (const auto& bp : border) {
    csv += sector_name;
    csv += ',';
    csv += fmt_double(bp.fixed);
    csv += ',';
    csv += fmt_double(bp.lo);
    csv += ',';
    csv += fmt_double(bp.hi);
    csv += ',';
    csv += fmt_double(bp.margin_lo);
    csv += ',';
    csv += fmt_double(bp.margin_hi);
    csv += ',';
    csv += bp.found ? "1" : "0";
    csv += '\n';
  }
  if (args.out.empty())
    std::cout << csv;
  else
    write_file(args.out, csv);
  return 0;
}

int run_critical_charge(const CommonArgs& args, const std::string& mass_text) {
  const double nuclear_mass = parse_nuclear_mass(mass_text);
  const CriticalChargeResult result =
      critical_charge_atomic(nuclear_mass, make_budget(args), args.tol);
  nlohmann::json iterations = nlohmann::json::array();
  std::vector<double> residuals;
  for (const auto& it : result.iterations) {
    iterations.push_back({{"z", it.z},
                          {"e0", it.e0},
                          {"e_thr", it.e_thr},
                          {"residual", it.residual},
                          {"certified", it.certified}});
    residuals.push_back(it.residual);
  }
  const nlohmann::json doc{
      {"bracket", {result.z_lo, result.z_hi}},
      {"budget",
       {{"basis", args.basis},
        {"trials", args.trials},
        {"refine", args.refine},
        {"eps_num", args.eps_num}}},
      {"seed", args.seed},
      {"tolerance", args.tol},
      {"nuclear_mass", std::isfinite(nuclear_mass)
                           ? nlohmann::json(nuclear_mass)
                           : nlohmann::json("inf")},
      {"iterations", iterations},
      {"residuals", residuals}};
  const std::string text = doc.dump(2) + "\n";
  if (args.out.empty())
    std::cout << text;
  else
    write_file(args.out, text);
  return 0;
}

int run_verify(const CommonArgs& args, const std::string& suite,
               int samples) {
  VerifyOptions opt;
  opt.samples = samples;
  opt.seed = args.seed;
  opt.basis = args.basis;
  opt.trials = args.trials;
  opt.refine = args.refine;
  opt.jobs = args.jobs;

  // Plotting side-tables are emitted next to --out when --format csv.
  const bool want_csv = args.format == "csv" && !args.out.empty();
  std::string side_csv;
  std::string side_name;

  std::vector<BoundReport> reports;
  if (suite == "greens") {
    reports = suite_greens(opt, want_csv ? &side_csv : nullptr);
    side_name = ".slices.csv";
  } else if (suite == "decay") {
    reports = suite_decay(opt, want_csv ? &side_csv : nullptr);
    side_name = ".moments.csv";
  } else if (suite == "clr") {
    reports = suite_clr(opt);
  } else if (suite == "spreading") {
    reports = suite_spreading(opt, want_csv ? &side_csv : nullptr);
    side_name = ".tails.csv";
  } else if (suite == "inequalities") {
    reports = suite_inequalities(opt);
  } else {
    throw InvalidInput("unknown suite '" + suite + "'");
  }

  const nlohmann::json doc = reports_to_json(suite, reports);
  const std::string text = doc.dump(2) + "\n";
  if (args.out.empty())
    std::cout << text;
  else
    write_file(args.out, text);
  if (want_csv && !side_csv.empty())
    write_file(args.out + side_name, side_csv);
  for (const auto& r : reports)
    if (!r.pass)
      std::cerr << "verify " << suite << ": FAIL " << r.name
                << " (violation " << r.max_violation << ")\n";
  return all_pass(reports) ? 0 : 1;
}

} // namespace

int run(int argc, char** argv) {
  CLI::App cli("few-body Coulomb stability laboratory");
  cli.set_config("--config", "", "flat key=value configuration file");
  cli.require_subcommand(1);

  CommonArgs args;
  std::string q1_range = "0.1:1.0", q2_range = "0.1:1.0";
  double grid_step = 0.1;
  std::string sector = "upper";
  std::string nuclear_mass = "inf";
  std::string suite;
  int samples = 20000;

  auto add_common = [&](CLI::App* cmd, bool needs_seed) {
    cmd->add_option("--masses", args.masses, "m1,m2,m3");
    cmd->add_option("--basis", args.basis, "basis size");
    cmd->add_option("--trials", args.trials, "candidates per slot");
    cmd->add_option("--refine", args.refine, "refinement sweeps");
    auto* seed_opt = cmd->add_option("--seed", args.seed, "RNG seed");
    if (needs_seed) seed_opt->required();
    cmd->add_option("--tol", args.tol, "bisection tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--eps-num", args.eps_num, "certification margin")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", args.jobs, "worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", args.out, "output file");
    cmd->add_option("--format", args.format, "csv|json|svg")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
  };

  auto* scan = cli.add_subcommand("scan", "classify a (q1,q2) grid");
  scan->configurable();
  add_common(scan, true);
  scan->add_option("--q1", q1_range, "q1 range lo:hi");
  scan->add_option("--q2", q2_range, "q2 range lo:hi");
  scan->add_option("--grid", grid_step, "grid step");

  auto* trace = cli.add_subcommand("trace-border", "bisect the stability border");
  trace->configurable();
  add_common(trace, true);
  trace->add_option("--sector", sector, "upper|lower")
      ->check(CLI::IsMember({"upper", "lower"}));
  trace->add_option("--q1", q1_range, "q1 range lo:hi");
  trace->add_option("--q2", q2_range, "q2 range lo:hi");
  trace->add_option("--grid", grid_step, "ray spacing");

  auto* critical =
      cli.add_subcommand("critical-charge", "two-electron critical charge");
  critical->configurable();
  add_common(critical, true);
  critical->add_option("--M", nuclear_mass, "nuclear mass or 'inf'");

  auto* verify = cli.add_subcommand("verify", "run a bound-verification suite");
  verify->configurable();
  add_common(verify, false);
  verify
      ->add_option("suite", suite,
                   "greens|decay|clr|spreading|inequalities")
      ->required();
  verify->add_option("--samples", samples, "sampling budget");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (scan->parsed()) {
      if (grid_step <= 0.0) throw InvalidInput("grid step must be positive");
      return run_scan(args, q1_range, q2_range, grid_step);
    }
    if (trace->parsed())
      return run_trace_border(args, sector, q1_range, q2_range, grid_step);
    if (critical->parsed()) return run_critical_charge(args, nuclear_mass);
    if (verify->parsed()) {
      if (!verify->count("--seed")) args.seed = 1;
      return run_verify(args, suite, samples);
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

} // namespace fewbody::app
