#include "fewbody/cg_engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "fewbody/errors.hpp"
#include "fewbody/numfmt.hpp"
#include "fewbody/rng.hpp"

namespace fewbody {

void SystemSpec::validate() const {
  if (n_vec < 1) throw InvalidInput("spec: n_vec must be >= 1");
  if (lambda.rows() != n_vec || lambda.cols() != n_vec)
    throw InvalidInput("spec: lambda has wrong shape");
  if (!lambda.isApprox(lambda.transpose(), 1e-12))
    throw InvalidInput("spec: lambda must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(lambda);
  if (llt.info() != Eigen::Success)
    throw InvalidInput("spec: lambda must be positive-definite");
  for (const auto& term : interactions) {
    if (term.w.size() != n_vec)
      throw InvalidInput("spec: interaction vector has wrong size");
    if (term.w.norm() == 0.0)
      throw InvalidInput("spec: interaction vector w must be nonzero");
  }
  if (exchange) {
    const Eigen::MatrixXd& p = *exchange;
    if (p.rows() != n_vec || p.cols() != n_vec)
      throw InvalidInput("spec: exchange has wrong shape");
    if (!(p * p).isApprox(Eigen::MatrixXd::Identity(n_vec, n_vec), 1e-12))
      throw InvalidInput("spec: exchange must be an involution");
    if (!(p.transpose() * lambda * p).isApprox(lambda, 1e-12))
      throw InvalidInput("spec: exchange must preserve lambda");
  }
}

namespace {

bool is_duplicate(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return true;
  return (a - b).norm() < 1e-10 * scale;
}

Eigen::LLT<Eigen::MatrixXd> checked_llt(const Eigen::MatrixXd& m,
                                        const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw InvalidInput(what);
  return llt;
}

} // namespace

bool GaussianBasis::add(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InvalidInput("basis: width not square");
  if (!a.isApprox(a.transpose(), 1e-12))
    throw InvalidInput("basis: width not symmetric");
  checked_llt(a, "basis: width not positive-definite");
  for (const auto& b : widths_)
    if (is_duplicate(a, b)) return false;
  widths_.push_back(a);
  return true;
}

std::string GaussianBasis::serialize() const {
  std::string out;
  for (const auto& a : widths_) {
    bool first = true;
    for (int i = 0; i < a.rows(); ++i)
      for (int j = i; j < a.cols(); ++j) {
        if (!first) out += ' ';
        out += fmt_double(a(i, j));
        first = false;
      }
    out += '\n';
  }
  return out;
}

GaussianBasis GaussianBasis::deserialize(const std::string& text, int n_vec) {
  GaussianBasis basis;
  std::istringstream in(text);
  std::string line;
  const int expect = n_vec * (n_vec + 1) / 2;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    double v = 0.0;
    while (ls >> v) vals.push_back(v);
    if (static_cast<int>(vals.size()) != expect)
      throw IoError("basis: wrong entry count on line");
    Eigen::MatrixXd a(n_vec, n_vec);
    int k = 0;
    for (int i = 0; i < n_vec; ++i)
      for (int j = i; j < n_vec; ++j) {
        a(i, j) = vals[k];
        a(j, i) = vals[k];
        ++k;
      }
    basis.add(a);
  }
  return basis;
}

void GaussianBasis::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("basis: cannot open " + path);
  out << serialize();
}

GaussianBasis GaussianBasis::load(const std::string& path, int n_vec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("basis: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str(), n_vec);
}

double overlap(const Eigen::MatrixXd& ai, const Eigen::MatrixXd& aj) {
  const Eigen::MatrixXd b = ai + aj;
  auto llt = checked_llt(b, "overlap: Ai + Aj not positive-definite");
  const int n = static_cast<int>(b.rows());
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return std::exp(1.5 * n * std::log(2.0 * M_PI) - 1.5 * log_det);
}

double kinetic(const Eigen::MatrixXd& ai, const Eigen::MatrixXd& aj,
               const Eigen::MatrixXd& lambda) {
  const Eigen::MatrixXd b = ai + aj;
  auto llt = checked_llt(b, "kinetic: Ai + Aj not positive-definite");
  const Eigen::MatrixXd binv_aj = llt.solve(aj);
  return 3.0 * (lambda * ai * binv_aj).trace() * overlap(ai, aj);
}

double coulomb(const Eigen::MatrixXd& ai, const Eigen::MatrixXd& aj,
               const Eigen::VectorXd& w) {
  if (w.norm() == 0.0) throw InvalidInput("coulomb: w must be nonzero");
  const Eigen::MatrixXd b = ai + aj;
  auto llt = checked_llt(b, "coulomb: Ai + Aj not positive-definite");
  const double c = w.dot(llt.solve(w));
  return overlap(ai, aj) * std::sqrt(2.0 / (M_PI * c));
}

namespace {

struct ElementPair {
  double h = 0.0;
  double s = 0.0;
};

ElementPair raw_element(const SystemSpec& spec, const Eigen::MatrixXd& ai,
                        const Eigen::MatrixXd& aj) {
  ElementPair e;
  e.s = overlap(ai, aj);
  e.h = kinetic(ai, aj, spec.lambda);
  const Eigen::MatrixXd b = ai + aj;
  Eigen::LLT<Eigen::MatrixXd> llt(b);
  for (const auto& term : spec.interactions) {
    if (term.g == 0.0) continue;
    const double c = term.w.dot(llt.solve(term.w));
    e.h += term.g * e.s * std::sqrt(2.0 / (M_PI * c));
  }
  return e;
}

// Symmetrized element: average of the plain element and the one with the
// bra partner exchanged; equals the plain element when P^T Aj P = Aj.
ElementPair element(const SystemSpec& spec, const Eigen::MatrixXd& ai,
                    const Eigen::MatrixXd& aj) {
  ElementPair e = raw_element(spec, ai, aj);
  if (!spec.exchange) return e;
  const Eigen::MatrixXd& p = *spec.exchange;
  const Eigen::MatrixXd aj_x = p.transpose() * aj * p;
  const ElementPair ex = raw_element(spec, ai, aj_x);
  e.h = 0.5 * (e.h + ex.h);
  e.s = 0.5 * (e.s + ex.s);
  return e;
}

} // namespace

HamiltonianMatrices assemble(const SystemSpec& spec,
                             const GaussianBasis& basis) {
  spec.validate();
  const int m = basis.size();
  if (m == 0) throw InvalidInput("assemble: basis is empty");
  HamiltonianMatrices hs;
  hs.h.resize(m, m);
  hs.s.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      const ElementPair e = element(spec, basis[i], basis[j]);
      hs.h(i, j) = hs.h(j, i) = e.h;
      hs.s(i, j) = hs.s(j, i) = e.s;
    }
  return hs;
}

SpectralResult solve_gevp(const HamiltonianMatrices& hs, double cond_cutoff) {
  if (!(cond_cutoff > 0.0) || !(cond_cutoff < 1.0))
    throw InvalidInput("solve_gevp: cond_cutoff must lie in (0,1)");
  const int m = static_cast<int>(hs.h.rows());
  if (m == 0 || hs.s.rows() != m) throw InvalidInput("solve_gevp: bad shapes");

  // Scale to unit diagonal first; the cutoff is relative to the
  // normalized overlap spectrum, which keeps diffuse functions alive.
  Eigen::VectorXd d(m);
  for (int i = 0; i < m; ++i) {
    const double sii = hs.s(i, i);
    if (!(sii > 0.0))
      throw DegenerateBasisError("solve_gevp: overlap diagonal not positive");
    d[i] = 1.0 / std::sqrt(sii);
  }
  const Eigen::MatrixXd sn = d.asDiagonal() * hs.s * d.asDiagonal();
  const Eigen::MatrixXd hn = d.asDiagonal() * hs.h * d.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sn);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double ev_max = ev.maxCoeff();
  if (!(ev_max > 0.0)) throw DegenerateBasisError("solve_gevp: overlap not positive");
  const double floor = cond_cutoff * ev_max;

  std::vector<int> kept;
  for (int i = 0; i < m; ++i)
    if (ev[i] >= floor) kept.push_back(i);
  if (kept.empty())
    throw DegenerateBasisError("solve_gevp: all overlap eigenvalues below cutoff");

  const int k = static_cast<int>(kept.size());
  Eigen::MatrixXd x(m, k);
  double smallest = std::numeric_limits<double>::infinity();
  for (int c = 0; c < k; ++c) {
    const int i = kept[c];
    x.col(c) = es.eigenvectors().col(i) / std::sqrt(ev[i]);
    smallest = std::min(smallest, ev[i]);
  }

  Eigen::MatrixXd ht = x.transpose() * hn * x;
  ht = 0.5 * (ht + ht.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eh(ht);

  SpectralResult out;
  out.e0 = eh.eigenvalues()[0];
  const Eigen::VectorXd cn = x * eh.eigenvectors().col(0);
  out.coeff = d.asDiagonal() * cn;
  out.n_kept = k;
  out.smallest_kept_overlap = smallest;
  const double cnorm = out.coeff.norm();
  out.residual =
      (hs.h * out.coeff - out.e0 * (hs.s * out.coeff)).norm() / cnorm;
  return out;
}

namespace {

struct SamplingChannel {
  Eigen::VectorXd w;
  double natural_length = 1.0;
};

std::vector<SamplingChannel> sampling_channels(const SystemSpec& spec) {
  std::vector<SamplingChannel> channels;
  std::vector<double> charged_lengths;
  for (const auto& term : spec.interactions) {
    SamplingChannel ch;
    ch.w = term.w;
    const double kappa = term.w.dot(spec.lambda * term.w);
    if (term.g != 0.0) {
      ch.natural_length = 2.0 * kappa / std::abs(term.g);
      charged_lengths.push_back(ch.natural_length);
    } else {
      ch.natural_length = 0.0; // filled below
    }
    channels.push_back(ch);
  }
  double fallback = 1.0;
  if (!charged_lengths.empty()) {
    double log_sum = 0.0;
    for (double l : charged_lengths) log_sum += std::log(l);
    fallback = std::exp(log_sum / charged_lengths.size());
  }
  for (auto& ch : channels)
    if (ch.natural_length == 0.0) ch.natural_length = fallback;

  // The sampled rank-one terms must span, otherwise no candidate is SPD.
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(spec.n_vec, spec.n_vec);
  for (const auto& ch : channels) gram += ch.w * ch.w.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.eigenvalues()[0] <= 1e-12 * es.eigenvalues().maxCoeff())
    throw InvalidInput("optimize_basis: interaction vectors do not span");
  return channels;
}

Eigen::MatrixXd widths_from_lengths(const std::vector<SamplingChannel>& chs,
                                    const std::vector<double>& lengths) {
  const int n = static_cast<int>(chs.front().w.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t p = 0; p < chs.size(); ++p)
    a += chs[p].w * chs[p].w.transpose() / (lengths[p] * lengths[p]);
  return a;
}

std::vector<double> sample_lengths(const std::vector<SamplingChannel>& chs,
                                   const SamplingRanges& ranges, Rng& rng) {
  std::vector<double> lengths(chs.size());
  // Alternate between fully independent channel scales (reaches the
  // cluster-like tails) and a shared scale with small per-channel spread
  // (reaches the correlated core, which independent draws almost never
  // hit when the window spans five decades).
  const bool coherent = rng.uniform01() < 0.5;
  const double shared = rng.log_uniform(ranges.lo, ranges.hi);
  for (std::size_t p = 0; p < chs.size(); ++p) {
    const double factor = coherent
                              ? shared * std::pow(10.0, 0.3 * rng.normal())
                              : rng.log_uniform(ranges.lo, ranges.hi);
    lengths[p] = chs[p].natural_length * factor;
  }
  return lengths;
}

std::vector<double> jitter_lengths(const std::vector<double>& base, Rng& rng) {
  std::vector<double> lengths(base.size());
  for (std::size_t p = 0; p < base.size(); ++p)
    lengths[p] = base[p] * std::pow(10.0, 0.25 * rng.normal());
  return lengths;
}

struct GrowState {
  std::vector<Eigen::MatrixXd> widths;
  std::vector<std::vector<double>> lengths;
  Eigen::MatrixXd h;
  Eigen::MatrixXd s;
};

// H,S with row/col `slot` replaced by elements against `a`; slot == m
// appends instead.
void place(const SystemSpec& spec, GrowState& st, int slot,
           const Eigen::MatrixXd& a, Eigen::MatrixXd& h, Eigen::MatrixXd& s) {
  const int m = static_cast<int>(st.widths.size());
  const bool append = slot == m;
  const int n = append ? m + 1 : m;
  h.resize(n, n);
  s.resize(n, n);
  h.topLeftCorner(m, m) = st.h;
  s.topLeftCorner(m, m) = st.s;
  for (int j = 0; j < n; ++j) {
    const Eigen::MatrixXd& other =
        (j == slot) ? a : st.widths[static_cast<std::size_t>(j)];
    const ElementPair e = element(spec, a, other);
    h(slot, j) = h(j, slot) = e.h;
    s(slot, j) = s(j, slot) = e.s;
  }
}

} // namespace

OptimizeResult optimize_basis(const SystemSpec& spec,
                              const BasisBudget& budget) {
  spec.validate();
  if (budget.target_size < 1)
    throw InvalidInput("optimize_basis: target_size must be >= 1");
  if (budget.trials_per_slot < 1)
    throw InvalidInput("optimize_basis: trials_per_slot must be >= 1");

  const auto channels = sampling_channels(spec);
  Rng master(budget.seed);
  GrowState st;

  double current_e0 = std::numeric_limits<double>::infinity();
  std::vector<double> trace;

  struct Candidate {
    bool valid = false;
    double e0 = 0.0;
    Eigen::MatrixXd a;
    std::vector<double> lengths;
    Eigen::MatrixXd h, s;
  };

  auto try_candidate = [&](int slot, const std::vector<double>& lengths,
                           Candidate& best) {
    const Eigen::MatrixXd a = widths_from_lengths(channels, lengths);
    for (int i = 0; i < static_cast<int>(st.widths.size()); ++i)
      if (i != slot && is_duplicate(a, st.widths[i])) return;
    Eigen::MatrixXd h, s;
    place(spec, st, slot, a, h, s);
    SpectralResult res;
    try {
      res = solve_gevp({h, s}, budget.cond_cutoff);
    } catch (const DegenerateBasisError&) {
      return;
    }
    if (!best.valid || res.e0 < best.e0) {
      best.valid = true;
      best.e0 = res.e0;
      best.a = a;
      best.lengths = lengths;
      best.h = std::move(h);
      best.s = std::move(s);
    }
  };

  // Growth phase.
  for (int slot = 0; slot < budget.target_size; ++slot) {
    Rng rng = master.split(static_cast<std::uint64_t>(slot));
    Candidate best;
    for (int t = 0; t < budget.trials_per_slot; ++t)
      try_candidate(slot, sample_lengths(channels, budget.ranges, rng), best);
    if (!best.valid)
      throw BudgetInsufficientError(
          "optimize_basis: no admissible candidate for a slot");
    st.widths.push_back(best.a);
    st.lengths.push_back(best.lengths);
    st.h = std::move(best.h);
    st.s = std::move(best.s);
    current_e0 = best.e0;
    trace.push_back(current_e0);
  }

  // Refinement sweeps: re-optimize each slot in place, mixing fresh global
  // samples with local jitter around the incumbent widths.
  const std::uint64_t refine_base = 0x5eedb00ful;
  for (int cycle = 0; cycle < budget.refine_cycles; ++cycle) {
    for (int slot = 0; slot < budget.target_size; ++slot) {
      Rng rng = master.split(refine_base + static_cast<std::uint64_t>(
                                               cycle * budget.target_size +
                                               slot));
      Candidate best;
      for (int t = 0; t < budget.trials_per_slot; ++t) {
        const bool local = (t % 2 == 0);
        const auto lengths =
            local ? jitter_lengths(st.lengths[slot], rng)
                  : sample_lengths(channels, budget.ranges, rng);
        try_candidate(slot, lengths, best);
      }
      if (best.valid && best.e0 < current_e0) {
        st.widths[slot] = best.a;
        st.lengths[slot] = best.lengths;
        st.h = std::move(best.h);
        st.s = std::move(best.s);
        current_e0 = best.e0;
      }
    }
  }

  OptimizeResult out;
  for (const auto& a : st.widths) out.basis.add(a);
  out.spectrum = solve_gevp({st.h, st.s}, budget.cond_cutoff);
  out.energy_trace = std::move(trace);
  return out;
}

SystemSpec three_body_spec(const JacobiFrame& frame, double q1, double q2) {
  if (q1 < 0.0 || q2 < 0.0)
    throw InvalidInput("three_body_spec: charges must be non-negative");
  SystemSpec spec;
  spec.n_vec = 2;
  spec.lambda = frame.lambda;
  const double couplings[3] = {-q2, -q1, q1 * q2};
  for (int p = 0; p < 3; ++p) {
    Interaction term;
    term.w = frame.pairs[p].w;
    term.g = couplings[p];
    spec.interactions.push_back(term);
  }
  return spec;
}

SystemSpec atomic_spec(double z, double nuclear_mass, int n_e) {
  if (!(z > 0.0)) throw InvalidInput("atomic_spec: Z must be positive");
  if (n_e < 1 || n_e > 2)
    throw InvalidInput("atomic_spec: only N_e in {1,2} is supported");
  if (!(nuclear_mass > 0.0))
    throw InvalidInput("atomic_spec: nuclear mass must be positive");
  SystemSpec spec;
  spec.n_vec = n_e;
  const bool finite = std::isfinite(nuclear_mass);
  const double diag = finite ? (nuclear_mass + 1.0) / (2.0 * nuclear_mass) : 0.5;
  const double off = finite ? 1.0 / (2.0 * nuclear_mass) : 0.0;
  spec.lambda = Eigen::MatrixXd::Constant(n_e, n_e, off);
  for (int i = 0; i < n_e; ++i) spec.lambda(i, i) = diag;
  for (int i = 0; i < n_e; ++i) {
    Interaction term;
    term.w = Eigen::VectorXd::Zero(n_e);
    term.w[i] = 1.0;
    term.g = -z;
    spec.interactions.push_back(term);
  }
  for (int i = 0; i < n_e; ++i)
    for (int j = i + 1; j < n_e; ++j) {
      Interaction term;
      term.w = Eigen::VectorXd::Zero(n_e);
      term.w[i] = 1.0;
      term.w[j] = -1.0;
      term.g = 1.0;
      spec.interactions.push_back(term);
    }
  if (n_e == 2) {
    Eigen::MatrixXd p(2, 2);
    p << 0.0, 1.0, 1.0, 0.0;
    spec.exchange = p;
  }
  return spec;
}

double atomic_threshold_energy(double z, double nuclear_mass) {
  const double mu_e = std::isfinite(nuclear_mass)
                          ? nuclear_mass / (nuclear_mass + 1.0)
                          : 1.0;
  return -0.5 * mu_e * z * z;
}

} // namespace fewbody
