#ifndef FEWBODY_CG_ENGINE_HPP
#define FEWBODY_CG_ENGINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fewbody/kinematics.hpp"

namespace fewbody {

// One Coulomb-type term g/|w^T x| of the potential.
struct Interaction {
  Eigen::VectorXd w;
  double g = 0.0;
};

// H = -grad^T Lambda grad + sum_p g_p / |w_p^T x| over n_vec 3-vector
// coordinates, with an optional exchange permutation P used to project
// matrix elements onto the spatially symmetric sector.
struct SystemSpec {
  int n_vec = 2;
  Eigen::MatrixXd lambda;
  std::vector<Interaction> interactions;
  std::optional<Eigen::MatrixXd> exchange;

  void validate() const;
};

// Trial functions exp(-x^T A x / 2) with A symmetric positive-definite.
class GaussianBasis {
public:
  GaussianBasis() = default;

  // Returns false (and does not insert) when `a` duplicates an existing
  // width matrix to within 1e-10 scaled Frobenius distance.
  bool add(const Eigen::MatrixXd& a);
  void clear() { widths_.clear(); }

  int size() const { return static_cast<int>(widths_.size()); }
  const Eigen::MatrixXd& operator[](int i) const { return widths_[i]; }
  const std::vector<Eigen::MatrixXd>& widths() const { return widths_; }

  // Flat text format: one line per function, row-major upper triangle,
  // '.' decimal separator.
  std::string serialize() const;
  static GaussianBasis deserialize(const std::string& text, int n_vec);
  void save(const std::string& path) const;
  static GaussianBasis load(const std::string& path, int n_vec);

private:
  std::vector<Eigen::MatrixXd> widths_;
};

// Closed-form correlated-Gaussian matrix elements.
double overlap(const Eigen::MatrixXd& ai, const Eigen::MatrixXd& aj);
double kinetic(const Eigen::MatrixXd& ai, const Eigen::MatrixXd& aj,
               const Eigen::MatrixXd& lambda);
double coulomb(const Eigen::MatrixXd& ai, const Eigen::MatrixXd& aj,
               const Eigen::VectorXd& w);

struct HamiltonianMatrices {
  Eigen::MatrixXd h;
  Eigen::MatrixXd s;
};

HamiltonianMatrices assemble(const SystemSpec& spec,
                             const GaussianBasis& basis);

struct SpectralResult {
  double e0 = 0.0;
  Eigen::VectorXd coeff;       // in the original (unorthogonalized) basis
  int n_kept = 0;              // basis functions surviving the cutoff
  double smallest_kept_overlap = 0.0;
  double residual = 0.0;       // ||Hc - E0 Sc|| / ||c||
};

// Generalized eigenproblem Hc = E S c restricted to the overlap
// eigenspace with eigenvalues >= cond_cutoff * max. Throws
// DegenerateBasisError when nothing survives.
SpectralResult solve_gevp(const HamiltonianMatrices& hs, double cond_cutoff);

// Width sampling window, as multiples of each channel's natural length.
struct SamplingRanges {
  double lo = 1e-2;
  double hi = 1e3;
};

struct BasisBudget {
  int target_size = 24;
  int trials_per_slot = 20;
  std::uint64_t seed = 1;
  int refine_cycles = 1;
  double cond_cutoff = 1e-12;
  SamplingRanges ranges;
};

struct OptimizeResult {
  GaussianBasis basis;
  SpectralResult spectrum;
  std::vector<double> energy_trace; // best E0 after each accepted slot
};

// Stochastic growth: one slot at a time, keeping the candidate width
// matrix that minimizes E0, then optional refinement sweeps over slots.
// Deterministic for a fixed budget (seed included).
OptimizeResult optimize_basis(const SystemSpec& spec,
                              const BasisBudget& budget);

// Hamiltonian factories.
SystemSpec three_body_spec(const JacobiFrame& frame, double q1, double q2);

// Atom with nuclear charge z and n_e electrons; nuclear_mass may be
// infinity. Coordinates are electron positions relative to the nucleus;
// the mass-polarization cross terms sit in lambda's off-diagonal.
SystemSpec atomic_spec(double z, double nuclear_mass, int n_e = 2);

// Hydrogenic ground energy of the (n_e - 1)-electron threshold channel.
double atomic_threshold_energy(double z, double nuclear_mass);

} // namespace fewbody

#endif
