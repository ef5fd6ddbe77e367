#ifndef FEWBODY_APP_HPP
#define FEWBODY_APP_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "fewbody/reports.hpp"

namespace fewbody::app {

// Exit codes: 0 success, 1 verification suite failed, 2 invalid
// configuration, 3 solver/bracket/resolution failure.
int run(int argc, char** argv);

struct VerifyOptions {
  int samples = 100000;
  std::uint64_t seed = 1;
  int basis = 48;
  int trials = 20;
  int refine = 2;
  int jobs = 1;
};

// Each suite can optionally emit a plotting side-table (CSV text):
// greens -> kernel slices, decay -> (n, moment, bound), spreading ->
// (n, R, tail mass).
std::vector<BoundReport> suite_inequalities(const VerifyOptions& opt);
std::vector<BoundReport> suite_greens(const VerifyOptions& opt,
                                      std::string* slices_csv = nullptr);
std::vector<BoundReport> suite_decay(const VerifyOptions& opt,
                                     std::string* moments_csv = nullptr);
std::vector<BoundReport> suite_clr(const VerifyOptions& opt);
std::vector<BoundReport> suite_spreading(const VerifyOptions& opt,
                                         std::string* tails_csv = nullptr);

// Thin SVG scatter renderer over a stability-diagram CSV.
std::string svg_from_diagram_csv(const std::string& csv_text);

} // namespace fewbody::app

#endif
