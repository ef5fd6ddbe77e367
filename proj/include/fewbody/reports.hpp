#ifndef FEWBODY_REPORTS_HPP
#define FEWBODY_REPORTS_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace fewbody {

// Pass/fail record for one verified inequality. `max_violation` is signed:
// positive means the bound was exceeded somewhere; pass <=> it stays at or
// below `tolerance`.
struct BoundReport {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  double max_violation = 0.0;
  nlohmann::json location = nlohmann::json::object();
  double tolerance = 0.0;
  bool pass = false;

  void finalize() { pass = max_violation <= tolerance; }
};

nlohmann::json to_json(const BoundReport& report);

nlohmann::json reports_to_json(const std::string& suite,
                               const std::vector<BoundReport>& reports);

bool all_pass(const std::vector<BoundReport>& reports);

} // namespace fewbody

#endif
