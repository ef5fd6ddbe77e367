#include "fewbody/reports.hpp"

namespace fewbody {

nlohmann::json to_json(const BoundReport& report) {
  return nlohmann::json{{"name", report.name},
                        {"params", report.params},
                        {"max_violation", report.max_violation},
                        {"location", report.location},
                        {"tolerance", report.tolerance},
                        {"pass", report.pass}};
}

nlohmann::json reports_to_json(const std::string& suite,
                               const std::vector<BoundReport>& reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return nlohmann::json{
      {"suite", suite}, {"reports", arr}, {"all_pass", all_pass(reports)}};
}

bool all_pass(const std::vector<BoundReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

} // namespace fewbody
