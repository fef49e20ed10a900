// Full acceptance suite: one PASS/FAIL line per criterion, then the table.
// Usage: acceptance [config.ini] [report.json]
#include <fstream>
#include <iomanip>
#include <iostream>

#include "yamabe/experiments.hpp"

int main(int argc, char** argv) {
  using namespace yamabe;
  ExperimentConfig cfg;
  try {
    if (argc > 1 && argv[1][0] != 0) cfg = load_config(argv[1]);
    cfg.validate();
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  const auto report = run_acceptance(cfg, [](const CriterionResult& r) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << r.id << "  " << r.name
              << "  measured=" << std::setprecision(6) << r.measured << " " << r.relation << " " << r.tolerance
              << "  (" << std::fixed << std::setprecision(1) << r.seconds << " s)" << std::defaultfloat << "\n"
              << "      " << r.details.dump() << std::endl;
  });
  std::cout << "\n";
  report.print_table(std::cout);
  if (argc > 2) std::ofstream(argv[2]) << report.to_json().dump(2) << "\n";
  return report.all_pass() ? 0 : 1;
}
