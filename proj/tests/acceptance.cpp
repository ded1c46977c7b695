#include <iostream>
#include <set>
#include <vector>

#include "CLI11.hpp"
#include "lecam/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria 1-10"};
  std::vector<int> known;
  app.add_option("--known-failure", known, "Criteria expected to fail with a certified counterexample");
  CLI11_PARSE(app, argc, argv);

  lecam::acceptance::Runner runner;
  std::vector<lecam::acceptance::SuiteResult> results;
  for (const auto& name : lecam::acceptance::suite_names()) {
    results.push_back(runner.run(name));
    std::cerr << "ran " << name << " in " << results.back().seconds << " s\n";
  }
  const std::set<int> known_set(known.begin(), known.end());
  lecam::acceptance::print_criteria(std::cout, results, known_set);
  const int status = lecam::acceptance::exit_status(results, known_set);
  std::cout << (status == 0 ? "acceptance: OK" : "acceptance: FAILED") << "\n";
  return status;
}
