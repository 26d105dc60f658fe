// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is 1 when any gating criterion fails.
#include <cstdlib>
#include <exception>
#include <iostream>

#include "bwlab/lab/acceptance.hpp"
#include "bwlab/lab/config.hpp"

int main() {
  using namespace bwlab::lab;
  const char* env = std::getenv("BWLAB_DEFAULTS");
  Defaults defaults;
  try {
    defaults = load_defaults(env ? env : BWLAB_DEFAULTS_FILE);
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 2;
  }
  bool ok = true;
  for (int id : criterion_ids()) {
    CriterionResult r;
    try {
      r = run_criterion(id, defaults);
    } catch (const std::exception& e) {
      r.id = id;
      r.title = criterion_title(id);
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    std::cout << format_line(r) << std::endl;
    if (!r.pass && r.gating) ok = false;
  }
  return ok ? 0 : 1;
}
