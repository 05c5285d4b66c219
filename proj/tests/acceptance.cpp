// One line per acceptance criterion; exits non-zero if any fails.

#include <iostream>

#include "cantor/acceptance.hpp"

int main() {
  bool ok = true;
  for (const auto& r : cantor::run_acceptance(std::cout)) ok = ok && r.pass;
  return ok ? 0 : 1;
}
