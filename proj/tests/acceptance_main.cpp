#include <iostream>

#include "repulse/validate.hpp"

int main() {
  const auto results = repulse::validate::run_all(false, 0);
  repulse::validate::print_table(results, std::cout);
  return repulse::validate::all_pass(results) ? 0 : 1;
}
