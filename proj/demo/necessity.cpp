// Why cancellation matters: iterated delta refinements against t|t| and t^2.
// For t|t| every refinement is invisible, for t^2 the ratio grows linearly.

#include <cstdio>

#include "fracmart/fracmart.hpp"

using namespace fracmart;

int main() {
  const auto T = cyclic_difference_operator(3);
  const auto good = builtin_phi("signed-square");
  const auto bad = builtin_phi("square");
  const auto rg = delta_refinement_ratios(T, good, 0.5, 8);
  const auto rb = delta_refinement_ratios(T, bad, 0.5, 8);
  std::printf("depth   t|t|        t^2\n");
  for (std::size_t k = 0; k < rg.size(); ++k) std::printf("%5zu   %-10.6g  %-10.6g\n", k + 1, rg[k], rb[k]);
  std::printf("phi-canceling: t|t| %s, t^2 %s\n", is_phi_canceling(T, good) ? "yes" : "no",
              is_phi_canceling(T, bad) ? "yes" : "no");
  return 0;
}
