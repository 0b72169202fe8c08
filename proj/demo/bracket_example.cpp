// The example instance end to end through the library: the hand witness, the
// fitted supersolution, an annealing search and a small certified dp.
//
//   ./bracket_example [nx ny iters]

#include <cstdio>
#include <cstdlib>

#include "fracmart/fracmart.hpp"

using namespace fracmart;

int main(int argc, char** argv) {
  const int nx = argc > 3 ? std::atoi(argv[1]) : 21;
  const int ny = argc > 3 ? std::atoi(argv[2]) : 41;
  const int iters = argc > 3 ? std::atoi(argv[3]) : 4;
  const auto ctx = example_instance();
  const unsigned threads = default_threads();

  const auto hand = phi_ratio(hand_witness(), ctx.op(), ctx.alpha(), ctx.phi());
  std::printf("hand witness (1,-1,0): E Phi = %.6f, E|F| = %.6f, ratio %.6f\n", hand.phi_value, hand.expected_abs,
              hand.ratio);

  FitConfig fc;
  fc.threads = threads;
  const auto fit = fit_two_sided(ctx, fc);
  if (!fit.success) {
    std::printf("fit failed: %s\n", fit.plus.message.c_str());
    return 1;
  }
  std::printf("supersolution: Phi (C1, C2) = (%g, %g), -Phi (%g, %g), so C <= %g\n", fit.plus.params.C1,
              fit.plus.params.C2, fit.minus.params.C1, fit.minus.params.C2, fit.upper_constant);

  SearchConfig sc;
  sc.threads = threads;
  const auto search = adversarial_search(ctx, with_hand_start(sc));
  std::printf("search: best ratio %.6f at depth %d (restart %d)\n", search.best_ratio, search.witness.depth(),
              search.best_restart);

  DpConfig dc;
  dc.geometry = {nx, ny, 8.0};
  dc.iters = iters;
  dc.threads = threads;
  const auto dp = dp_run(ctx, dc);
  for (const auto& s : dp.tail)
    std::printf("dp iteration %d: %zu cells improved, dp(0, 0) = %.6f\n", s.iteration, s.improved, s.origin_value);

  const auto br = bracket_report(ctx, dp.final_slice(), search, fit.plus.params, fit.upper_constant);
  std::printf("bracket: max(%.6f, %.6f) <= C <= %g, %zu cells above G, %s\n", br.lower_search, br.lower_dp, br.upper,
              br.sandwich_violations, br.pass ? "consistent" : "INCONSISTENT");
  return br.pass ? 0 : 1;
}
