#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "replicore/coin.hpp"
#include "replicore/rng.hpp"
#include "replicore/sources.hpp"

namespace replicore {

struct CompositionBudget {
  double per_task_rho = 0.0;
  double per_task_delta = 0.0;
  uint64_t sample_cap = std::numeric_limits<uint64_t>::max();
  bool cap_breached = false;
};

template <class Out>
struct TaskResult {
  Out value;
  uint64_t samples = 0;
  bool budget_exhausted = false;  // task stopped against the remaining budget
};

// Runs tasks in order under the sample cap; each task receives the budget
// still available and reports exhaustion when it cannot finish within it.
// On breach the transcript is abandoned and the fallback's output returned.
// Tasks must take fresh samples and disjoint slices of the internal stream.
template <class Out, class Agg>
auto compose_adaptive(
    const std::vector<std::function<TaskResult<Out>(uint64_t remaining)>>& tasks,
    Agg&& aggregate, CompositionBudget& budget,
    const std::function<TaskResult<Out>(size_t)>& fallback)
    -> decltype(aggregate(std::declval<std::vector<Out>&>())) {
  std::vector<Out> transcript;
  transcript.reserve(tasks.size());
  uint64_t used = 0;
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (used >= budget.sample_cap) {
      budget.cap_breached = true;
      break;
    }
    TaskResult<Out> r = tasks[i](budget.sample_cap - used);
    used += r.samples;
    if (r.budget_exhausted || used > budget.sample_cap) {
      budget.cap_breached = true;
      break;
    }
    transcript.push_back(std::move(r.value));
  }
  if (budget.cap_breached) {
    transcript.clear();
    for (size_t i = 0; i < tasks.size(); ++i) {
      TaskResult<Out> r = fallback(i);
      used += r.samples;
      transcript.push_back(std::move(r.value));
    }
  }
  return aggregate(transcript);
}

struct NCoinOutcome {
  std::vector<size_t> accepted;  // sorted coin indices
  std::vector<uint64_t> samples_per_coin;
  uint64_t total_samples = 0;
  bool cap_breached = false;
};

// Default cap constants are calibrated so that Markov's inequality holds
// against the measured expected totals of the testers: the breach
// probability stays below rho (strict tester) resp. rho/4 (approximate
// tester). A constant of order 100 under-counts the per-round batch sizes
// by two orders of magnitude and makes the cap bind on typical runs.
struct NCoinOptions {
  double cap_constant = 5000.0;
  double approx_cap_constant = 300000.0;
  uint64_t cap_override = 0;  // nonzero replaces the formula cap
};

uint64_t n_coin_cap(const CoinProblemParams& params, size_t n,
                    double cap_constant = 5000.0);

// N sequential single-coin testers at budgets (rho/N, delta/(2N)) under a
// global cap; the fallback reruns every coin with the one-batch
// non-replicable tester at delta/(2N).
NCoinOutcome n_coin_test(std::vector<CoinSource*>& sources,
                         const CoinProblemParams& params, SharedRandomness& rand,
                         const NCoinOptions& options = {});

// Relaxed replicability: per-coin budget rho' = R/(2N(1 + 2 ln(4/rho))),
// so paired runs disagree on fewer than R coins outside a rho-probability
// event.
NCoinOutcome approx_n_coin_test(std::vector<CoinSource*>& sources,
                                const CoinProblemParams& params, size_t slack_r,
                                SharedRandomness& rand,
                                const NCoinOptions& options = {});

uint64_t approx_n_coin_cap(const CoinProblemParams& params, size_t n,
                           size_t slack_r, double cap_constant = 300000.0);

// Per-round re-flip probabilities shifting the test interval (a, b = a + w)
// onto (1/2 - w/4, 1/2 + w/4): keep heads with probability h, turn tails
// heads with probability t.
struct BiasShift {
  double h;
  double t;
};
BiasShift bias_shift(double a, double b);

struct LinfLearnOptions {
  double round_budget_constant = 8.0;  // C in rho / (C log2(1/eps))
  NCoinOptions ncoin;
};

// Simultaneous binary search over a shared cell grid on [0,1]; each round
// re-flips every undecided coin so one N-coin test at thresholds
// (1/2 - eps/16, 1/2 + eps/16) decides a cell per coordinate. The re-flip
// noise transforms observed samples, so it belongs to the run's sample
// randomness (sample_noise), never to the shared stream.
Vec linf_learn_by_search(std::vector<CoinSource*>& sources, double eps, double rho,
                         double delta, SharedRandomness& rand,
                         SharedRandomness sample_noise,
                         const LinfLearnOptions& options = {});

}  // namespace replicore
