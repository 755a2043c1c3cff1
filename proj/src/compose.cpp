#include "replicore/compose.hpp"

#include <cmath>

namespace replicore {

namespace {

NCoinOutcome run_n_coin(std::vector<CoinSource*>& sources,
                        const CoinProblemParams& per_coin,
                        const CoinProblemParams& shared, uint64_t cap,
                        SharedRandomness& rand) {
  const size_t n = sources.size();
  NCoinOutcome out;
  out.samples_per_coin.assign(n, 0);

  std::vector<std::function<TaskResult<std::pair<size_t, Verdict>>(uint64_t)>> tasks;
  tasks.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    tasks.push_back([&, i](uint64_t remaining) {
      SharedRandomness coin_rand = rand.child(i);
      TestOutcome t = adaptive_coin_test(*sources[i], per_coin, coin_rand, remaining);
      out.samples_per_coin[i] += t.samples_used;
      return TaskResult<std::pair<size_t, Verdict>>{
          {i, t.verdict}, t.samples_used, t.budget_exhausted};
    });
  }
  const std::function<TaskResult<std::pair<size_t, Verdict>>(size_t)> fallback =
      [&](size_t i) {
        TestOutcome t = nonreplicable_coin_test(*sources[i], shared.p0, shared.q0,
                                                shared.delta / (2.0 * double(n)));
        out.samples_per_coin[i] += t.samples_used;
        return TaskResult<std::pair<size_t, Verdict>>{{i, t.verdict}, t.samples_used};
      };

  CompositionBudget budget;
  budget.per_task_rho = per_coin.rho;
  budget.per_task_delta = per_coin.delta;
  budget.sample_cap = cap;
  out.accepted = compose_adaptive<std::pair<size_t, Verdict>>(
      tasks,
      [&](std::vector<std::pair<size_t, Verdict>>& transcript) {
        std::vector<size_t> acc;
        for (auto& [idx, verdict] : transcript)
          if (verdict == Verdict::Accept) acc.push_back(idx);
        return acc;
      },
      budget, fallback);
  out.cap_breached = budget.cap_breached;
  for (uint64_t s : out.samples_per_coin) out.total_samples += s;
  return out;
}

}  // namespace

uint64_t n_coin_cap(const CoinProblemParams& params, size_t n, double cap_constant) {
  const double nd = double(n);
  const double gap = params.gap();
  return uint64_t(std::ceil(cap_constant * nd * nd * params.q0 *
                            std::log(nd / params.delta) *
                            std::log2(1.0 / params.rho) /
                            (gap * gap * params.rho * params.rho)));
}

NCoinOutcome n_coin_test(std::vector<CoinSource*>& sources,
                         const CoinProblemParams& params, SharedRandomness& rand,
                         const NCoinOptions& options) {
  const size_t n = sources.size();
  if (n == 0) throw std::invalid_argument("n_coin_test: need at least one coin");
  CoinProblemParams per_coin = params;
  per_coin.rho = params.rho / double(n);
  per_coin.delta = params.delta / (2.0 * double(n));
  const uint64_t cap = options.cap_override
                           ? options.cap_override
                           : n_coin_cap(params, n, options.cap_constant);
  return run_n_coin(sources, per_coin, params, cap, rand);
}

uint64_t approx_n_coin_cap(const CoinProblemParams& params, size_t n,
                           size_t slack_r, double cap_constant) {
  const double nd = double(n);
  const double gap = params.gap();
  const double delta = params.adjusted_delta();
  return uint64_t(std::ceil(cap_constant * params.q0 * nd * nd *
                            std::log(nd / delta) * std::log(1.0 / params.rho) /
                            (gap * gap * double(slack_r) * params.rho)));
}

NCoinOutcome approx_n_coin_test(std::vector<CoinSource*>& sources,
                                const CoinProblemParams& params, size_t slack_r,
                                SharedRandomness& rand,
                                const NCoinOptions& options) {
  const size_t n = sources.size();
  if (n == 0) throw std::invalid_argument("approx_n_coin_test: need coins");
  if (slack_r < 1 || slack_r > n)
    throw std::invalid_argument("approx_n_coin_test: slack R in [1, N]");
  CoinProblemParams per_coin = params;
  per_coin.rho = double(slack_r) /
                 (2.0 * double(n) * (1.0 + 2.0 * std::log(4.0 / params.rho)));
  per_coin.delta = params.adjusted_delta() / (2.0 * double(n));
  const uint64_t cap = options.cap_override
                           ? options.cap_override
                           : approx_n_coin_cap(params, n, slack_r,
                                               options.approx_cap_constant);
  return run_n_coin(sources, per_coin, params, cap, rand);
}

BiasShift bias_shift(double a, double b) {
  if (!(0.0 <= a && a < b && b <= 1.0))
    throw std::invalid_argument("bias_shift: need 0 <= a < b <= 1");
  return BiasShift{1.0 - (a + b) / 4.0, 0.5 - (a + b) / 4.0};
}

Vec linf_learn_by_search(std::vector<CoinSource*>& sources, double eps, double rho,
                         double delta, SharedRandomness& rand,
                         SharedRandomness sample_noise,
                         const LinfLearnOptions& options) {
  const size_t n = sources.size();
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("linf_learn_by_search: eps in (0,1)");
  const int cells = int(std::ceil(2.0 / eps));
  const double width = 1.0 / double(cells);

  const double split = std::max(1.0, std::log2(1.0 / eps));
  const double rho_round = rho / (options.round_budget_constant * split);
  const double delta_round = delta / (options.round_budget_constant * split);
  const CoinProblemParams round_params(0.5 - eps / 16.0, 0.5 + eps / 16.0,
                                       rho_round, delta_round);

  std::vector<int> lo(n, 0), hi(n, cells - 1);
  Vec estimate(n, 0.0);
  std::vector<bool> done(n, false);

  int round = 0;
  for (;;) {
    std::vector<size_t> active;
    for (size_t i = 0; i < n; ++i)
      if (!done[i] && lo[i] <= hi[i]) active.push_back(i);
    if (active.empty()) break;

    // Shifted coins for this round's median cells.
    std::vector<std::unique_ptr<CoinSource>> shifted;
    std::vector<std::unique_ptr<InvertedCoin>> inverted;
    std::vector<bool> reflected(active.size(), false);
    std::vector<CoinSource*> round_sources;
    SharedRandomness reflip_seeds = sample_noise.child(50000 + round);
    for (size_t k = 0; k < active.size(); ++k) {
      const size_t i = active[k];
      const int cell = lo[i] + (hi[i] - lo[i]) / 2;
      double a = cell * width;
      double b = std::min((cell + 1) * width, 1.0);
      CoinSource* base = sources[i];
      if (a > (1.0 - width) / 2.0 + 1e-15) {
        // reflect so the shift formulas apply with a <= (1 - w)/2
        reflected[k] = true;
        inverted.push_back(std::make_unique<InvertedCoin>(*base));
        base = inverted.back().get();
        const double a2 = 1.0 - b, b2 = 1.0 - a;
        a = a2;
        b = b2;
      }
      const BiasShift s = bias_shift(a, b);
      // Re-flip randomness is sample-side: it rides on the coin's own stream
      // seeded per (round, coordinate) from the run's sample seeder.
      shifted.push_back(std::make_unique<ReflippedCoin>(
          *base, s.h, s.t, reflip_seeds.child(i)));
      round_sources.push_back(shifted.back().get());
    }

    SharedRandomness round_rand = rand.child(60000 + round);
    NCoinOutcome verdicts =
        n_coin_test(round_sources, round_params, round_rand, options.ncoin);
    std::vector<bool> accepted(active.size(), false);
    for (size_t idx : verdicts.accepted) accepted[idx] = true;

    for (size_t k = 0; k < active.size(); ++k) {
      const size_t i = active[k];
      const int cell = lo[i] + (hi[i] - lo[i]) / 2;
      // Accept on the shifted coin means bias >= b of the tested interval;
      // under reflection that maps back to bias <= a of the original.
      const bool above = reflected[k] ? !accepted[k] : accepted[k];
      if (above)
        lo[i] = cell + 1;
      else
        hi[i] = cell - 1;
      if (lo[i] > hi[i]) {
        // the two neighbours of the emptied range share this endpoint
        estimate[i] = above ? (cell + 1) * width : cell * width;
        done[i] = true;
      } else if (lo[i] == hi[i]) {
        estimate[i] = (lo[i] + 0.5) * width;
        done[i] = true;
      }
    }
    ++round;
    if (round > cells + 2) break;  // safety, unreachable for sane inputs
  }
  for (double& e : estimate) e = std::min(1.0, std::max(0.0, e));
  return estimate;
}

}  // namespace replicore
