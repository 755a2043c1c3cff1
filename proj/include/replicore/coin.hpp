#pragma once

#include <cstdint>
#include <memory>

#include "replicore/rng.hpp"
#include "replicore/sources.hpp"

namespace replicore {

enum class Verdict { Accept, Reject };

struct CoinProblemParams {
  double p0;
  double q0;
  double rho;
  double delta;
  // Batch constant in m_t = ceil(c_batch * q0 / eps_t^2 * ln(2T/delta)).
  double c_batch = 3.0;

  CoinProblemParams(double p0_, double q0_, double rho_, double delta_)
      : p0(p0_), q0(q0_), rho(rho_), delta(delta_) {
    if (!(0.0 <= p0 && p0 < q0 && q0 <= 1.0))
      throw std::invalid_argument("CoinProblemParams: need 0 <= p0 < q0 <= 1");
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("CoinProblemParams: rho in (0,1)");
    if (!(delta > 0.0 && delta < 0.5))
      throw std::invalid_argument("CoinProblemParams: delta in (0,1/2)");
  }

  double gap() const { return q0 - p0; }
  // Internal failure budget, delta <- min(delta, rho/4).
  double adjusted_delta() const { return std::min(delta, rho / 4.0); }
};

struct TestOutcome {
  Verdict verdict = Verdict::Reject;
  uint64_t samples_used = 0;
  // 1-based round that triggered early termination; -1 when the loop ran out
  // (or for the non-adaptive testers, which have no rounds).
  int terminated_round = -1;
  // set when a caller-imposed sample budget stopped the run mid-flight
  bool budget_exhausted = false;
};

// Number of rounds T = ceil(4 + log2(1/rho)).
int adaptive_rounds(double rho);

// Fresh-batch size of round t (1-based).
uint64_t coin_round_batch(const CoinProblemParams& params, int t);

// Sum of all round batches; no run may exceed it.
uint64_t coin_worst_case_samples(const CoinProblemParams& params);

// Sequential tester with a random acceptance threshold and geometrically
// sharpening rounds; terminates as soon as the empirical-bias bracket clears
// the threshold. A finite sample_budget stops the run before any batch that
// would cross it (used by compositions enforcing a global cap).
TestOutcome adaptive_coin_test(CoinSource& source, const CoinProblemParams& params,
                               SharedRandomness& rand,
                               uint64_t sample_budget = UINT64_MAX);

// Fixed-sample tester: one statistical query at tolerance (q0-p0)/3 against
// a randomly offset grid, accept iff the rounded estimate clears the
// midpoint. Sample count is a deterministic function of the parameters.
TestOutcome simple_coin_test(CoinSource& source, const CoinProblemParams& params,
                             SharedRandomness& rand);
uint64_t simple_coin_samples(const CoinProblemParams& params);

// One-batch majority tester with no replicability guarantee.
TestOutcome nonreplicable_coin_test(CoinSource& source, double p0, double q0,
                                    double delta);
uint64_t nonreplicable_coin_samples(double p0, double q0, double delta);

// Feeds the indicator {x <= p0} of a p-value source to the supplied coin
// tester. An Accept verdict corresponds to rejecting the null hypothesis.
class PValueCoin final : public CoinSource {
 public:
  PValueCoin(PValueSource& inner, double p0) : inner_(inner), p0_(p0) {}
  bool flip() override {
    ++consumed_;
    const double x = inner_.draw();
    if (x < 0.0 || x > 1.0)
      throw std::domain_error("hypothesis_to_coin: p-value outside [0,1]");
    return x <= p0_;
  }

 private:
  PValueSource& inner_;
  double p0_;
};

template <class Tester>
TestOutcome hypothesis_to_coin(PValueSource& p_values, const CoinProblemParams& params,
                               SharedRandomness& rand, Tester&& tester) {
  PValueCoin coin(p_values, params.p0);
  return tester(coin, params, rand);
}

// Simulates hypothesis-test samples from a coin: heads map to a uniform draw
// on [0, p0], tails to [p0, 1]. A p0-biased coin induces the uniform
// distribution on [0,1]. The auxiliary uniforms are sample-side randomness.
class CoinPValueSource final : public PValueSource {
 public:
  CoinPValueSource(CoinSource& coin, double p0, SharedRandomness aux)
      : coin_(coin), p0_(p0), aux_(std::move(aux)) {}
  double draw() override {
    ++consumed_;
    if (coin_.flip()) return p0_ * aux_.uniform01();
    return p0_ + (1.0 - p0_) * aux_.uniform01();
  }

 private:
  CoinSource& coin_;
  double p0_;
  SharedRandomness aux_;
};

inline CoinPValueSource coin_to_hypothesis(CoinSource& coin,
                                           const CoinProblemParams& params,
                                           SharedRandomness aux) {
  return CoinPValueSource(coin, params.p0, std::move(aux));
}

}  // namespace replicore
