#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "replicore/rng.hpp"
#include "replicore/sources.hpp"

namespace replicore {

struct StatQueryParams {
  double tau;
  double rho;
  double delta;
  double c_batch = 3.0;  // adaptive round batches
  double c_fixed = 3.0;  // one-shot batch, also used by the fallback oracle

  StatQueryParams(double tau_, double rho_, double delta_)
      : tau(tau_), rho(rho_), delta(delta_) {
    if (!(tau > 0.0 && tau < 1.0))
      throw std::invalid_argument("StatQueryParams: tau in (0,1)");
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("StatQueryParams: rho in (0,1)");
    if (!(delta > 0.0 && delta < 0.5))
      throw std::invalid_argument("StatQueryParams: delta in (0,1/2)");
  }

  double alpha() const { return tau / 8.0; }
  double adjusted_delta() const { return std::min(delta, rho / 4.0); }
};

// A query phi into [0,1] evaluated against a sample source; batch_mean
// delivers the empirical mean of phi over m fresh samples.
class ScalarQuerySource {
 public:
  virtual ~ScalarQuerySource() = default;
  virtual double batch_mean(uint64_t m) = 0;
  virtual uint64_t consumed() const = 0;
};

// phi = identity on coin flips.
class CoinQuery final : public ScalarQuerySource {
 public:
  explicit CoinQuery(CoinSource& coin) : coin_(coin) {}
  double batch_mean(uint64_t m) override {
    return double(coin_.batch_heads(m)) / double(m);
  }
  uint64_t consumed() const override { return coin_.consumed(); }

 private:
  CoinSource& coin_;
};

// phi given by a value table over a finite discrete domain.
class DiscreteQuery final : public ScalarQuerySource {
 public:
  DiscreteQuery(DiscreteSource& source, std::vector<double> phi)
      : source_(source), phi_(std::move(phi)) {
    for (double v : phi_)
      if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("DiscreteQuery: phi into [0,1]");
  }
  double batch_mean(uint64_t m) override {
    const std::vector<uint64_t> counts = source_.batch_counts(m);
    double s = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) s += phi_[i] * double(counts[i]);
    return s / double(m);
  }
  uint64_t consumed() const override { return source_.consumed(); }

 private:
  DiscreteSource& source_;
  std::vector<double> phi_;
};

// Randomly offset grid over [0,1]; the first and last cell may be short.
struct StatGrid {
  double alpha;
  double offset;

  int last_cell() const {
    return int(std::ceil((1.0 - offset) / alpha));
  }
  int locate(double x) const {
    if (x <= offset) return 0;
    const int i = int(std::floor((x - offset) / alpha)) + 1;
    return std::min(i, last_cell());
  }
  double lo(int i) const { return i == 0 ? 0.0 : offset + (i - 1) * alpha; }
  double hi(int i) const {
    return i == 0 ? offset : std::min(offset + i * alpha, 1.0);
  }
  double midpoint(int i) const { return (lo(i) + hi(i)) / 2.0; }
};

uint64_t statq_round_batch(const StatQueryParams& params, int t);
uint64_t statq_worst_case_samples(const StatQueryParams& params);
uint64_t fixed_stat_query_samples(const StatQueryParams& params);

// Sequential oracle: rounds sharpen the estimate until the bracket
// (mu_hat - 2 tau_t, mu_hat + 2 tau_t) fits inside one grid cell, whose
// midpoint is returned; after the last round the raw estimate is returned.
double adaptive_stat_query(ScalarQuerySource& source, const StatQueryParams& params,
                           SharedRandomness& rand);

// One-shot oracle: single batch, return the midpoint of the cell holding the
// empirical mean.
double fixed_stat_query(ScalarQuerySource& source, const StatQueryParams& params,
                        SharedRandomness& rand);

// One-batch estimate with no replicability machinery; used after a sample
// cap is breached.
double nonreplicable_stat_query(ScalarQuerySource& source,
                                const StatQueryParams& params);

struct MultiStatQResult {
  std::vector<double> answers;
  bool cap_breached = false;
  uint64_t total_samples = 0;
};

// N adaptive queries at per-query budgets rho/(2N), delta/(2N) under a
// global sample cap; queries may be generated adaptively from previous
// answers. Once the cap is hit, every remaining query is answered by the
// non-replicable one-batch estimator. The default cap constant is calibrated
// so Markov keeps the breach probability below rho against the measured
// expected totals of the verbatim-batch oracle.
MultiStatQResult multi_stat_query(
    size_t n_queries,
    const std::function<ScalarQuerySource&(size_t index,
                                           const std::vector<double>& answers)>& provider,
    const StatQueryParams& shared_params, SharedRandomness& rand,
    double cap_constant = 200000.0);

uint64_t multi_stat_query_cap(size_t n_queries, const StatQueryParams& params,
                              double cap_constant = 200000.0);

}  // namespace replicore
