#include "replicore/statq.hpp"

#include <cmath>

#include "replicore/coin.hpp"

namespace replicore {

uint64_t statq_round_batch(const StatQueryParams& params, int t) {
  const int rounds = adaptive_rounds(params.rho);
  const double delta = params.adjusted_delta();
  const double tau_t = params.tau / std::pow(2.0, t + 2);
  return uint64_t(std::ceil(params.c_batch / (tau_t * tau_t) *
                            std::log(2.0 * rounds / delta)));
}

uint64_t statq_worst_case_samples(const StatQueryParams& params) {
  uint64_t total = 0;
  const int rounds = adaptive_rounds(params.rho);
  for (int t = 1; t <= rounds; ++t) total += statq_round_batch(params, t);
  return total;
}

double adaptive_stat_query(ScalarQuerySource& source, const StatQueryParams& params,
                           SharedRandomness& rand) {
  const StatGrid grid{params.alpha(), draw_uniform_interval(rand, 0.0, params.alpha())};
  const int rounds = adaptive_rounds(params.rho);
  double mu_hat = 0.0;
  for (int t = 1; t <= rounds; ++t) {
    const double tau_t = params.tau / std::pow(2.0, t + 2);
    const uint64_t m_t = statq_round_batch(params, t);
    mu_hat = source.batch_mean(m_t);
    const double lo = mu_hat - 2.0 * tau_t;
    const double hi = mu_hat + 2.0 * tau_t;
    const int cell = grid.locate(lo < 0.0 ? 0.0 : lo);
    if (lo >= grid.lo(cell) && hi <= grid.hi(cell)) return grid.midpoint(cell);
  }
  return mu_hat;
}

uint64_t fixed_stat_query_samples(const StatQueryParams& params) {
  const double alpha = params.alpha();
  return uint64_t(std::ceil(params.c_fixed / (alpha * alpha * params.rho * params.rho) *
                            std::log(1.0 / params.adjusted_delta())));
}

double fixed_stat_query(ScalarQuerySource& source, const StatQueryParams& params,
                        SharedRandomness& rand) {
  const StatGrid grid{params.alpha(), draw_uniform_interval(rand, 0.0, params.alpha())};
  const uint64_t m = fixed_stat_query_samples(params);
  const double mu_hat = source.batch_mean(m);
  return grid.midpoint(grid.locate(mu_hat));
}

double nonreplicable_stat_query(ScalarQuerySource& source,
                                const StatQueryParams& params) {
  const double tau1 = params.tau / 8.0;
  const uint64_t m = uint64_t(
      std::ceil(params.c_fixed / (tau1 * tau1) * std::log(2.0 / params.delta)));
  return source.batch_mean(m);
}

uint64_t multi_stat_query_cap(size_t n_queries, const StatQueryParams& params,
                              double cap_constant) {
  const double n = double(n_queries);
  return uint64_t(std::ceil(cap_constant * n * n *
                            std::log(n / params.adjusted_delta()) /
                            (params.tau * params.tau * params.rho * params.rho)));
}

MultiStatQResult multi_stat_query(
    size_t n_queries,
    const std::function<ScalarQuerySource&(size_t, const std::vector<double>&)>& provider,
    const StatQueryParams& shared_params, SharedRandomness& rand,
    double cap_constant) {
  MultiStatQResult result;
  const double n = double(n_queries);
  StatQueryParams per_query = shared_params;
  per_query.rho = shared_params.rho / (2.0 * n);
  per_query.delta = shared_params.delta / (2.0 * n);
  const uint64_t cap = multi_stat_query_cap(n_queries, shared_params, cap_constant);

  for (size_t i = 0; i < n_queries; ++i) {
    ScalarQuerySource& q = provider(i, result.answers);
    const uint64_t before = q.consumed();
    double answer;
    if (!result.cap_breached && result.total_samples < cap) {
      SharedRandomness qrand = rand.child(i);
      answer = adaptive_stat_query(q, per_query, qrand);
      result.total_samples += q.consumed() - before;
      if (result.total_samples > cap) result.cap_breached = true;
    } else {
      result.cap_breached = true;
      answer = nonreplicable_stat_query(q, per_query);
      result.total_samples += q.consumed() - before;
    }
    result.answers.push_back(answer);
  }
  return result;
}

}  // namespace replicore
