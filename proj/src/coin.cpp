#include "replicore/coin.hpp"

#include <cmath>

#include "replicore/statq.hpp"

namespace replicore {

int adaptive_rounds(double rho) {
  return int(std::ceil(4.0 + std::log2(1.0 / rho)));
}

uint64_t coin_round_batch(const CoinProblemParams& params, int t) {
  const int rounds = adaptive_rounds(params.rho);
  const double delta = params.adjusted_delta();
  const double eps_t = params.gap() / std::pow(2.0, t + 2);
  return uint64_t(std::ceil(params.c_batch * params.q0 / (eps_t * eps_t) *
                            std::log(2.0 * rounds / delta)));
}

uint64_t coin_worst_case_samples(const CoinProblemParams& params) {
  uint64_t total = 0;
  const int rounds = adaptive_rounds(params.rho);
  for (int t = 1; t <= rounds; ++t) total += coin_round_batch(params, t);
  return total;
}

TestOutcome adaptive_coin_test(CoinSource& source, const CoinProblemParams& params,
                               SharedRandomness& rand, uint64_t sample_budget) {
  const double eps = params.gap();
  const double b = params.rho * eps / 16.0;
  const double r = draw_uniform_interval(rand, params.p0 + b, params.q0 - b);
  const int rounds = adaptive_rounds(params.rho);

  TestOutcome out;
  for (int t = 1; t <= rounds; ++t) {
    const double eps_t = eps / std::pow(2.0, t + 2);
    const uint64_t m_t = coin_round_batch(params, t);
    if (m_t > sample_budget - out.samples_used) {
      out.budget_exhausted = true;
      return out;
    }
    const double p_hat = double(source.batch_heads(m_t)) / double(m_t);
    out.samples_used += m_t;
    const double lo = p_hat - eps_t;
    const double hi = p_hat + eps_t;
    if (std::min(std::fabs(lo - r), std::fabs(hi - r)) > eps_t) {
      out.verdict = p_hat > r ? Verdict::Accept : Verdict::Reject;
      out.terminated_round = t;
      return out;
    }
  }
  out.verdict = Verdict::Reject;
  out.terminated_round = -1;
  return out;
}

uint64_t simple_coin_samples(const CoinProblemParams& params) {
  const double tau = params.gap() / 3.0;
  StatQueryParams sq(tau, params.rho, params.delta);
  return fixed_stat_query_samples(sq);
}

TestOutcome simple_coin_test(CoinSource& source, const CoinProblemParams& params,
                             SharedRandomness& rand) {
  const double tau = params.gap() / 3.0;
  StatQueryParams sq(tau, params.rho, params.delta);
  const uint64_t before = source.consumed();
  CoinQuery query(source);
  const double rounded = fixed_stat_query(query, sq, rand);
  TestOutcome out;
  out.samples_used = source.consumed() - before;
  out.verdict =
      rounded > (params.p0 + params.q0) / 2.0 ? Verdict::Accept : Verdict::Reject;
  return out;
}

uint64_t nonreplicable_coin_samples(double p0, double q0, double delta) {
  const double eps = q0 - p0;
  return uint64_t(std::ceil(27.0 * q0 / (eps * eps) * std::log(2.0 / delta)));
}

TestOutcome nonreplicable_coin_test(CoinSource& source, double p0, double q0,
                                    double delta) {
  const uint64_t m = nonreplicable_coin_samples(p0, q0, delta);
  const double p_hat = double(source.batch_heads(m)) / double(m);
  TestOutcome out;
  out.samples_used = m;
  out.verdict = p_hat >= (p0 + q0) / 2.0 ? Verdict::Accept : Verdict::Reject;
  return out;
}

}  // namespace replicore
