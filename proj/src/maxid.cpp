#include "replicore/maxid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "replicore/heavyhitters.hpp"
#include "replicore/samplers.hpp"
#include "replicore/statq.hpp"

namespace replicore {

CoinBank::CoinBank(Vec biases, SharedRandomness rng)
    : biases_(std::move(biases)), rng_(std::move(rng)),
      per_coin_flips_(biases_.size(), 0) {
  for (double p : biases_)
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("CoinBank: bias in [0,1]");
}

uint64_t CoinBank::batch_heads(size_t coin, uint64_t m) {
  per_coin_flips_[coin] += m;
  total_flips_ += m;
  return binomial_draw(rng_, m, biases_[coin]);
}

void CoinBank::charge(const std::vector<size_t>& coins, uint64_t flips_each) {
  for (size_t c : coins) per_coin_flips_[c] += flips_each;
  total_flips_ += flips_each * coins.size();
}

namespace {

// Per-distinct-bias binomial tables over a truncated support window.
struct BinomialTable {
  long long lo = 0;  // support window [lo, hi]
  long long hi = 0;
  std::vector<double> log_pmf;
  std::vector<double> log_cdf;

  // log F(k) with the 0/1 plateaus outside the window.
  double lcdf(long long k) const {
    if (k < lo) return -std::numeric_limits<double>::infinity();
    if (k >= hi) return 0.0;
    return log_cdf[size_t(k - lo)];
  }
};

BinomialTable build_table(uint64_t m, double p) {
  BinomialTable t;
  const double md = double(m);
  if (p <= 0.0) {
    t.lo = t.hi = 0;
    t.log_pmf = {0.0};
    t.log_cdf = {0.0};
    return t;
  }
  if (p >= 1.0) {
    t.lo = t.hi = (long long)m;
    t.log_pmf = {0.0};
    t.log_cdf = {0.0};
    return t;
  }
  const double mean = md * p;
  const double sd = std::sqrt(md * p * (1.0 - p));
  const double span = 8.5 * sd + 8.0;
  t.lo = std::max(0LL, (long long)std::floor(mean - span));
  t.hi = std::min((long long)m, (long long)std::ceil(mean + span));
  const size_t w = size_t(t.hi - t.lo + 1);
  t.log_pmf.resize(w);
  t.log_cdf.resize(w);
  const double lp = std::log(p), lq = std::log1p(-p);
  const double lgm = std::lgamma(md + 1.0);
  double cum = 0.0;
  for (size_t i = 0; i < w; ++i) {
    const double k = double(t.lo + (long long)i);
    t.log_pmf[i] = lgm - std::lgamma(k + 1.0) - std::lgamma(md - k + 1.0) +
                   k * lp + (md - k) * lq;
    cum += std::exp(t.log_pmf[i]);
    t.log_cdf[i] = std::log(std::min(cum, 1.0));
  }
  return t;
}

}  // namespace

Vec argmax_win_probabilities(const Vec& biases, uint64_t m) {
  const size_t n = biases.size();
  if (n == 0) throw std::invalid_argument("argmax_win_probabilities: no coins");
  if (n == 1) return Vec{1.0};

  // Group identical biases so the CDF products collapse to powers.
  std::map<double, size_t> class_of_bias;
  std::vector<size_t> coin_class(n);
  std::vector<double> class_bias;
  for (size_t i = 0; i < n; ++i) {
    auto [it, fresh] = class_of_bias.try_emplace(biases[i], class_bias.size());
    if (fresh) class_bias.push_back(biases[i]);
    coin_class[i] = it->second;
  }
  const size_t n_classes = class_bias.size();
  std::vector<BinomialTable> tables(n_classes);
  std::vector<size_t> class_size(n_classes, 0);
  for (size_t c = 0; c < n_classes; ++c) tables[c] = build_table(m, class_bias[c]);
  for (size_t i = 0; i < n; ++i) ++class_size[coin_class[i]];

  Vec q(n, 0.0);
  std::vector<size_t> seen_before(n_classes, 0);  // members with index < i
  for (size_t i = 0; i < n; ++i) {
    const size_t ci = coin_class[i];
    const BinomialTable& ti = tables[ci];
    double total = 0.0;
    for (long long k = ti.lo; k <= ti.hi; ++k) {
      // Coins before i must fall strictly below k, coins after i at or
      // below k (ties go to the lowest index).
      double lt = ti.log_pmf[size_t(k - ti.lo)];
      for (size_t c = 0; c < n_classes && std::isfinite(lt); ++c) {
        size_t less = seen_before[c];
        size_t more = class_size[c] - seen_before[c];
        if (c == ci) --more;  // exclude coin i itself
        if (less > 0) lt += double(less) * tables[c].lcdf(k - 1);
        if (more > 0) lt += double(more) * tables[c].lcdf(k);
      }
      if (std::isfinite(lt)) total += std::exp(lt);
    }
    q[i] = total;
    ++seen_before[ci];
  }
  double sum = 0.0;
  for (double v : q) sum += v;
  if (sum <= 0.0) throw std::runtime_error("argmax_win_probabilities: degenerate");
  for (double& v : q) v /= sum;
  return q;
}

uint64_t find_maximum_flips_per_coin(size_t n_coins, double delta, double eps) {
  return uint64_t(std::ceil(27.0 / (eps * eps) *
                            std::log(2.0 * double(n_coins) / delta)));
}

size_t find_maximum(CoinBank& bank, const std::vector<size_t>& coins, double delta,
                    double eps) {
  if (coins.empty()) throw std::domain_error("find_maximum: empty coin subset");
  const uint64_t m = find_maximum_flips_per_coin(coins.size(), delta, eps);
  size_t best = coins[0];
  uint64_t best_heads = bank.batch_heads(coins[0], m);
  for (size_t j = 1; j < coins.size(); ++j) {
    const uint64_t h = bank.batch_heads(coins[j], m);
    if (h > best_heads) {
      best_heads = h;
      best = coins[j];
    }
  }
  return best;
}

FindMaxSource::FindMaxSource(CoinBank& bank, std::vector<size_t> coins,
                             uint64_t flips_each)
    : bank_(bank), coins_(std::move(coins)), flips_each_(flips_each),
      rng_(bank.fork_stream()) {
  Vec biases(coins_.size());
  for (size_t j = 0; j < coins_.size(); ++j) biases[j] = bank.biases()[coins_[j]];
  win_probs_ = argmax_win_probabilities(biases, flips_each_);
}

size_t FindMaxSource::draw() {
  ++consumed_;
  bank_.charge(coins_, flips_each_);
  double u = rng_.uniform01();
  for (size_t j = 0; j + 1 < win_probs_.size(); ++j) {
    if (u < win_probs_[j]) return j;
    u -= win_probs_[j];
  }
  return win_probs_.size() - 1;
}

std::vector<uint64_t> FindMaxSource::batch_counts(uint64_t m) {
  consumed_ += m;
  bank_.charge(coins_, flips_each_ * m);
  return multinomial_draw(rng_, m, win_probs_);
}

namespace {

KPseudoMaxResult k_pseudo_max_impl(CoinBank& bank, const PseudoMaxParams& params,
                                   SharedRandomness& rand) {
  const size_t n = bank.size();
  const double kd = double(params.k);
  const double delta = params.delta;
  const uint64_t flips_before = bank.total_flips();

  const size_t buckets = size_t(std::max(
      1.0, std::floor(kd / (12.0 * std::log(6.0 * kd / delta)))));

  // Shared-random bucket split: one stream draw per coin.
  std::vector<std::vector<size_t>> bucket_members(buckets);
  for (size_t i = 0; i < n; ++i)
    bucket_members[rand.uniform_int(buckets)].push_back(i);

  const double delta_max = double(buckets) / (18.0 * kd);
  const double v = double(buckets) / (9.0 * kd);
  const double eps_hh = double(buckets) / (18.0 * kd);

  KPseudoMaxResult result;
  double best = -1.0;
  std::vector<std::pair<double, std::vector<size_t>>> kept;  // (estimate, set)
  for (size_t b = 0; b < buckets; ++b) {
    if (bucket_members[b].empty()) continue;
    const uint64_t m_fm = find_maximum_flips_per_coin(bucket_members[b].size(),
                                                      delta_max, params.eps);
    FindMaxSource dist(bank, bucket_members[b], m_fm);
    const HeavyHitterParams hh = HeavyHitterParams::unchecked(
        v, eps_hh, params.rho / (2.0 * double(buckets)),
        delta / (3.0 * double(buckets)));
    SharedRandomness hh_rand = rand.child(2 * b);
    HeavyHitterResult found = adaptive_heavy_hitters(dist, hh, hh_rand);
    if (found.set.empty()) continue;

    std::vector<size_t> global;
    for (size_t atom : found.set) global.push_back(dist.global_index(atom));
    std::sort(global.begin(), global.end());

    // Replicable bias estimate of the lowest-index representative.
    BankCoin coin(bank, global.front());
    CoinQuery query(coin);
    StatQueryParams sq(params.eps, params.rho / (2.0 * double(buckets)),
                       delta / (3.0 * double(buckets)));
    SharedRandomness sq_rand = rand.child(2 * b + 1);
    const double estimate = adaptive_stat_query(query, sq, sq_rand);
    best = std::max(best, estimate);
    kept.emplace_back(estimate, std::move(global));
  }

  result.p_hat_max = best < 0.0 ? 0.0 : best;
  for (auto& [estimate, set] : kept)
    if (estimate >= result.p_hat_max - 5.0 * params.eps)
      result.set.insert(result.set.end(), set.begin(), set.end());
  std::sort(result.set.begin(), result.set.end());
  result.samples_used = bank.total_flips() - flips_before;
  return result;
}

}  // namespace

KPseudoMaxResult k_pseudo_max(CoinBank& bank, const PseudoMaxParams& params,
                              SharedRandomness& rand) {
  if (params.k > bank.size() / 4)
    throw std::invalid_argument("k_pseudo_max: need K <= N/4");
  return k_pseudo_max_impl(bank, params, rand);
}

PseudoMaxResult pseudo_max(CoinBank& bank, const PseudoMaxParams& params,
                           SharedRandomness& rand) {
  const size_t n = bank.size();
  const uint64_t flips_before = bank.total_flips();
  const size_t k_floor = size_t(std::ceil(6.0 * std::log(3.0 / params.delta)));
  const size_t k_eff = std::max(params.k, k_floor);
  const size_t t_coins =
      size_t(std::ceil(std::pow(double(n), 1.0 / 3.0) *
                       std::pow(double(k_eff), 2.0 / 3.0)));

  PseudoMaxParams stage(n, std::min(t_coins, n), params.eps / 10.0,
                        params.rho / 2.0, params.delta / 4.0);
  SharedRandomness stage_rand = rand.child(0);
  // The composition runs the bucketed stage at T, which at desk scale may
  // exceed the public N/4 guard; the internal entry point applies.
  KPseudoMaxResult coarse = k_pseudo_max_impl(bank, stage, stage_rand);

  // Random inclusion set from the shared stream, one draw per coin.
  const double include_p = std::min(1.0, 2.0 * double(k_eff) / double(t_coins));
  std::vector<size_t> included;
  for (size_t i = 0; i < n; ++i)
    if (rand.uniform01() < include_p) included.push_back(i);

  PseudoMaxResult result;
  if (double(included.size()) >
      2.0 * double(k_eff) * double(n) / double(t_coins)) {
    result.aborted = true;
    result.samples_used = bank.total_flips() - flips_before;
    return result;
  }

  double max_included = 0.0;
  std::vector<double> estimates(included.size(), 0.0);
  for (size_t j = 0; j < included.size(); ++j) {
    BankCoin coin(bank, included[j]);
    CoinQuery query(coin);
    StatQueryParams sq(params.eps,
                       params.rho / (2.0 * double(included.size())),
                       params.delta / (4.0 * double(included.size())));
    SharedRandomness sq_rand = rand.child(1000 + included[j]);
    estimates[j] = adaptive_stat_query(query, sq, sq_rand);
    max_included = std::max(max_included, estimates[j]);
  }

  if (coarse.p_hat_max >= max_included - 3.0 * params.eps)
    result.set = coarse.set;
  const double bar = std::max(coarse.p_hat_max, max_included) - params.eps;
  for (size_t j = 0; j < included.size(); ++j)
    if (estimates[j] >= bar) result.set.push_back(included[j]);
  std::sort(result.set.begin(), result.set.end());
  result.set.erase(std::unique(result.set.begin(), result.set.end()),
                   result.set.end());
  result.samples_used = bank.total_flips() - flips_before;
  return result;
}

}  // namespace replicore
