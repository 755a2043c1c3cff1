#pragma once

#include <cstdint>
#include <vector>

#include "replicore/linalg.hpp"
#include "replicore/rng.hpp"
#include "replicore/sources.hpp"

namespace replicore {

// A bank of Bernoulli coins sharing one sample stream, with a per-coin flip
// ledger. Algorithms only touch sampling entry points; the true biases stay
// inside, exactly as with a single BernoulliCoin.
class CoinBank {
 public:
  CoinBank(Vec biases, SharedRandomness rng);

  size_t size() const { return biases_.size(); }
  uint64_t batch_heads(size_t coin, uint64_t m);
  uint64_t total_flips() const { return total_flips_; }
  uint64_t coin_flips(size_t coin) const { return per_coin_flips_[coin]; }

  // Internal: exact-law simulation support.
  const Vec& biases() const { return biases_; }
  SharedRandomness fork_stream() { return rng_.child(++forks_); }
  void charge(const std::vector<size_t>& coins, uint64_t flips_each);

 private:
  Vec biases_;
  SharedRandomness rng_;
  std::vector<uint64_t> per_coin_flips_;
  uint64_t total_flips_ = 0;
  uint64_t forks_ = 0;
};

// View of one bank coin as a CoinSource.
class BankCoin final : public CoinSource {
 public:
  BankCoin(CoinBank& bank, size_t coin) : bank_(bank), coin_(coin) {}
  bool flip() override {
    ++consumed_;
    return bank_.batch_heads(coin_, 1) == 1;
  }
  uint64_t batch_heads(uint64_t m) override {
    consumed_ += m;
    return bank_.batch_heads(coin_, m);
  }

 private:
  CoinBank& bank_;
  size_t coin_;
};

// Win probabilities of the empirical argmax (ties to the lowest index) over
// independent Binomial(m, p_i) head counts. Exact up to floating truncation
// of negligible binomial tails.
Vec argmax_win_probabilities(const Vec& biases, uint64_t m);

// Empirical-argmax pick over the given coins: m = ceil(27/eps^2 ln(2n/delta))
// flips each, ties to the lowest index. Returns the global coin index.
size_t find_maximum(CoinBank& bank, const std::vector<size_t>& coins, double delta,
                    double eps);
uint64_t find_maximum_flips_per_coin(size_t n_coins, double delta, double eps);

// The output distribution of find_maximum over a fixed coin subset, as a
// sampleable source: every draw accounts for a full fresh find_maximum run
// (|coins| * m flips) and lands by the exact win law.
class FindMaxSource final : public DiscreteSource {
 public:
  FindMaxSource(CoinBank& bank, std::vector<size_t> coins, uint64_t flips_each);
  size_t domain_size() const override { return coins_.size(); }
  size_t draw() override;
  std::vector<uint64_t> batch_counts(uint64_t m) override;
  size_t global_index(size_t atom) const { return coins_[atom]; }

 private:
  CoinBank& bank_;
  std::vector<size_t> coins_;
  uint64_t flips_each_;
  Vec win_probs_;
  SharedRandomness rng_;
};

struct PseudoMaxParams {
  size_t n;
  size_t k;
  double eps;
  double rho;
  double delta;

  PseudoMaxParams(size_t n_, size_t k_, double eps_, double rho_, double delta_)
      : n(n_), k(k_), eps(eps_), rho(rho_), delta(delta_) {
    if (!(1 <= k && k <= n))
      throw std::invalid_argument("PseudoMaxParams: need 1 <= K <= N");
    if (!(eps > 0.0 && eps < 1.0))
      throw std::invalid_argument("PseudoMaxParams: eps in (0,1)");
    if (!(rho > 0.0 && rho < 1.0 && delta > 0.0 && delta < 0.5))
      throw std::invalid_argument("PseudoMaxParams: rho in (0,1), delta in (0,1/2)");
  }
};

struct KPseudoMaxResult {
  std::vector<size_t> set;  // sorted global indices
  double p_hat_max = 0.0;
  uint64_t samples_used = 0;
};

// Bucketed identification: shared-random bucket split, per-bucket heavy
// hitters over the find_maximum output distribution, replicable bias
// estimate per surviving bucket, keep buckets within 5 eps of the best.
// Requires K <= N/4.
KPseudoMaxResult k_pseudo_max(CoinBank& bank, const PseudoMaxParams& params,
                              SharedRandomness& rand);

struct PseudoMaxResult {
  std::vector<size_t> set;
  uint64_t samples_used = 0;
  bool aborted = false;
};

// Full pipeline: K floored at ceil(6 ln(3/delta)), bucketed pass at
// (T = ceil(N^{1/3} K^{2/3}), eps/10), random inclusion set at rate 2K/T
// with the listing's size abort, per-included-coin bias estimates, and the
// 3 eps / eps assembly rules.
PseudoMaxResult pseudo_max(CoinBank& bank, const PseudoMaxParams& params,
                           SharedRandomness& rand);

}  // namespace replicore
