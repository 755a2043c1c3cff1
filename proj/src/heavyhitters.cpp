#include "replicore/heavyhitters.hpp"

#include <cmath>

namespace replicore {

HeavyHitterParams HeavyHitterParams::unchecked(double v, double eps, double rho,
                                               double delta) {
  if (!(v > 0.0 && v < 1.0 && eps > 0.0 && v - eps > 0.0))
    throw std::invalid_argument("HeavyHitterParams: need 0 < v - eps");
  if (!(rho > 0.0 && rho < 1.0 && delta > 0.0 && delta < 0.5))
    throw std::invalid_argument("HeavyHitterParams: rho, delta out of range");
  HeavyHitterParams p;
  p.v = v;
  p.eps = eps;
  p.rho = rho;
  p.delta = delta;
  return p;
}

uint64_t heavy_hitters_candidate_pass(const HeavyHitterParams& params) {
  const double delta = params.adjusted_delta();
  const double floor_mass = params.v - params.eps;
  return uint64_t(
      std::ceil(std::log(8.0 / (delta * floor_mass)) / floor_mass));
}

namespace {

std::vector<size_t> support_of(const std::vector<uint64_t>& counts) {
  std::vector<size_t> atoms;
  for (size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) atoms.push_back(i);
  return atoms;
}

}  // namespace

HeavyHitterResult fixed_heavy_hitters(DiscreteSource& source,
                                      const HeavyHitterParams& params,
                                      SharedRandomness& rand) {
  const double delta = params.adjusted_delta();
  HeavyHitterResult result;

  const uint64_t m0 = heavy_hitters_candidate_pass(params);
  const std::vector<size_t> candidates = support_of(source.batch_counts(m0));
  result.samples_used += m0;

  // Batch sized so that sum_x |p_hat_x - D(x)| <= rho*eps/8 with probability
  // 1 - delta over the (k+1)-cell multinomial, per Bretagnolle-Huber-Carol.
  const double k = double(candidates.size()) + 1.0;
  const double err = params.rho * params.eps / 8.0;
  const uint64_t m = uint64_t(std::ceil(
      2.0 * (k * std::log(2.0) + std::log(1.0 / delta)) / (err * err)));
  const std::vector<uint64_t> counts = source.batch_counts(m);
  result.samples_used += m;

  result.effective_threshold =
      draw_uniform_interval(rand, params.v - params.eps, params.v + params.eps);
  for (size_t x : candidates)
    if (double(counts[x]) / double(m) > result.effective_threshold)
      result.set.push_back(x);
  return result;
}

HeavyHitterResult adaptive_heavy_hitters(DiscreteSource& source,
                                         const HeavyHitterParams& params,
                                         SharedRandomness& rand) {
  const double delta = params.adjusted_delta();
  const double eps = params.eps;
  HeavyHitterResult result;

  const uint64_t m0 = heavy_hitters_candidate_pass(params);
  const std::vector<size_t> candidates = support_of(source.batch_counts(m0));
  result.samples_used += m0;

  result.effective_threshold =
      draw_uniform_interval(rand, params.v - eps / 2.0, params.v + eps / 2.0);
  const double v_r = result.effective_threshold;

  const double m0d = double(m0);
  const int rounds =
      int(std::ceil(7.0 + std::log2(std::sqrt(m0d) / params.rho)));
  const double log_term = std::log(4.0 * (m0d + 1.0) * rounds / delta);

  for (int t = 1; t <= rounds; ++t) {
    const double eps_t = eps / std::pow(2.0, t + 2);
    const uint64_t m_t = uint64_t(std::ceil(3.0 / (eps_t * eps_t) * log_term));
    const std::vector<uint64_t> counts = source.batch_counts(m_t);
    result.samples_used += m_t;

    bool clear = true;
    for (size_t x : candidates) {
      const double p_hat = double(counts[x]) / double(m_t);
      const double eta = std::min(
          eps_t, 2.0 * std::sqrt(p_hat / double(m_t) * log_term));
      if (v_r > p_hat - 2.0 * eta && v_r < p_hat + 2.0 * eta) {
        clear = false;
        break;
      }
    }
    if (clear) {
      for (size_t x : candidates)
        if (double(counts[x]) / double(m_t) > v_r) result.set.push_back(x);
      result.terminated_round = t;
      return result;
    }
  }

  HeavyHitterParams fallback = HeavyHitterParams::unchecked(
      params.v, params.eps, params.rho / 2.0, params.delta / 8.0);
  HeavyHitterResult fb = fixed_heavy_hitters(source, fallback, rand);
  fb.samples_used += result.samples_used;
  fb.terminated_round = -1;
  return fb;
}

BranchSourceFactory black_box_branch(
    std::function<size_t(SharedRandomness, SharedRandomness)> inner,
    size_t outcome_space, uint64_t sample_stream_seed) {
  class BlackBoxSource final : public DiscreteSource {
   public:
    BlackBoxSource(std::function<size_t(SharedRandomness, SharedRandomness)> fn,
                   size_t space, uint64_t string_seed, SharedRandomness seeder)
        : fn_(std::move(fn)), space_(space), string_seed_(string_seed),
          seeder_(std::move(seeder)) {}
    size_t domain_size() const override { return space_; }
    size_t draw() override {
      ++consumed_;
      return fn_(seeder_.child(consumed_), SharedRandomness(string_seed_));
    }

   private:
    std::function<size_t(SharedRandomness, SharedRandomness)> fn_;
    size_t space_;
    uint64_t string_seed_;
    SharedRandomness seeder_;
  };
  return [inner = std::move(inner), outcome_space, sample_stream_seed](
             uint64_t string_seed, size_t branch) {
    SharedRandomness seeder =
        SharedRandomness(sample_stream_seed).child(branch);
    return std::unique_ptr<DiscreteSource>(new BlackBoxSource(
        inner, outcome_space, string_seed, std::move(seeder)));
  };
}

AmplifyResult adaptive_amplify(const BranchSourceFactory& branch, double rho,
                               double delta, SharedRandomness& rand,
                               const AmplifyOptions& options) {
  if (!(rho > 0.0 && rho < 1.0 && delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("adaptive_amplify: rho, delta in (0,1)");
  const double log_rho = std::log2(1.0 / rho);
  const size_t k = size_t(std::max(1.0, std::ceil(options.c_strings * log_rho)));
  const double rho_inner = rho / (2.0 * double(k));
  const double delta_inner =
      options.delta_inner > 0.0
          ? options.delta_inner
          : rho * rho * delta / (8.0 * std::pow(1.0 + log_rho, 3.0));

  AmplifyResult result;
  std::vector<size_t> pool;
  size_t sampled_outcome = 0;
  const HeavyHitterParams hh_params = HeavyHitterParams::unchecked(
      0.8, 0.1, rho_inner, std::min(delta_inner, rho_inner / 4.0 * 0.99));
  for (size_t i = 0; i < k; ++i) {
    const uint64_t string_seed = rand.next_u64();
    std::unique_ptr<DiscreteSource> src = branch(string_seed, i);
    SharedRandomness hh_rand = rand.child(2000 + i);
    HeavyHitterResult hh = adaptive_heavy_hitters(*src, hh_params, hh_rand);
    result.outcome_draws += src->consumed();
    if (pool.empty() && hh.set.empty()) {
      // keep one genuinely sampled outcome in case every set is empty
      sampled_outcome = src->draw();
      ++result.outcome_draws;
    }
    for (size_t y : hh.set) pool.push_back(y);
  }

  if (pool.empty()) {
    result.outcome = sampled_outcome;
    return result;
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  result.outcome = pool[rand.uniform_int(pool.size())];
  return result;
}

}  // namespace replicore
