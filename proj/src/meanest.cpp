#include "replicore/meanest.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replicore {

namespace {

int mom_batches(size_t n, double delta) {
  return int(std::ceil(std::log2(double(n) / delta)));
}

Vec batch_means_median(std::vector<Vec>& means) {
  const size_t n = means.front().size();
  const size_t t = means.size();
  Vec out(n);
  std::vector<double> column(t);
  for (size_t j = 0; j < n; ++j) {
    for (size_t b = 0; b < t; ++b) column[b] = means[b][j];
    // lower median
    const size_t mid = (t - 1) / 2;
    std::nth_element(column.begin(), column.begin() + mid, column.end());
    out[j] = column[mid];
  }
  return out;
}

}  // namespace

Vec median_of_means(VectorSource& source, uint64_t m, double delta) {
  const int t = mom_batches(source.dim(), delta);
  const uint64_t batch = m / uint64_t(t);
  if (batch < 1)
    throw std::invalid_argument("median_of_means: budget below one sample per batch");
  std::vector<Vec> means;
  means.reserve(size_t(t));
  for (int b = 0; b < t; ++b) means.push_back(source.batch_mean(batch));
  return batch_means_median(means);
}

uint64_t coarse_round_samples(size_t n, double k_width, double rho, double delta,
                              double c_budget) {
  const double ratio = double(n) / (k_width * rho);
  return uint64_t(std::ceil(c_budget * ratio * ratio * std::log(double(n) / delta)));
}

Vec coarse_round(VectorSource& source, double k_width, double rho, double delta,
                 SharedRandomness& rand, double c_budget) {
  const size_t n = source.dim();
  if (!(k_width > 0.0))
    throw std::invalid_argument("coarse_round: need K > 0");
  const uint64_t m = coarse_round_samples(n, k_width, rho, delta, c_budget);
  const Vec mu = median_of_means(source, m, delta);
  // One shared threshold draw per coordinate regardless of which cell the
  // estimate landed in, so paired runs stay stream-aligned.
  Vec out(n);
  for (size_t i = 0; i < n; ++i) {
    const double cell = std::floor(mu[i] / k_width);
    const double frac = mu[i] / k_width - cell;
    const double u = rand.uniform01();
    out[i] = (frac < u ? cell : cell + 1.0) * k_width;
  }
  return out;
}

Vec l2_core_estimate(VectorSource& source, uint64_t m, double delta) {
  const size_t n = source.dim();
  const int t = int(std::ceil(8.0 * std::log(1.0 / delta)));
  const uint64_t batch = m / uint64_t(t);
  if (batch < 1)
    throw std::invalid_argument("l2_core_estimate: budget below one sample per batch");
  std::vector<Vec> means;
  means.reserve(size_t(t));
  for (int b = 0; b < t; ++b) means.push_back(source.batch_mean(batch));

  // Weiszfeld iteration from the coordinate-wise median.
  Vec x = batch_means_median(means);
  for (int iter = 0; iter < 10000; ++iter) {
    Vec next(n, 0.0);
    double weight_sum = 0.0;
    bool at_point = false;
    for (const Vec& y : means) {
      const double d = dist2(x, y);
      if (d < 1e-30) {
        at_point = true;
        continue;
      }
      const double w = 1.0 / d;
      weight_sum += w;
      for (size_t j = 0; j < n; ++j) next[j] += w * y[j];
    }
    if (weight_sum == 0.0) break;
    for (size_t j = 0; j < n; ++j) next[j] /= weight_sum;
    if (at_point) {
      // standard Weiszfeld guard: stay put when pinned on a data point that
      // already minimizes the objective
      double pull = 0.0;
      for (const Vec& y : means) {
        const double d = dist2(x, y);
        if (d >= 1e-30) pull += 1.0;
      }
      if (pull == 0.0) break;
    }
    const double move = dist2(next, x);
    x = next;
    if (move < 1e-10) break;
  }
  return x;
}

uint64_t mean_l2_core_budget(const MeanEstParams& params) {
  const double nd = double(params.n);
  const double a = params.tiling->surface_area;
  return uint64_t(std::ceil(params.c_budget * (nd + std::log(1.0 / params.delta)) *
                            a * a /
                            (nd * params.accuracy * params.accuracy * params.rho *
                             params.rho)));
}

uint64_t mean_linf_core_budget(const MeanEstParams& params) {
  const double nd = double(params.n);
  const double a = params.tiling->surface_area;
  const double lg = std::log(nd / params.delta);
  return uint64_t(std::ceil(params.c_budget * a * a * lg * lg * lg /
                            (params.accuracy * params.accuracy * params.rho *
                             params.rho * nd)));
}

namespace {

MeanEstResult mean_pipeline(VectorSource& source, const MeanEstParams& params,
                            SharedRandomness& rand, uint64_t core_budget,
                            double rounding_eps, bool linf_core) {
  const size_t n = params.n;
  MeanEstResult result;
  const uint64_t before = source.vector_draws();

  SharedRandomness coarse_rand = rand.child(0);
  result.coarse_center =
      coarse_round(source, double(n), params.rho, params.delta, coarse_rand,
                   params.c_budget);

  Vec negated(result.coarse_center);
  for (double& v : negated) v = -v;
  ShiftedSource recentered(source, negated);

  Vec core = linf_core ? median_of_means(recentered, core_budget, params.delta)
                       : l2_core_estimate(recentered, core_budget, params.delta);

  // accuracy eps = sqrt(N) is allowed here but the rounding stage needs a
  // strictly interior value
  const double max_round_eps =
      std::nextafter(std::sqrt(double(n)), 0.0);
  RoundingParams rp(std::min(rounding_eps, max_round_eps), params.rho,
                    params.c_q);
  SharedRandomness round_rand = rand.child(2);
  if (norm_inf(core) <= double(n)) {
    result.rounded_offset = replicable_round(core, *params.tiling, rp, round_rand);
  } else {
    // Coarse localization failed (probability <= delta); fall back to the
    // unrounded core estimate rather than aborting the run.
    result.rounded_offset = core;
  }
  result.estimate = add(result.coarse_center, result.rounded_offset);
  result.vector_samples = source.vector_draws() - before;
  return result;
}

}  // namespace

MeanEstResult replicable_mean_l2(VectorSource& source, const MeanEstParams& params,
                                 SharedRandomness& rand) {
  if (!(params.accuracy <= std::sqrt(double(params.n))))
    throw std::invalid_argument("replicable_mean_l2: eps in (0, sqrt(N)]");
  return mean_pipeline(source, params, rand, mean_l2_core_budget(params),
                       params.accuracy, /*linf_core=*/false);
}

MeanEstResult replicable_mean_linf(VectorSource& source, const MeanEstParams& params,
                                   SharedRandomness& rand) {
  if (!(params.accuracy < 1.0))
    throw std::invalid_argument("replicable_mean_linf: gamma in (0, 1)");
  const double rounding_eps = std::sqrt(double(params.n)) * params.accuracy /
                              std::log(double(params.n) / params.delta);
  return mean_pipeline(source, params, rand, mean_linf_core_budget(params),
                       rounding_eps, /*linf_core=*/true);
}

}  // namespace replicore
