#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "replicore/rng.hpp"
#include "replicore/sources.hpp"

namespace replicore {

struct HeavyHitterParams {
  double v;
  double eps;
  double rho;
  double delta;

  HeavyHitterParams(double v_, double eps_, double rho_, double delta_)
      : v(v_), eps(eps_), rho(rho_), delta(delta_) {
    if (!(v > 0.0 && v < 1.0))
      throw std::invalid_argument("HeavyHitterParams: v in (0,1)");
    if (!(eps > 0.0 && 4.0 * eps < v))
      throw std::invalid_argument("HeavyHitterParams: need 0 < 4*eps < v");
    if (!(rho > 0.0 && rho < 1.0))
      throw std::invalid_argument("HeavyHitterParams: rho in (0,1)");
    if (!(delta > 0.0 && 4.0 * delta < rho))
      throw std::invalid_argument("HeavyHitterParams: need 4*delta < rho");
  }

  // The pseudo-maximum machinery runs heavy hitters at eps = v/2, outside
  // the 4*eps < v constraint above; this factory skips that check
  // (v - eps > 0 still required).
  static HeavyHitterParams unchecked(double v, double eps, double rho, double delta);

  double adjusted_delta() const { return std::min(delta, rho / 4.0); }

 private:
  HeavyHitterParams() : v(0), eps(0), rho(0), delta(0) {}
};

struct HeavyHitterResult {
  std::vector<size_t> set;   // atom indices, sorted
  double effective_threshold = 0.0;
  uint64_t samples_used = 0;
  int terminated_round = -1;  // -1 means the fixed-sample fallback answered
};

// Sequential heavy hitters: candidate pass, random threshold, rounds of
// per-atom brackets that shrink until the threshold clears every bracket.
// Falls back to the fixed-sample variant at (rho/2, delta/8) if no round
// terminates.
HeavyHitterResult adaptive_heavy_hitters(DiscreteSource& source,
                                         const HeavyHitterParams& params,
                                         SharedRandomness& rand);

// Fixed-sample heavy hitters: one batch sized by the
// Bretagnolle-Huber-Carol inequality so the total estimation error over the
// candidate set stays below rho*eps/8, then a random threshold on
// [v - eps, v + eps].
HeavyHitterResult fixed_heavy_hitters(DiscreteSource& source,
                                      const HeavyHitterParams& params,
                                      SharedRandomness& rand);

uint64_t heavy_hitters_candidate_pass(const HeavyHitterParams& params);

struct AmplifyOptions {
  double c_strings = 3.0;  // k = ceil(c * log2(1/rho)) random strings
  // delta' = rho^2 * delta / (8 (1 + log2(1/rho))^3) unless overridden
  double delta_inner = 0.0;
};

struct AmplifyResult {
  size_t outcome = 0;
  uint64_t outcome_draws = 0;  // runs of the inner algorithm
};

// Builds the outcome distribution of the inner algorithm under a pinned
// internal string: each draw must rerun the inner algorithm on fresh
// samples. The factory owns the caller's sample-side randomness; the string
// seeds come from the shared stream so paired executions amplify the same
// branches.
using BranchSourceFactory =
    std::function<std::unique_ptr<DiscreteSource>(uint64_t string_seed,
                                                  size_t branch_index)>;

// Wraps a black-box algorithm (sample stream, internal string) -> outcome
// index into a BranchSourceFactory; sample_stream_seed feeds per-draw fresh
// sample seeds.
BranchSourceFactory black_box_branch(
    std::function<size_t(SharedRandomness samples, SharedRandomness internal)> inner,
    size_t outcome_space, uint64_t sample_stream_seed);

// Finds 0.8-heavy hitters of the inner algorithm's outcome distribution for
// each of k random strings and returns a random member of the union (or a
// sampled outcome when every set is empty).
AmplifyResult adaptive_amplify(const BranchSourceFactory& branch,
                               double rho, double delta, SharedRandomness& rand,
                               const AmplifyOptions& options = {});

}  // namespace replicore
