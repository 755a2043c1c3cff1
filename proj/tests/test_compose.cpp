#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "replicore/compose.hpp"

using namespace replicore;

namespace {

std::vector<std::unique_ptr<BernoulliCoin>> make_coins(const Vec& biases,
                                                       SharedRandomness seeder,
                                                       std::vector<CoinSource*>& out) {
  std::vector<std::unique_ptr<BernoulliCoin>> coins;
  for (size_t i = 0; i < biases.size(); ++i) {
    coins.push_back(std::make_unique<BernoulliCoin>(biases[i], seeder.child(i)));
    out.push_back(coins.back().get());
  }
  return coins;
}

}  // namespace

TEST_CASE("compose: single task with infinite cap passes through") {
  std::vector<std::function<TaskResult<int>(uint64_t)>> tasks;
  tasks.push_back([](uint64_t) { return TaskResult<int>{41, 10}; });
  CompositionBudget budget;
  const std::function<TaskResult<int>(size_t)> fallback = [](size_t) {
    return TaskResult<int>{-1, 0};
  };
  const int out = compose_adaptive<int>(
      tasks, [](std::vector<int>& t) { return t.at(0) + 1; }, budget, fallback);
  CHECK(out == 42);
  CHECK(!budget.cap_breached);
}

TEST_CASE("compose: zero cap always invokes the fallback") {
  std::vector<std::function<TaskResult<int>(uint64_t)>> tasks;
  tasks.push_back([](uint64_t) { return TaskResult<int>{1, 5}; });
  tasks.push_back([](uint64_t) { return TaskResult<int>{2, 5}; });
  CompositionBudget budget;
  budget.sample_cap = 0;
  const std::function<TaskResult<int>(size_t)> fallback = [](size_t i) {
    return TaskResult<int>{int(100 + i), 1};
  };
  const int out = compose_adaptive<int>(
      tasks, [](std::vector<int>& t) { return t.at(0) + t.at(1); }, budget,
      fallback);
  CHECK(budget.cap_breached);
  CHECK(out == 201);
}

TEST_CASE("n-coin: degenerate biases give full or empty sets") {
  const CoinProblemParams params(0.3, 0.6, 0.3, 0.05);
  int good_zero = 0, good_one = 0;
  const int trials = 300;
  for (int t = 0; t < trials; ++t) {
    SharedRandomness root{uint64_t(t)};
    std::vector<CoinSource*> zeros, ones;
    auto keep0 = make_coins(Vec(8, 0.0), root.child(1), zeros);
    auto keep1 = make_coins(Vec(8, 1.0), root.child(2), ones);
    SharedRandomness i0 = root.child(0), i1 = root.child(3);
    if (n_coin_test(zeros, params, i0).accepted.empty()) ++good_zero;
    if (n_coin_test(ones, params, i1).accepted.size() == 8) ++good_one;
  }
  CHECK(double(good_zero) / trials >= 0.95);
  CHECK(double(good_one) / trials >= 0.95);
}

TEST_CASE("n-coin: sample accounting is conserved") {
  const CoinProblemParams params(0.3, 0.6, 0.3, 0.05);
  SharedRandomness root(5);
  std::vector<CoinSource*> sources;
  Vec biases(16);
  for (size_t i = 0; i < 16; ++i) biases[i] = 0.3 + 0.3 * (double(i) / 15.0);
  auto keep = make_coins(biases, root.child(1), sources);
  SharedRandomness internal = root.child(0);
  const NCoinOutcome out = n_coin_test(sources, params, internal);
  uint64_t sum = 0;
  for (uint64_t s : out.samples_per_coin) sum += s;
  CHECK(sum == out.total_samples);
  uint64_t consumed = 0;
  for (CoinSource* s : sources) consumed += s->consumed();
  CHECK(consumed == out.total_samples);
}

TEST_CASE("n-coin paired disagreement within budget at N=16") {
  const CoinProblemParams params(0.3, 0.6, 0.3, 0.05);
  int disagree = 0;
  const int trials = 5000;
  SharedRandomness rand(7);
  for (int t = 0; t < trials; ++t) {
    SharedRandomness root = rand.child(uint64_t(t));
    SharedRandomness inst = root.child(3);
    Vec biases(16);
    for (auto& b : biases) b = draw_uniform_interval(inst, 0.3, 0.6);
    const uint64_t iseed = root.child(0).seed();
    std::vector<CoinSource*> sa, sb;
    auto ka = make_coins(biases, root.child(1), sa);
    auto kb = make_coins(biases, root.child(2), sb);
    SharedRandomness ia(iseed), ib(iseed);
    if (n_coin_test(sa, params, ia).accepted != n_coin_test(sb, params, ib).accepted)
      ++disagree;
  }
  const double sigma = std::sqrt(0.3 * 0.7 / trials);
  CHECK(double(disagree) / trials <= 0.3 + 3.0 * sigma);
}

TEST_CASE("approximate tester validates the slack range") {
  const CoinProblemParams params(0.3, 0.6, 0.2, 0.05);
  SharedRandomness root(1);
  std::vector<CoinSource*> sources;
  auto keep = make_coins(Vec(4, 0.5), root.child(1), sources);
  SharedRandomness internal = root.child(0);
  CHECK_THROWS_AS(approx_n_coin_test(sources, params, 0, internal),
                  std::invalid_argument);
  CHECK_THROWS_AS(approx_n_coin_test(sources, params, 5, internal),
                  std::invalid_argument);
}

TEST_CASE("(rho, R) slack: strict replication implies approximate") {
  // any paired run with equal sets trivially has |symdiff| < R for R > 1
  const CoinProblemParams params(0.3, 0.6, 0.2, 0.05);
  SharedRandomness rand(13);
  int strict_equal = 0, within_slack = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    SharedRandomness root = rand.child(uint64_t(t));
    SharedRandomness inst = root.child(3);
    Vec biases(8);
    for (auto& b : biases) b = draw_uniform_interval(inst, 0.3, 0.6);
    const uint64_t iseed = root.child(0).seed();
    std::vector<CoinSource*> sa, sb;
    auto ka = make_coins(biases, root.child(1), sa);
    auto kb = make_coins(biases, root.child(2), sb);
    SharedRandomness ia(iseed), ib(iseed);
    const auto a = approx_n_coin_test(sa, params, 2, ia).accepted;
    const auto b = approx_n_coin_test(sb, params, 2, ib).accepted;
    std::vector<size_t> diff;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(diff));
    if (a == b) ++strict_equal;
    if (diff.size() < 2) ++within_slack;
  }
  CHECK(within_slack >= strict_equal);
}

TEST_CASE("bias shift solves the two defining equations exactly") {
  // worked instance: a = 0.4, b = 0.5 gives t = 0.275, h = 0.775
  const BiasShift s = bias_shift(0.4, 0.5);
  CHECK(s.t == doctest::Approx(0.275).epsilon(1e-14));
  CHECK(s.h == doctest::Approx(0.775).epsilon(1e-14));
  CHECK(0.4 * s.h + 0.6 * s.t == doctest::Approx(0.475).epsilon(1e-14));
  CHECK(0.5 * s.h + 0.5 * s.t == doctest::Approx(0.525).epsilon(1e-14));

  SharedRandomness rand(3);
  for (int i = 0; i < 100; ++i) {
    const double w = 0.0625;
    const double a = draw_uniform_interval(rand, 0.0, (1.0 - w) / 2.0);
    const double b = a + w;
    const BiasShift bs = bias_shift(a, b);
    CHECK(bs.h > 0.0);
    CHECK(bs.h < 1.0);
    CHECK(bs.t > 0.0);
    CHECK(bs.t < 1.0);
    CHECK(std::fabs(a * bs.h + (1 - a) * bs.t - (0.5 - w / 4)) <= 1e-12);
    CHECK(std::fabs(b * bs.h + (1 - b) * bs.t - (0.5 + w / 4)) <= 1e-12);
  }
}

TEST_CASE("learner: all-zero biases come back near zero") {
  int ok = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    SharedRandomness root{uint64_t(t)};
    std::vector<CoinSource*> sources;
    auto keep = make_coins(Vec(4, 0.0), root.child(1), sources);
    SharedRandomness internal = root.child(0);
    const Vec est = linf_learn_by_search(sources, 0.125, 0.2, 0.05, internal,
                                         root.child(2));
    if (norm_inf(est) <= 0.125) ++ok;
  }
  CHECK(double(ok) / trials >= 0.9);
}

TEST_CASE("learner accuracy at N=8 over random biases") {
  int ok = 0;
  const int trials = 1000;
  SharedRandomness rand(23);
  for (int t = 0; t < trials; ++t) {
    SharedRandomness root = rand.child(uint64_t(t));
    SharedRandomness inst = root.child(3);
    Vec biases(8);
    for (auto& b : biases) b = inst.uniform01();
    std::vector<CoinSource*> sources;
    auto keep = make_coins(biases, root.child(1), sources);
    SharedRandomness internal = root.child(0);
    const Vec est = linf_learn_by_search(sources, 0.125, 0.2, 0.05, internal,
                                         root.child(2));
    if (norm_inf(sub(est, biases)) <= 0.125) ++ok;
  }
  CHECK(double(ok) / trials >= 1.0 - 3.0 * 0.05);
}
