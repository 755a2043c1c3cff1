#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "replicore/rng.hpp"

namespace replicore {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval at 95% unless another z is given.
WilsonInterval wilson_interval(uint64_t successes, uint64_t trials,
                               double z = 1.959963984540054);

struct SampleStats {
  double mean = 0.0;
  uint64_t p50 = 0;
  uint64_t p95 = 0;
  uint64_t max = 0;
};

// One run of an algorithm inside a paired trial.
struct PairedOutcome {
  std::string key;                // canonical output encoding, exact equality
  std::vector<size_t> out_set;    // set-valued outputs, for slack comparison
  bool has_set = false;
  bool correct = true;
  bool cap_breached = false;
  uint64_t samples = 0;
  uint64_t internal_position = 0;
  uint64_t internal_digest = 0;
};

// Runs the algorithm once on a concrete instance: fresh sample seed,
// caller-provided internal stream.
using InstanceRunner =
    std::function<PairedOutcome(uint64_t sample_seed, SharedRandomness& internal)>;
// Draws a concrete instance (bias vector, distribution, ...) from the
// instance stream and binds the algorithm to it.
using InstanceGenerator = std::function<InstanceRunner(SharedRandomness& instance_rng)>;

struct PairedTrialConfig {
  std::string algorithm;
  InstanceGenerator make_instance;
  uint64_t trials = 1000;
  uint64_t seed = 1;
  size_t slack_r = 1;  // paired outputs count as equal if |symmetric diff| < R
  double target_rho = 0.0;
  double target_delta = 0.0;
  double c_slack = 3.0;
  int workers = 0;  // 0 = hardware concurrency
  std::map<std::string, double> constants;
};

struct TrialReport {
  std::string algorithm;
  uint64_t trials = 0;
  uint64_t seed = 0;
  size_t slack_r = 1;
  double non_replication_rate = 0.0;
  WilsonInterval non_replication_ci;
  double error_rate = 0.0;
  WilsonInterval error_ci;
  double cap_breach_rate = 0.0;
  SampleStats samples;
  double target_rho = 0.0;
  double target_delta = 0.0;
  double c_slack = 3.0;
  bool protocol_ok = true;  // paired internal streams were bit-identical
  bool fail = false;        // CI lower bound exceeded target * c_slack
  std::map<std::string, double> constants;
  std::string generator_name = kGeneratorName;
  std::string generator_version = kGeneratorVersion;

  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row(const std::string& axis, double value) const;
};

TrialReport run_paired(const PairedTrialConfig& config);

struct GoodStringOptions {
  double c_trials = 3.0;  // trials per candidate = ceil(c ln(T/delta) / rho^2)
};

struct GoodStringResult {
  uint64_t seed = 0;
  double agreement = 0.0;
  int candidates_tested = 0;
};

// Tests ceil(log2(3/delta)) candidate internal seeds; per candidate the
// paired-agreement statistic is estimated over fresh instances and samples;
// the first candidate with estimate >= 1 - 2 rho wins. Throws
// std::runtime_error when no candidate qualifies.
GoodStringResult find_good_string(const InstanceGenerator& gen, double rho,
                                  double delta, SharedRandomness& rand,
                                  const GoodStringOptions& options = {});

struct SweepPoint {
  double value = 0.0;
  TrialReport report;
};

// Runs one paired experiment per axis value; the factory builds the config
// for a value.
std::vector<SweepPoint> sweep(
    const std::string& axis, const std::vector<double>& values,
    const std::function<PairedTrialConfig(double)>& factory);

std::string sweep_csv(const std::string& axis, const std::vector<SweepPoint>& points);

}  // namespace replicore
