#include "replicore/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace replicore {

WilsonInterval wilson_interval(uint64_t successes, uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = double(trials);
  const double p = double(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {successes == 0 ? 0.0 : std::max(0.0, (center - half) / denom),
          successes == trials ? 1.0 : std::min(1.0, (center + half) / denom)};
}

namespace {

struct TrialRecord {
  bool replicated = true;
  int errors = 0;         // 0..2 incorrect runs
  bool breach_a = false;
  bool breach_b = false;
  uint64_t samples_a = 0;
  uint64_t samples_b = 0;
  bool protocol_ok = true;
};

size_t symmetric_difference(const std::vector<size_t>& a,
                            const std::vector<size_t>& b) {
  size_t i = 0, j = 0, diff = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++diff;
      ++i;
    } else {
      ++diff;
      ++j;
    }
  }
  return diff + (a.size() - i) + (b.size() - j);
}

TrialRecord run_one_trial(const PairedTrialConfig& config, uint64_t trial) {
  SharedRandomness root = SharedRandomness(config.seed).child(trial);
  SharedRandomness instance_rng = root.child(3);
  InstanceRunner runner = config.make_instance(instance_rng);

  const uint64_t internal_seed = root.child(0).seed();
  SharedRandomness internal_a(internal_seed);
  SharedRandomness internal_b(internal_seed);
  PairedOutcome a = runner(root.child(1).seed(), internal_a);
  PairedOutcome b = runner(root.child(2).seed(), internal_b);

  TrialRecord rec;
  if (a.has_set && b.has_set && config.slack_r > 1) {
    rec.replicated = symmetric_difference(a.out_set, b.out_set) < config.slack_r;
  } else {
    rec.replicated = a.key == b.key;
  }
  rec.errors = (a.correct ? 0 : 1) + (b.correct ? 0 : 1);
  rec.breach_a = a.cap_breached;
  rec.breach_b = b.cap_breached;
  rec.samples_a = a.samples;
  rec.samples_b = b.samples;
  // With one shared seed, equal draw counts must mean equal streams.
  rec.protocol_ok = a.internal_position != b.internal_position ||
                    a.internal_digest == b.internal_digest;
  return rec;
}

}  // namespace

TrialReport run_paired(const PairedTrialConfig& config) {
  if (config.trials < 100)
    throw std::invalid_argument("run_paired: need >= 100 trials for CI validity");
  std::vector<TrialRecord> records(config.trials);

  int workers = config.workers > 0
                    ? config.workers
                    : int(std::max(1u, std::thread::hardware_concurrency()));
  workers = int(std::min<uint64_t>(uint64_t(workers), config.trials));
  if (workers <= 1) {
    for (uint64_t t = 0; t < config.trials; ++t)
      records[t] = run_one_trial(config, t);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (uint64_t t = uint64_t(w); t < config.trials; t += uint64_t(workers))
          records[t] = run_one_trial(config, t);
      });
    }
    for (auto& th : pool) th.join();
  }

  TrialReport report;
  report.algorithm = config.algorithm;
  report.trials = config.trials;
  report.seed = config.seed;
  report.slack_r = config.slack_r;
  report.target_rho = config.target_rho;
  report.target_delta = config.target_delta;
  report.c_slack = config.c_slack;
  report.constants = config.constants;

  uint64_t non_rep = 0, errors = 0, breaches = 0;
  std::vector<uint64_t> samples;
  samples.reserve(2 * config.trials);
  for (const TrialRecord& r : records) {
    if (!r.replicated) ++non_rep;
    errors += uint64_t(r.errors);
    breaches += uint64_t(r.breach_a) + uint64_t(r.breach_b);
    samples.push_back(r.samples_a);
    samples.push_back(r.samples_b);
    if (!r.protocol_ok) report.protocol_ok = false;
  }
  report.non_replication_rate = double(non_rep) / double(config.trials);
  report.non_replication_ci = wilson_interval(non_rep, config.trials);
  const uint64_t runs = 2 * config.trials;
  report.error_rate = double(errors) / double(runs);
  report.error_ci = wilson_interval(errors, runs);
  report.cap_breach_rate = double(breaches) / double(runs);

  std::sort(samples.begin(), samples.end());
  double mean = 0.0;
  for (uint64_t s : samples) mean += double(s);
  report.samples.mean = mean / double(samples.size());
  report.samples.p50 = samples[samples.size() / 2];
  report.samples.p95 = samples[size_t(0.95 * double(samples.size() - 1))];
  report.samples.max = samples.back();

  if (config.target_rho > 0.0)
    report.fail = report.non_replication_ci.lo >
                  config.target_rho * config.c_slack;
  if (config.target_delta > 0.0 &&
      report.error_ci.lo > config.target_delta * config.c_slack)
    report.fail = true;
  if (!report.protocol_ok) report.fail = true;
  return report;
}

std::string TrialReport::to_json() const {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["trials"] = trials;
  j["seed"] = seed;
  j["slack_r"] = slack_r;
  j["non_replication"] = {{"rate", non_replication_rate},
                          {"ci_lo", non_replication_ci.lo},
                          {"ci_hi", non_replication_ci.hi}};
  j["error"] = {{"rate", error_rate},
                {"ci_lo", error_ci.lo},
                {"ci_hi", error_ci.hi}};
  j["cap_breach_rate"] = cap_breach_rate;
  j["samples"] = {{"mean", samples.mean},
                  {"p50", samples.p50},
                  {"p95", samples.p95},
                  {"max", samples.max}};
  j["target"] = {{"rho", target_rho}, {"delta", target_delta}, {"c_slack", c_slack}};
  j["protocol_ok"] = protocol_ok;
  j["fail"] = fail;
  j["constants"] = constants;
  j["generator"] = {{"name", generator_name}, {"version", generator_version}};
  return j.dump(2);
}

std::string TrialReport::csv_header() {
  return "axis,value,algorithm,trials,seed,non_replication_rate,nr_ci_lo,nr_ci_hi,"
         "error_rate,err_ci_lo,err_ci_hi,cap_breach_rate,samples_mean,samples_p50,"
         "samples_p95,samples_max,fail";
}

std::string TrialReport::csv_row(const std::string& axis, double value) const {
  std::ostringstream os;
  os << axis << ',' << value << ',' << algorithm << ',' << trials << ',' << seed
     << ',' << non_replication_rate << ',' << non_replication_ci.lo << ','
     << non_replication_ci.hi << ',' << error_rate << ',' << error_ci.lo << ','
     << error_ci.hi << ',' << cap_breach_rate << ',' << samples.mean << ','
     << samples.p50 << ',' << samples.p95 << ',' << samples.max << ','
     << (fail ? 1 : 0);
  return os.str();
}

GoodStringResult find_good_string(const InstanceGenerator& gen, double rho,
                                  double delta, SharedRandomness& rand,
                                  const GoodStringOptions& options) {
  const int candidates = int(std::ceil(std::log2(3.0 / delta)));
  const uint64_t trials = uint64_t(
      std::ceil(options.c_trials * std::log(double(candidates) / delta) /
                (rho * rho)));
  GoodStringResult result;
  for (int c = 0; c < candidates; ++c) {
    const uint64_t candidate_seed = rand.next_u64();
    uint64_t agree = 0;
    SharedRandomness driver = rand.child(1000 + uint64_t(c));
    for (uint64_t t = 0; t < trials; ++t) {
      SharedRandomness trial_root = driver.child(t);
      SharedRandomness instance_rng = trial_root.child(3);
      InstanceRunner runner = gen(instance_rng);
      SharedRandomness internal_a(candidate_seed);
      SharedRandomness internal_b(candidate_seed);
      PairedOutcome a = runner(trial_root.child(1).seed(), internal_a);
      PairedOutcome b = runner(trial_root.child(2).seed(), internal_b);
      if (a.key == b.key) ++agree;
    }
    const double phi = double(agree) / double(trials);
    result.candidates_tested = c + 1;
    if (phi >= 1.0 - 2.0 * rho) {
      result.seed = candidate_seed;
      result.agreement = phi;
      return result;
    }
  }
  throw std::runtime_error("find_good_string: no candidate qualified");
}

std::vector<SweepPoint> sweep(
    const std::string& axis, const std::vector<double>& values,
    const std::function<PairedTrialConfig(double)>& factory) {
  (void)axis;
  std::vector<SweepPoint> points;
  for (double v : values) points.push_back({v, run_paired(factory(v))});
  return points;
}

std::string sweep_csv(const std::string& axis,
                      const std::vector<SweepPoint>& points) {
  std::ostringstream os;
  os << TrialReport::csv_header() << '\n';
  for (const SweepPoint& p : points)
    os << p.report.csv_row(axis, p.value) << '\n';
  return os.str();
}

}  // namespace replicore
