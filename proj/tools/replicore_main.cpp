#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "replicore/coin.hpp"
#include "replicore/compose.hpp"
#include "replicore/harness.hpp"
#include "replicore/heavyhitters.hpp"
#include "replicore/lattice.hpp"
#include "replicore/maxid.hpp"
#include "replicore/meanest.hpp"
#include "replicore/presets.hpp"
#include "replicore/statq.hpp"
#include "replicore/tiling.hpp"

using json = nlohmann::json;
using namespace replicore;

namespace {

void emit(const json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream f(out_path);
    f << j.dump(2) << '\n';
    std::cout << "wrote " << out_path << '\n';
  }
}

json generator_metadata() {
  return {{"name", kGeneratorName}, {"version", kGeneratorVersion}};
}

json sample_stats_json(std::vector<uint64_t>& samples) {
  std::sort(samples.begin(), samples.end());
  double mean = 0.0;
  for (uint64_t s : samples) mean += double(s);
  mean /= double(samples.size());
  return {{"mean", mean},
          {"p50", samples[samples.size() / 2]},
          {"p95", samples[size_t(0.95 * double(samples.size() - 1))]},
          {"max", samples.back()}};
}

TilingOracle make_tiling(const std::string& descriptor, size_t n,
                         std::shared_ptr<Lattice>& keep_alive) {
  json d = json::parse(descriptor);
  const std::string kind = d.at("kind");
  if (kind == "cube") {
    const double side = d.value("scale", 0.2 / std::sqrt(double(n)));
    return cube_tiling(n, side);
  }
  if (kind == "lattice") {
    Mat basis = read_basis_file(d.at("basis_path"));
    keep_alive = std::make_shared<Lattice>(lattice_preprocess(basis));
    return voronoi_tiling(*keep_alive);
  }
  throw std::runtime_error("tiling descriptor kind must be cube or lattice");
}

std::unique_ptr<VectorSource> make_vector_source(const std::string& descriptor,
                                                 SharedRandomness rng) {
  json d = json::parse(descriptor);
  const std::string kind = d.at("kind");
  if (kind == "gaussian") {
    Vec mean = d.at("mean").get<Vec>();
    return std::make_unique<GaussianSource>(mean, std::move(rng));
  }
  if (kind == "product_bernoulli") {
    Vec biases = d.at("biases").get<Vec>();
    return std::make_unique<ProductBernoulliSource>(biases, std::move(rng));
  }
  if (kind == "point") {
    Vec point = d.at("point").get<Vec>();
    return std::make_unique<PointMassSource>(point);
  }
  throw std::runtime_error("distribution kind must be gaussian, product_bernoulli or point");
}

Vec parse_biases(const std::string& spec, size_t n, SharedRandomness& rng) {
  if (spec.rfind("uniform:", 0) == 0) {
    std::istringstream ss(spec.substr(8));
    double lo, hi;
    char comma;
    ss >> lo >> comma >> hi;
    Vec biases(n);
    for (double& b : biases) b = draw_uniform_interval(rng, lo, hi);
    return biases;
  }
  if (spec.rfind("planted:", 0) == 0) {
    std::istringstream ss(spec.substr(8));
    double pmax, prest;
    size_t count;
    char comma;
    ss >> pmax >> comma >> prest >> comma >> count;
    Vec biases(n, prest);
    for (size_t i = 0; i < std::min(count, n); ++i) biases[i] = pmax;
    return biases;
  }
  std::ifstream f(spec);
  if (!f) throw std::runtime_error("cannot open bias file: " + spec);
  Vec biases;
  double v;
  while (f >> v) biases.push_back(v);
  if (biases.size() != n) throw std::runtime_error("bias file length != N");
  return biases;
}

int cmd_run(const std::string& id, uint64_t seed, uint64_t trials, int workers,
            const std::string& out) {
  const Preset* p = find_preset(id);
  if (!p) {
    std::cerr << "unknown preset: " << id << " (see list-presets)\n";
    return 2;
  }
  const PresetResult r = p->run(seed, trials, workers);
  std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << p->id << " — " << r.summary
            << '\n';
  if (!out.empty()) {
    std::ofstream f(out);
    f << r.details_json << '\n';
  }
  return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replicore: replicable statistics harness"};
  app.require_subcommand(1);

  // ------------------------------------------------------------ run / list
  std::string preset_id, out_path;
  uint64_t seed = 1, trials = 0;
  int workers = 0;
  auto* run = app.add_subcommand("run", "run an acceptance preset");
  run->add_option("preset", preset_id, "preset id, e.g. c01 or c01-coin-replicability")
      ->required();
  run->add_option("--seed", seed);
  run->add_option("--trials", trials, "0 keeps the criterion's stated count");
  run->add_option("--workers", workers);
  run->add_option("--out", out_path, "write details JSON here");

  auto* list = app.add_subcommand("list-presets", "list acceptance presets");

  // ----------------------------------------------------------------- sweep
  std::string sweep_axis = "rho", sweep_values = "0.4,0.2,0.1";
  double sw_p0 = 0.3, sw_q0 = 0.6, sw_delta = 0.05;
  uint64_t sw_trials = 1000, sw_seed = 1;
  std::string sweep_out;
  auto* sw = app.add_subcommand("sweep", "rho sweep of the adaptive coin tester");
  sw->add_option("--axis", sweep_axis, "only rho is supported");
  sw->add_option("--values", sweep_values, "comma separated");
  sw->add_option("--p0", sw_p0);
  sw->add_option("--q0", sw_q0);
  sw->add_option("--delta", sw_delta);
  sw->add_option("--trials", sw_trials);
  sw->add_option("--seed", sw_seed);
  sw->add_option("--out", sweep_out, "CSV path (stdout otherwise)");

  // ------------------------------------------------------------- coin-test
  double ct_p0 = 0.3, ct_q0 = 0.6, ct_rho = 0.2, ct_delta = 0.05, ct_bias = 0.45;
  uint64_t ct_seed = 1, ct_trials = 1000;
  std::string ct_out;
  auto* ct = app.add_subcommand("coin-test", "adaptive single-coin tester");
  ct->add_option("--p0", ct_p0);
  ct->add_option("--q0", ct_q0);
  ct->add_option("--rho", ct_rho);
  ct->add_option("--delta", ct_delta);
  ct->add_option("--bias", ct_bias)->required();
  ct->add_option("--seed", ct_seed);
  ct->add_option("--trials", ct_trials);
  ct->add_option("--out", ct_out);

  // ----------------------------------------------------------------- statq
  double sq_tau = 0.1, sq_rho = 0.2, sq_delta = 0.05;
  std::string sq_dist = "0.37";
  uint64_t sq_seed = 1, sq_trials = 1000;
  std::string sq_out;
  auto* sq = app.add_subcommand("statq", "adaptive statistical query on a coin");
  sq->add_option("--tau", sq_tau);
  sq->add_option("--rho", sq_rho);
  sq->add_option("--delta", sq_delta);
  sq->add_option("--dist", sq_dist, "Bernoulli bias");
  sq->add_option("--seed", sq_seed);
  sq->add_option("--trials", sq_trials);
  sq->add_option("--out", sq_out);

  // --------------------------------------------------------- heavy-hitters
  std::string hh_dist = "{\"a\":0.6,\"b\":0.3,\"c\":0.1}";
  double hh_v = 0.45, hh_eps = 0.1, hh_rho = 0.2, hh_delta = 0.04;
  uint64_t hh_seed = 1, hh_trials = 1000;
  std::string hh_out;
  auto* hh = app.add_subcommand("heavy-hitters", "adaptive heavy hitters");
  hh->add_option("--dist", hh_dist, "JSON atom:mass map");
  hh->add_option("--v", hh_v);
  hh->add_option("--eps", hh_eps);
  hh->add_option("--rho", hh_rho);
  hh->add_option("--delta", hh_delta);
  hh->add_option("--seed", hh_seed);
  hh->add_option("--trials", hh_trials);
  hh->add_option("--out", hh_out);

  // ----------------------------------------------------------------- ncoin
  size_t nc_n = 16, nc_slack = 1;
  double nc_p0 = 0.3, nc_q0 = 0.6, nc_rho = 0.3, nc_delta = 0.05;
  std::string nc_biases = "uniform:0.3,0.6";
  uint64_t nc_seed = 1, nc_trials = 500, nc_cap = 0;
  std::string nc_out;
  auto* nc = app.add_subcommand("ncoin", "N-coin tester (strict or approximate)");
  nc->add_option("--n", nc_n);
  nc->add_option("--p0", nc_p0);
  nc->add_option("--q0", nc_q0);
  nc->add_option("--rho", nc_rho);
  nc->add_option("--delta", nc_delta);
  nc->add_option("--slack", nc_slack, "R >= 2 switches to the approximate tester");
  nc->add_option("--cap", nc_cap, "override the sample cap (0 = formula default)");
  nc->add_option("--biases", nc_biases, "uniform:lo,hi | planted:pmax,prest,count | file");
  nc->add_option("--seed", nc_seed);
  nc->add_option("--trials", nc_trials);
  nc->add_option("--out", nc_out);

  // ------------------------------------------------------------ linf-learn
  size_t ll_n = 8;
  double ll_eps = 0.125, ll_rho = 0.2, ll_delta = 0.05;
  std::string ll_biases = "uniform:0,1";
  uint64_t ll_seed = 1, ll_trials = 100;
  std::string ll_out;
  auto* ll = app.add_subcommand("linf-learn", "binary-search bias learner");
  ll->add_option("--n", ll_n);
  ll->add_option("--eps", ll_eps);
  ll->add_option("--rho", ll_rho);
  ll->add_option("--delta", ll_delta);
  ll->add_option("--biases", ll_biases);
  ll->add_option("--seed", ll_seed);
  ll->add_option("--trials", ll_trials);
  ll->add_option("--out", ll_out);

  // -------------------------------------------------------------- mean-est
  std::string me_norm = "l2";
  size_t me_n = 4;
  double me_eps = 0.5, me_gamma = 0.15, me_rho = 0.3, me_delta = 0.05;
  std::string me_tiling = "{\"kind\":\"cube\"}";
  std::string me_dist;
  uint64_t me_seed = 1, me_trials = 200;
  std::string me_out;
  auto* me = app.add_subcommand("mean-est", "replicable mean estimation");
  me->add_option("--norm", me_norm, "l2 or linf");
  me->add_option("--n", me_n);
  me->add_option("--eps", me_eps);
  me->add_option("--gamma", me_gamma);
  me->add_option("--rho", me_rho);
  me->add_option("--delta", me_delta);
  me->add_option("--tiling", me_tiling, "JSON descriptor");
  me->add_option("--dist", me_dist, "JSON descriptor")->required();
  me->add_option("--seed", me_seed);
  me->add_option("--trials", me_trials);
  me->add_option("--out", me_out);

  // ------------------------------------------------------------ pseudo-max
  size_t pm_n = 64, pm_k = 4;
  double pm_eps = 0.1, pm_rho = 0.3, pm_delta = 0.05;
  std::string pm_biases = "planted:0.9,0.2,1";
  uint64_t pm_seed = 1, pm_trials = 100;
  std::string pm_out;
  auto* pm = app.add_subcommand("pseudo-max", "pseudo-maximum identification");
  pm->add_option("--n", pm_n);
  pm->add_option("--k", pm_k);
  pm->add_option("--eps", pm_eps);
  pm->add_option("--rho", pm_rho);
  pm->add_option("--delta", pm_delta);
  pm->add_option("--biases", pm_biases);
  pm->add_option("--seed", pm_seed);
  pm->add_option("--trials", pm_trials);
  pm->add_option("--out", pm_out);

  // ----------------------------------------------------------- tiling-info
  std::string ti_basis;
  auto* ti = app.add_subcommand("tiling-info", "lattice preprocessing summary");
  ti->add_option("--basis", ti_basis, "basis file, one row per line")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(preset_id, seed, trials, workers, out_path);

    if (*list) {
      for (const Preset& p : all_presets())
        std::cout << p.id << "  " << p.description << '\n';
      return 0;
    }

    if (*sw) {
      if (sweep_axis != "rho") throw std::runtime_error("only --axis rho is supported");
      std::vector<double> values;
      std::istringstream ss(sweep_values);
      std::string tok;
      while (std::getline(ss, tok, ',')) values.push_back(std::stod(tok));
      auto factory = [&](double rho) {
        PairedTrialConfig cfg;
        cfg.algorithm = "adaptive_coin_test";
        cfg.trials = sw_trials;
        cfg.seed = sw_seed;
        cfg.target_rho = rho;
        cfg.make_instance = [=](SharedRandomness& inst) -> InstanceRunner {
          const double p = draw_uniform_interval(inst, sw_p0, sw_q0);
          return [=](uint64_t sample_seed, SharedRandomness& internal) {
            BernoulliCoin coin(p, SharedRandomness(sample_seed));
            const CoinProblemParams params(sw_p0, sw_q0, rho, sw_delta);
            const TestOutcome t = adaptive_coin_test(coin, params, internal);
            PairedOutcome o;
            o.key = t.verdict == Verdict::Accept ? "A" : "R";
            o.samples = t.samples_used;
            o.internal_position = internal.position();
            o.internal_digest = internal.digest();
            return o;
          };
        };
        return cfg;
      };
      const std::string csv = sweep_csv("rho", sweep("rho", values, factory));
      if (sweep_out.empty()) {
        std::cout << csv;
      } else {
        std::ofstream f(sweep_out);
        f << csv;
        std::cout << "wrote " << sweep_out << '\n';
      }
      return 0;
    }

    if (*ct) {
      const CoinProblemParams params(ct_p0, ct_q0, ct_rho, ct_delta);
      SharedRandomness rand(ct_seed);
      uint64_t accepts = 0;
      std::vector<uint64_t> samples;
      for (uint64_t t = 0; t < ct_trials; ++t) {
        SharedRandomness root = rand.child(t);
        BernoulliCoin coin(ct_bias, root.child(1));
        SharedRandomness internal = root.child(0);
        const TestOutcome o = adaptive_coin_test(coin, params, internal);
        if (o.verdict == Verdict::Accept) ++accepts;
        samples.push_back(o.samples_used);
      }
      json j{{"verdict_counts",
              {{"accept", accepts}, {"reject", ct_trials - accepts}}},
             {"generator", generator_metadata()},
             {"params", {{"p0", ct_p0}, {"q0", ct_q0}, {"rho", ct_rho},
                         {"delta", ct_delta}, {"bias", ct_bias}}}};
      json stats = sample_stats_json(samples);
      j["mean_samples"] = stats["mean"];
      j["p95_samples"] = stats["p95"];
      emit(j, ct_out);
      return 0;
    }

    if (*sq) {
      const double bias = std::stod(sq_dist);
      const StatQueryParams params(sq_tau, sq_rho, sq_delta);
      SharedRandomness rand(sq_seed);
      std::vector<uint64_t> samples;
      uint64_t within = 0;
      double mean_answer = 0.0;
      for (uint64_t t = 0; t < sq_trials; ++t) {
        SharedRandomness root = rand.child(t);
        BernoulliCoin coin(bias, root.child(1));
        CoinQuery query(coin);
        SharedRandomness internal = root.child(0);
        const double v = adaptive_stat_query(query, params, internal);
        mean_answer += v;
        if (std::fabs(v - bias) <= sq_tau) ++within;
        samples.push_back(coin.consumed());
      }
      json j{{"mean_answer", mean_answer / double(sq_trials)},
             {"within_tau_rate", double(within) / double(sq_trials)},
             {"samples", sample_stats_json(samples)},
             {"generator", generator_metadata()}};
      emit(j, sq_out);
      return 0;
    }

    if (*hh) {
      json dist = json::parse(hh_dist);
      std::vector<std::string> names;
      std::vector<double> masses;
      for (auto& [name, mass] : dist.items()) {
        names.push_back(name);
        masses.push_back(mass.get<double>());
      }
      const HeavyHitterParams params(hh_v, hh_eps, hh_rho, hh_delta);
      SharedRandomness rand(hh_seed);
      std::map<std::string, uint64_t> appearance;
      std::vector<uint64_t> samples;
      for (uint64_t t = 0; t < hh_trials; ++t) {
        SharedRandomness root = rand.child(t);
        FiniteDiscrete source(masses, root.child(1));
        SharedRandomness internal = root.child(0);
        const HeavyHitterResult r = adaptive_heavy_hitters(source, params, internal);
        for (size_t x : r.set) ++appearance[names[x]];
        samples.push_back(r.samples_used);
      }
      json j{{"returned_fraction", json::object()},
             {"samples", sample_stats_json(samples)},
             {"generator", generator_metadata()}};
      for (auto& [name, count] : appearance)
        j["returned_fraction"][name] = double(count) / double(hh_trials);
      emit(j, hh_out);
      return 0;
    }

    if (*nc) {
      const CoinProblemParams params(nc_p0, nc_q0, nc_rho, nc_delta);
      SharedRandomness rand(nc_seed);
      std::vector<uint64_t> samples;
      uint64_t breaches = 0;
      std::vector<uint64_t> accept_counts(nc_n, 0);
      for (uint64_t t = 0; t < nc_trials; ++t) {
        SharedRandomness root = rand.child(t);
        SharedRandomness inst = root.child(3);
        Vec biases = parse_biases(nc_biases, nc_n, inst);
        SharedRandomness seeder = root.child(1);
        std::vector<std::unique_ptr<BernoulliCoin>> coins;
        std::vector<CoinSource*> sources;
        for (size_t i = 0; i < nc_n; ++i) {
          coins.push_back(std::make_unique<BernoulliCoin>(biases[i], seeder.child(i)));
          sources.push_back(coins.back().get());
        }
        SharedRandomness internal = root.child(0);
        NCoinOptions options;
        options.cap_override = nc_cap;
        const NCoinOutcome out =
            nc_slack >= 2
                ? approx_n_coin_test(sources, params, nc_slack, internal, options)
                : n_coin_test(sources, params, internal, options);
        for (size_t i : out.accepted) ++accept_counts[i];
        if (out.cap_breached) ++breaches;
        samples.push_back(out.total_samples);
      }
      json j{{"accept_rates", json::array()},
             {"cap_breach_rate", double(breaches) / double(nc_trials)},
             {"samples", sample_stats_json(samples)},
             {"generator", generator_metadata()}};
      for (uint64_t c : accept_counts)
        j["accept_rates"].push_back(double(c) / double(nc_trials));
      emit(j, nc_out);
      return 0;
    }

    if (*ll) {
      SharedRandomness rand(ll_seed);
      uint64_t within = 0;
      for (uint64_t t = 0; t < ll_trials; ++t) {
        SharedRandomness root = rand.child(t);
        SharedRandomness inst = root.child(3);
        Vec biases = parse_biases(ll_biases, ll_n, inst);
        SharedRandomness seeder = root.child(1);
        std::vector<std::unique_ptr<BernoulliCoin>> coins;
        std::vector<CoinSource*> sources;
        for (size_t i = 0; i < ll_n; ++i) {
          coins.push_back(std::make_unique<BernoulliCoin>(biases[i], seeder.child(i)));
          sources.push_back(coins.back().get());
        }
        SharedRandomness internal = root.child(0);
        const Vec est = linf_learn_by_search(sources, ll_eps, ll_rho, ll_delta,
                                             internal, seeder.child(1000000));
        if (norm_inf(sub(est, biases)) <= ll_eps) ++within;
      }
      json j{{"within_eps_rate", double(within) / double(ll_trials)},
             {"generator", generator_metadata()}};
      emit(j, ll_out);
      return 0;
    }

    if (*me) {
      std::shared_ptr<Lattice> keep_alive;
      const TilingOracle tiling = make_tiling(me_tiling, me_n, keep_alive);
      const double accuracy = me_norm == "l2" ? me_eps : me_gamma;
      const MeanEstParams params(me_n, accuracy, me_rho, me_delta, &tiling);
      SharedRandomness rand(me_seed);
      std::vector<uint64_t> samples;
      double mean_err = 0.0;
      for (uint64_t t = 0; t < me_trials; ++t) {
        SharedRandomness root = rand.child(t);
        auto source = make_vector_source(me_dist, root.child(1));
        SharedRandomness internal = root.child(0);
        const MeanEstResult r = me_norm == "l2"
                                    ? replicable_mean_l2(*source, params, internal)
                                    : replicable_mean_linf(*source, params, internal);
        samples.push_back(r.vector_samples);
        // error against the descriptor's declared mean when present
        json d = json::parse(me_dist);
        Vec mean(me_n, 0.0);
        if (d.contains("mean")) mean = d["mean"].get<Vec>();
        if (d.contains("biases")) mean = d["biases"].get<Vec>();
        if (d.contains("point")) mean = d["point"].get<Vec>();
        mean_err += me_norm == "l2" ? dist2(r.estimate, mean)
                                    : norm_inf(sub(r.estimate, mean));
      }
      json j{{"mean_error", mean_err / double(me_trials)},
             {"vector_samples", sample_stats_json(samples)},
             {"generator", generator_metadata()}};
      emit(j, me_out);
      return 0;
    }

    if (*pm) {
      const PseudoMaxParams params(pm_n, pm_k, pm_eps, pm_rho, pm_delta);
      SharedRandomness rand(pm_seed);
      std::vector<uint64_t> samples;
      std::map<size_t, uint64_t> membership;
      for (uint64_t t = 0; t < pm_trials; ++t) {
        SharedRandomness root = rand.child(t);
        SharedRandomness inst = root.child(3);
        Vec biases = parse_biases(pm_biases, pm_n, inst);
        CoinBank bank(biases, root.child(1));
        SharedRandomness internal = root.child(0);
        const PseudoMaxResult r = pseudo_max(bank, params, internal);
        for (size_t i : r.set) ++membership[i];
        samples.push_back(r.samples_used);
      }
      json j{{"membership_rates", json::object()},
             {"samples", sample_stats_json(samples)},
             {"generator", generator_metadata()}};
      for (auto& [i, c] : membership)
        j["membership_rates"][std::to_string(i)] = double(c) / double(pm_trials);
      emit(j, pm_out);
      return 0;
    }

    if (*ti) {
      const Mat basis = read_basis_file(ti_basis);
      const Lattice lat = lattice_preprocess(basis);
      const TilingOracle t = voronoi_tiling(lat);
      std::cout << "dimension:        " << basis.rows << '\n'
                << "packing radius:   " << lat.lambda << '\n'
                << "covering radius:  " << lat.mu << '\n'
                << "relevant vectors: " << lat.relevant_vectors.size() << '\n'
                << "normalized A:     " << t.surface_area << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
