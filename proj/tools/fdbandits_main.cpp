// Experiment driver: instance generation, offline sampling, single runs,
// (n, seed) sweeps with rate fitting, and invariant verification suites.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fdbandits/algorithms.hpp"
#include "fdbandits/evaluation.hpp"
#include "fdbandits/harness.hpp"
#include "fdbandits/instances.hpp"
#include "fdbandits/uncertainty.hpp"

namespace {

using namespace fdbandits;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

struct GenInstanceArgs {
  std::string out;
  std::string out_dir;
  std::string family;
  int num_states = 2;
  int num_actions = 2;
  std::uint64_t seed = 0;
  double ref_skew = 0.0;
  double c_star = 4.0;
  double eta = 8.0;
  double alpha = 1.0;
  long n_target = 512;
};

int cmd_gen_instance(const GenInstanceArgs& args) {
  if (args.family.empty()) {
    if (args.out.empty()) {
      std::cerr << "gen-instance: --out is required for random instances\n";
      return kExitUsage;
    }
    const BanditInstance inst =
        random_instance(args.num_states, args.num_actions, args.seed, args.ref_skew);
    save_instance(inst, args.out);
    std::cout << "wrote " << args.out << "\n";
    return kExitOk;
  }
  if (args.out_dir.empty()) {
    std::cerr << "gen-instance: --out-dir is required for families\n";
    return kExitUsage;
  }
  HardFamily family;
  if (args.family == "kl") {
    family = kl_hard_family(args.num_states, args.c_star, args.eta, args.n_target);
  } else if (args.family == "chi2") {
    family = chi2_hard_family(args.num_states, args.alpha, args.eta, args.n_target);
  } else if (args.family == "dueling-kl") {
    family = dueling_hard_family(args.num_states, args.c_star, args.eta, args.n_target,
                                 DuelingFamilyKind::kKl, args.alpha);
  } else if (args.family == "dueling-chi2") {
    family = dueling_hard_family(args.num_states, args.c_star, args.eta, args.n_target,
                                 DuelingFamilyKind::kChi2, args.alpha);
  } else {
    std::cerr << "gen-instance: unknown family " << args.family << "\n";
    return kExitUsage;
  }
  save_family(family, args.out_dir);
  std::cout << "wrote " << family.instances.size() << " instances to " << args.out_dir << "\n";
  return kExitOk;
}

struct SampleArgs {
  std::string instance;
  std::string out;
  long n = 0;
  std::uint64_t seed = 0;
  bool preference = false;
};

int cmd_sample(const SampleArgs& args) {
  const BanditInstance inst = load_instance(args.instance);
  if (args.preference) {
    save_dataset(sample_preference_data(inst, args.n, args.seed), args.out);
  } else {
    save_dataset(sample_bandit_data(inst, args.n, args.seed), args.out);
  }
  std::cout << "wrote " << args.out << "\n";
  return kExitOk;
}

struct RunArgs {
  std::string algo = "kl_pcb";
  std::string instance;
  std::string family_dir;
  std::string data;  // pre-sampled dataset CSV; otherwise sampled from (n, seeds)
  int family_index = 0;
  int class_size = 16;
  std::uint64_t class_seed = 7;
  double eta = 1.0;
  double alpha = 1.0;
  double delta = 0.05;
  long n = 1024;
  std::uint64_t base_seed = 0;
  int seed_index = 0;
};

SweepConfig resolve_run_config(const RunArgs& args) {
  SweepConfig cfg;
  if (!args.family_dir.empty()) {
    const HardFamily family = load_family(args.family_dir);
    cfg.instance = family.instances.at(args.family_index);
    cfg.fclass = family.class_for(args.family_index);
  } else {
    cfg.instance = load_instance(args.instance);
    cfg.fclass = random_function_class(cfg.instance, args.class_size, args.class_seed);
  }
  cfg.algo = algo_from_name(args.algo);
  const bool f_algo = cfg.algo == Algo::kFCb || cfg.algo == Algo::kFCdb;
  cfg.reg = f_algo ? Regularizer::chi2(args.eta, args.alpha) : Regularizer::kl(args.eta);
  cfg.delta = args.delta;
  cfg.base_seed = args.base_seed;
  cfg.n_grid = {args.n};
  return cfg;
}

int cmd_run(const RunArgs& args) {
  const SweepConfig cfg = resolve_run_config(args);
  json out;
  out["algo"] = args.algo;

  if (!args.data.empty()) {
    // Pre-sampled dataset (as written by `sample`).
    const BanditInstance& inst = cfg.instance;
    PessimismOptions options;
    options.delta = args.delta;
    options.ground_truth = inst.mean_reward;
    AlgoResult result;
    switch (cfg.algo) {
      case Algo::kLsSoftmaxBaseline:
        options.force_zero_bonus = true;
        [[fallthrough]];
      case Algo::kKlPcb:
        result = run_kl_pcb(cfg.fclass, load_dataset(args.data), inst.ref_policy,
                            inst.context_dist, args.eta, options);
        break;
      case Algo::kFCb:
        result = run_f_cb(cfg.fclass, load_dataset(args.data), inst.ref_policy,
                          inst.context_dist, cfg.reg, inst.mean_reward);
        break;
      case Algo::kKlPcdb:
        result = run_kl_pcdb(cfg.fclass, load_preference_dataset(args.data), inst.ref_policy,
                             inst.context_dist, args.eta, options);
        break;
      case Algo::kFCdb:
        result = run_f_cdb(cfg.fclass, load_preference_dataset(args.data), inst.ref_policy,
                           inst.context_dist, cfg.reg, inst.mean_reward);
        break;
    }
    out["subopt"] = suboptimality(inst, cfg.reg, result.policy);
    if (result.diag.event_e) out["event_e"] = *result.diag.event_e;
    out["estimator_index"] = result.diag.estimator_index;
    out["beta"] = result.diag.beta;
    out["status"] = "ok";
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  }

  const SweepRow row = run_cell(cfg, args.n, args.seed_index);
  out["n"] = row.n;
  out["seed"] = row.seed;
  out["subopt"] = row.subopt;
  if (row.event_e) out["event_e"] = *row.event_e;
  out["c_pistar"] = row.c_pistar;
  out["d2_single"] = row.d2_single;
  out["status"] = row.status;
  std::cout << out.dump(2) << "\n";
  return row.status == "ok" ? kExitOk : kExitCheckFailure;
}

struct SweepArgs {
  std::string config_path;
  std::string algo = "kl_pcb";
  std::string instance;
  std::string out;
  std::vector<long> n_grid;
  int seeds = 100;
  double eta = 1.0;
  double alpha = 1.0;
  double delta = 0.05;
  int class_size = 16;
  std::uint64_t class_seed = 7;
  std::uint64_t base_seed = 0;
  int workers = 1;
  bool measure_runtime = false;
  int gen_states = 0;
  int gen_actions = 0;
  std::uint64_t gen_seed = 0;
  double gen_ref_skew = 0.0;
};

std::vector<long> default_n_grid() { return {128, 256, 512, 1024, 2048, 4096, 8192, 16384}; }

struct ResolvedSweep {
  SweepConfig cfg;
  std::string out;
};

ResolvedSweep resolve_sweep_config(const SweepArgs& args) {
  SweepArgs merged = args;
  if (!args.config_path.empty()) {
    std::ifstream is(args.config_path);
    if (!is) throw std::runtime_error("cannot open config: " + args.config_path);
    std::ostringstream ss;
    ss << is.rdbuf();
    const json j = json::parse(ss.str());
    if (j.contains("algo")) merged.algo = j["algo"].get<std::string>();
    if (j.contains("eta")) merged.eta = j["eta"].get<double>();
    if (j.contains("alpha")) merged.alpha = j["alpha"].get<double>();
    if (j.contains("n_grid")) merged.n_grid = j["n_grid"].get<std::vector<long>>();
    if (j.contains("seeds")) merged.seeds = j["seeds"].get<int>();
    if (j.contains("delta")) merged.delta = j["delta"].get<double>();
    if (j.contains("base_seed")) merged.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("workers")) merged.workers = j["workers"].get<int>();
    if (j.contains("instance")) merged.instance = j["instance"].get<std::string>();
    if (j.contains("generator")) {
      const json& g = j["generator"];
      merged.gen_states = g.value("num_states", 2);
      merged.gen_actions = g.value("num_actions", 2);
      merged.gen_seed = g.value("seed", std::uint64_t{0});
      merged.gen_ref_skew = g.value("ref_skew", 0.0);
    }
    if (j.contains("class")) {
      merged.class_size = j["class"].value("size", 16);
      merged.class_seed = j["class"].value("seed", std::uint64_t{7});
    }
    if (j.contains("out")) merged.out = j["out"].get<std::string>();
  }

  SweepConfig cfg;
  if (!merged.instance.empty()) {
    cfg.instance = load_instance(merged.instance);
  } else if (merged.gen_states > 0) {
    cfg.instance = random_instance(merged.gen_states, merged.gen_actions, merged.gen_seed,
                                   merged.gen_ref_skew);
  } else {
    throw std::runtime_error("sweep needs --instance or a generator spec");
  }
  cfg.fclass = random_function_class(cfg.instance, merged.class_size, merged.class_seed);
  cfg.algo = algo_from_name(merged.algo);
  const bool f_algo = cfg.algo == Algo::kFCb || cfg.algo == Algo::kFCdb;
  cfg.reg = f_algo ? Regularizer::chi2(merged.eta, merged.alpha) : Regularizer::kl(merged.eta);
  cfg.n_grid = merged.n_grid.empty() ? default_n_grid() : merged.n_grid;
  cfg.seeds = merged.seeds;
  cfg.delta = merged.delta;
  cfg.base_seed = merged.base_seed;
  cfg.workers = merged.workers;
  cfg.measure_runtime = merged.measure_runtime;
  return {std::move(cfg), merged.out};
}

int cmd_sweep(const SweepArgs& args) {
  const ResolvedSweep resolved = resolve_sweep_config(args);
  const auto rows = run_sweep(resolved.cfg);
  const std::string& out_path = resolved.out;
  if (out_path.empty()) {
    write_sweep_csv(std::cout, rows);
    return kExitOk;
  }
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open for writing: " + out_path);
  write_sweep_csv(os, rows);
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return kExitOk;
}

struct RateFitArgs {
  std::string in;
  std::string statistic = "median";
};

int cmd_rate_fit(const RateFitArgs& args) {
  std::ifstream is(args.in);
  if (!is) throw std::runtime_error("cannot open: " + args.in);
  const auto rows = read_sweep_csv(is);
  const RateStatistic stat =
      args.statistic == "mean" ? RateStatistic::kMean : RateStatistic::kMedian;
  const RateFitResult fit = rate_fit(rows, stat);
  json out;
  out["slope"] = fit.slope;
  out["intercept"] = fit.intercept;
  out["r2"] = fit.r2;
  out["statistic"] = args.statistic;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::string d2_family_dir;
  double d2_beta = 1.0;
};

int cmd_verify(const VerifyArgs& args) {
  if (!args.d2_family_dir.empty()) {
    // Divergence/concentrability table for a family's shared class against
    // its reference policy.
    const HardFamily family = load_family(args.d2_family_dir);
    const BanditInstance& inst = family.instances.at(0);
    const Table bandit = d2_table(family.shared_class, inst.ref_policy, inst.context_dist,
                                  D2Variant::kBandit);
    const Table dueling = d2_table(family.shared_class, inst.ref_policy, inst.context_dist,
                                   D2Variant::kDueling);
    const BonusTable bonus = bonus_table(family.shared_class, inst.ref_policy,
                                         inst.context_dist, args.d2_beta, D2Variant::kBandit);
    std::cout << "s,a,d2_bandit,d2_dueling,bonus\n";
    for (int s = 0; s < inst.num_states; ++s) {
      for (int a = 0; a < inst.num_actions; ++a) {
        std::cout << s << ',' << a << ',' << format_double(bandit(s, a)) << ','
                  << format_double(dueling(s, a)) << ',' << format_double(bonus.values(s, a))
                  << '\n';
      }
    }
    return kExitOk;
  }
  const VerifyReport report = verify(suite_from_name(args.suite), args.seed);
  print_report(std::cout, report);
  return report.all_pass() ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"f-divergence-regularized offline bandit experiments"};
  app.require_subcommand(1);

  GenInstanceArgs gen_args;
  auto* gen = app.add_subcommand("gen-instance", "write an instance JSON or a family directory");
  gen->add_option("--out", gen_args.out, "output path for a random instance");
  gen->add_option("--out-dir", gen_args.out_dir, "output directory for a family");
  gen->add_option("--family", gen_args.family, "kl | chi2 | dueling-kl | dueling-chi2");
  gen->add_option("--S,--num-states", gen_args.num_states, "number of states");
  gen->add_option("--A,--num-actions", gen_args.num_actions, "number of actions");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--ref-skew", gen_args.ref_skew, "reference-policy skew in [0,1]");
  gen->add_option("--c-star", gen_args.c_star, "target concentrability");
  gen->add_option("--eta", gen_args.eta, "inverse temperature");
  gen->add_option("--alpha", gen_args.alpha, "strong convexity modulus");
  gen->add_option("--n-target", gen_args.n_target, "sample size the family is built for");

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "draw an offline dataset CSV");
  sample->add_option("--instance", sample_args.instance, "instance JSON")->required();
  sample->add_option("--n", sample_args.n, "number of rows")->required();
  sample->add_option("--seed", sample_args.seed, "sampling seed");
  sample->add_option("--out", sample_args.out, "output CSV")->required();
  sample->add_flag("--preference", sample_args.preference, "draw preference comparisons");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run one algorithm on one sampled dataset");
  run->add_option("--algo", run_args.algo,
                  "kl_pcb | f_cb | kl_pcdb | f_cdb | ls_softmax_baseline");
  run->add_option("--instance", run_args.instance, "instance JSON");
  run->add_option("--data", run_args.data, "pre-sampled dataset CSV (skips internal sampling)");
  run->add_option("--family-dir", run_args.family_dir, "family directory (alternative source)");
  run->add_option("--family-index", run_args.family_index, "instance index within the family");
  run->add_option("--class-size", run_args.class_size, "size of the random function class");
  run->add_option("--class-seed", run_args.class_seed, "seed for the random function class");
  run->add_option("--eta", run_args.eta, "inverse temperature");
  run->add_option("--alpha", run_args.alpha, "strong convexity modulus (f algorithms)");
  run->add_option("--delta", run_args.delta, "confidence level");
  run->add_option("--n", run_args.n, "sample size");
  run->add_option("--base-seed", run_args.base_seed, "sweep base seed");
  run->add_option("--seed-index", run_args.seed_index, "seed index within the sweep");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "run an (n, seed) grid and write CSV");
  sweep->add_option("--config", sweep_args.config_path, "JSON config file");
  sweep->add_option("--algo", sweep_args.algo, "algorithm name");
  sweep->add_option("--instance", sweep_args.instance, "instance JSON");
  sweep->add_option("--out", sweep_args.out, "output CSV (stdout when omitted)");
  sweep->add_option("--n-grid", sweep_args.n_grid, "sample sizes (strictly increasing)");
  sweep->add_option("--seeds", sweep_args.seeds, "seeds per n");
  sweep->add_option("--eta", sweep_args.eta, "inverse temperature");
  sweep->add_option("--alpha", sweep_args.alpha, "strong convexity modulus");
  sweep->add_option("--delta", sweep_args.delta, "confidence level");
  sweep->add_option("--class-size", sweep_args.class_size, "random class size");
  sweep->add_option("--class-seed", sweep_args.class_seed, "random class seed");
  sweep->add_option("--base-seed", sweep_args.base_seed, "base seed for cell datasets");
  sweep->add_option("--workers", sweep_args.workers, "parallel workers");
  sweep->add_flag("--measure-runtime", sweep_args.measure_runtime,
                  "record wall-clock runtime_ms (off by default so output is reproducible)");
  sweep->add_option("--gen-S", sweep_args.gen_states, "generate instance: states");
  sweep->add_option("--gen-A", sweep_args.gen_actions, "generate instance: actions");
  sweep->add_option("--gen-seed", sweep_args.gen_seed, "generate instance: seed");
  sweep->add_option("--gen-ref-skew", sweep_args.gen_ref_skew, "generate instance: skew");

  RateFitArgs rate_args;
  auto* rate = app.add_subcommand("rate-fit", "fit log(subopt) against log(n)");
  rate->add_option("--in", rate_args.in, "sweep CSV")->required();
  rate->add_option("--statistic", rate_args.statistic, "median | mean");

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "run invariant checks / print D2 tables");
  verify_cmd->add_option("--suite", verify_args.suite,
                         "solvers | uncertainty | evaluation | lemmas | lower_bounds | all");
  verify_cmd->add_option("--seed", verify_args.seed, "seed for randomized checks");
  verify_cmd->add_option("--d2-table", verify_args.d2_family_dir,
                         "print s,a,d2_bandit,d2_dueling,bonus for a family directory");
  verify_cmd->add_option("--beta", verify_args.d2_beta, "radius used for the bonus column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_instance(gen_args);
    if (sample->parsed()) return cmd_sample(sample_args);
    if (run->parsed()) return cmd_run(run_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (rate->parsed()) return cmd_rate_fit(rate_args);
    if (verify_cmd->parsed()) return cmd_verify(verify_args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckFailure;
  }
  return kExitUsage;
}
