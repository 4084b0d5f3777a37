#include "fdbandits/instances.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace fdbandits {

namespace {

constexpr int kMaxSignStates = 20;  // 2^S instances; caps the hypercube families

std::string format_param(double x) { return format_double(x); }

void check(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

std::vector<int> signs_from_bits(std::uint64_t bits, int n) {
  std::vector<int> out(n);
  for (int s = 0; s < n; ++s) out[s] = (bits >> s) & 1 ? -1 : +1;
  return out;
}

}  // namespace

BanditInstance random_instance(int num_states, int num_actions, std::uint64_t seed,
                               double ref_skew) {
  check(num_states >= 1 && num_actions >= 1, "num_states and num_actions must be >= 1");
  check(ref_skew >= 0.0 && ref_skew <= 1.0, "ref_skew must be in [0,1]");
  Rng rng(seed);

  BanditInstance inst;
  inst.num_states = num_states;
  inst.num_actions = num_actions;
  inst.context_dist.assign(num_states, 1.0 / num_states);
  inst.mean_reward = Table(num_states, num_actions);
  for (double& r : inst.mean_reward.data()) r = rng.next_double();

  inst.ref_policy.probs = Table(num_states, num_actions);
  const double uniform = 1.0 / num_actions;
  for (int s = 0; s < num_states; ++s) {
    // Nearly-degenerate row: almost all mass on a random action.
    const int peak = static_cast<int>(rng.next_u64() % num_actions);
    double sum = 0.0;
    for (int a = 0; a < num_actions; ++a) {
      const double degenerate = a == peak ? 1.0 : 0.0;
      double p = (1.0 - ref_skew) * uniform + ref_skew * degenerate;
      p = std::max(p, 1e-4);
      inst.ref_policy.probs(s, a) = p;
      sum += p;
    }
    for (int a = 0; a < num_actions; ++a) inst.ref_policy.probs(s, a) /= sum;
  }
  inst.noise = NoiseModel::bernoulli();
  return inst;
}

FunctionClass random_function_class(const BanditInstance& inst, int size, std::uint64_t seed) {
  check(size >= 1, "class size must be >= 1");
  Rng rng(Rng::derive_seed(seed, 0x66636c73));
  FunctionClass fc;
  fc.members.reserve(size);
  for (int i = 0; i + 1 < size; ++i) {
    Table g(inst.num_states, inst.num_actions);
    for (double& v : g.data()) v = rng.next_double();
    fc.members.push_back(std::move(g));
  }
  const int truth_pos = size == 1 ? 0 : static_cast<int>(rng.next_u64() % size);
  fc.members.insert(fc.members.begin() + truth_pos, inst.mean_reward);
  fc.realizable_index = truth_pos;
  return fc;
}

FunctionClass perturbation_ladder_class(const BanditInstance& inst, const Table& direction,
                                        const std::vector<double>& scales) {
  check(direction.same_shape(inst.mean_reward), "direction shape mismatch");
  FunctionClass fc;
  bool has_truth = false;
  for (double c : scales) has_truth = has_truth || c == 0.0;
  std::vector<double> all = scales;
  if (!has_truth) all.insert(all.begin(), 0.0);
  for (double c : all) {
    Table g = inst.mean_reward;
    for (std::size_t k = 0; k < g.data().size(); ++k) g.data()[k] += c * direction.data()[k];
    for (double v : g.data()) {
      check(v >= 0.0 && v <= 1.0,
            "ladder member leaves [0,1] at scale " + format_param(c));
    }
    if (c == 0.0) fc.realizable_index = fc.size();
    fc.members.push_back(std::move(g));
  }
  return fc;
}

FunctionClass HardFamily::class_for(int i) const {
  FunctionClass fc = shared_class;
  fc.realizable_index = i;
  return fc;
}

HardFamily kl_hard_family(int num_states, double c_star, double eta, long n_target) {
  check(num_states >= 1, "num_states must be >= 1");
  check(num_states <= kMaxSignStates, "num_states too large for a 2^S sign family (max 20)");
  check(eta > 4.0 * std::log(2.0), "eta must exceed 4 log 2");
  check(c_star > 2.0 && c_star <= std::exp(eta / 4.0),
        "c_star must lie in (2, exp(eta/4)]");
  check(n_target >= static_cast<long>(std::ceil(16.0 * num_states * c_star)),
        "n_target must be at least 16 * S * c_star");

  const double alpha = std::log(c_star - 1.0) / eta;
  const double delta = std::sqrt(num_states * c_star / static_cast<double>(n_target));
  check(delta <= 0.25, "gap delta must be <= 1/4");
  check(alpha > 0.0 && alpha < 0.5, "derived alpha out of (0, 1/2)");

  HardFamily family;
  family.kind = FamilyKind::kKlBandit;
  family.params = {c_star, eta, alpha, delta, n_target};

  Policy pi_ref;
  pi_ref.probs = Table(num_states, 2);
  for (int s = 0; s < num_states; ++s) {
    pi_ref.probs(s, 0) = 1.0 / c_star;        // action "-1"
    pi_ref.probs(s, 1) = 1.0 - 1.0 / c_star;  // action "+1"
  }

  const std::uint64_t count = 1ULL << num_states;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const auto signs = signs_from_bits(bits, num_states);
    BanditInstance inst;
    inst.num_states = num_states;
    inst.num_actions = 2;
    inst.context_dist.assign(num_states, 1.0 / num_states);
    inst.ref_policy = pi_ref;
    inst.noise = NoiseModel::bernoulli();
    inst.mean_reward = Table(num_states, 2);
    for (int s = 0; s < num_states; ++s) {
      inst.mean_reward(s, 0) = 0.5 + signs[s] * delta;
      inst.mean_reward(s, 1) = 0.5 - alpha;
    }
    family.shared_class.members.push_back(inst.mean_reward);
    family.index_signs.push_back(signs);
    family.instances.push_back(std::move(inst));
  }
  return family;
}

HardFamily chi2_hard_family(int num_states, double alpha, double eta, long n_target) {
  check(alpha > 0.0 && eta > 0.0, "alpha and eta must be positive");
  check(num_states >= 32.0 * std::log(2.0), "num_states must be at least 32 log 2 (>= 23)");
  const double ratio = eta / alpha;
  check(static_cast<double>(n_target) >= num_states * std::max(16.0, ratio * ratio),
        "n_target must be at least S * max{16, eta^2/alpha^2}");

  const double delta = 16.0 * std::sqrt(alpha / (eta * static_cast<double>(n_target)));
  check(delta <= 0.5,
        "gap delta=" + format_param(delta) + " exceeds mean validity (means must stay in [0,1])");
  check(delta <= alpha / eta,
        "gap delta=" + format_param(delta) + " exceeds alpha/eta (optimal policy not interior)");

  HardFamily family;
  family.kind = FamilyKind::kChi2Bandit;
  family.params = {0.0, eta, alpha, delta, n_target};

  for (const auto& signs : gv_code(num_states)) {
    BanditInstance inst;
    inst.num_states = num_states;
    inst.num_actions = 2;
    inst.context_dist.assign(num_states, 1.0 / num_states);
    inst.ref_policy = uniform_policy(num_states, 2);
    inst.noise = NoiseModel::bernoulli();
    inst.mean_reward = Table(num_states, 2);
    for (int s = 0; s < num_states; ++s) {
      inst.mean_reward(s, 0) = 0.5 + signs[s] * delta;
      inst.mean_reward(s, 1) = 0.5 - signs[s] * delta;
    }
    family.shared_class.members.push_back(inst.mean_reward);
    family.index_signs.push_back(signs);
    family.instances.push_back(std::move(inst));
  }
  return family;
}

HardFamily dueling_hard_family(int num_states, double c_star, double eta, long n_target,
                               DuelingFamilyKind kind, double alpha) {
  if (kind == DuelingFamilyKind::kKl) {
    HardFamily family = kl_hard_family(num_states, c_star, eta, n_target);
    family.kind = FamilyKind::kKlDueling;
    family.preference = true;
    return family;
  }

  check(alpha > 0.0 && eta > 0.0, "alpha and eta must be positive");
  check(num_states >= 1, "num_states must be >= 1");
  check(num_states <= kMaxSignStates, "num_states too large for a 2^S sign family (max 20)");
  const double ratio = eta / alpha;
  check(static_cast<double>(n_target) >= num_states * std::max(16.0, ratio * ratio),
        "n_target must be at least S * max{16, eta^2/alpha^2}");
  const double delta = std::sqrt(num_states / static_cast<double>(n_target));
  check(delta <= 0.25, "gap delta=" + format_param(delta) + " must be <= 0.25");
  check(delta <= alpha / eta,
        "gap delta=" + format_param(delta) + " exceeds alpha/eta (optimal policy not interior)");

  HardFamily family;
  family.kind = FamilyKind::kChi2Dueling;
  family.preference = true;
  family.params = {c_star, eta, alpha, delta, n_target};

  const std::uint64_t count = 1ULL << num_states;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const auto signs = signs_from_bits(bits, num_states);
    BanditInstance inst;
    inst.num_states = num_states;
    inst.num_actions = 2;
    inst.context_dist.assign(num_states, 1.0 / num_states);
    inst.ref_policy = uniform_policy(num_states, 2);
    inst.noise = NoiseModel::bernoulli();
    inst.mean_reward = Table(num_states, 2);
    for (int s = 0; s < num_states; ++s) {
      // r(s, a) = 1/2 + a tau_s delta with the action labels {-1, +1}.
      inst.mean_reward(s, 0) = 0.5 - signs[s] * delta;
      inst.mean_reward(s, 1) = 0.5 + signs[s] * delta;
    }
    family.shared_class.members.push_back(inst.mean_reward);
    family.index_signs.push_back(signs);
    family.instances.push_back(std::move(inst));
  }
  return family;
}

// ---------------------------------------------------------------------------
// Gilbert-Varshamov greedy code
// ---------------------------------------------------------------------------

namespace {

// Scans candidate blocks in parallel against a snapshot of the kept set;
// survivors are then confirmed sequentially, so the output equals the plain
// sequential greedy scan.
std::vector<std::uint32_t> greedy_code_words(int n, int min_dist) {
  const std::uint64_t total = 1ULL << n;
  std::vector<std::uint32_t> kept;
  kept.push_back(0);  // all-(+1) survives trivially

  const auto far_from = [&](std::uint32_t c, std::size_t from) {
    for (std::size_t i = from; i < kept.size(); ++i) {
      if (std::popcount(c ^ kept[i]) < min_dist) return false;
    }
    return true;
  };

  // Branchless prefilter against the first four kept words kills almost all
  // candidates without mispredicted branches.
  const auto scan_range = [&](std::uint64_t lo, std::uint64_t hi, std::size_t snapshot,
                              std::vector<std::uint32_t>& out) {
    std::uint32_t pre[2] = {0, 0};
    const std::size_t npre = std::min<std::size_t>(snapshot, 2);
    for (std::size_t i = 0; i < npre; ++i) pre[i] = kept[i];
    for (std::uint64_t c = lo; c < hi; ++c) {
      const auto cand = static_cast<std::uint32_t>(c);
      unsigned bad = 0;
      for (std::size_t i = 0; i < npre; ++i) {
        bad |= static_cast<unsigned>(std::popcount(cand ^ pre[i]) < min_dist);
      }
      if (bad) continue;
      bool ok = true;
      for (std::size_t i = npre; i < snapshot; ++i) {
        if (std::popcount(cand ^ kept[i]) < min_dist) {
          ok = false;
          break;
        }
      }
      if (ok) out.push_back(cand);
    }
  };

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  constexpr std::uint64_t kBlock = 1ULL << 24;
  for (std::uint64_t base = 1; base < total; base += kBlock) {
    const std::uint64_t end = std::min(total, base + kBlock);
    const std::size_t snapshot = kept.size();
    std::vector<std::vector<std::uint32_t>> survivors(workers);
    if (workers == 1 || end - base < 4096) {
      scan_range(base, end, snapshot, survivors[0]);
    } else {
      const std::uint64_t chunk = (end - base + workers - 1) / workers;
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          const std::uint64_t lo = base + w * chunk;
          const std::uint64_t hi = std::min(end, lo + chunk);
          scan_range(lo, hi, snapshot, survivors[w]);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (const auto& chunk_survivors : survivors) {
      for (std::uint32_t c : chunk_survivors) {
        if (far_from(c, snapshot)) kept.push_back(c);
      }
    }
  }
  return kept;
}

}  // namespace

std::vector<std::vector<int>> gv_code(int num_states) {
  check(num_states >= 8, "num_states must be >= 8");
  check(num_states <= 32, "num_states must be <= 32 for the exhaustive greedy scan");
  const int min_dist = (num_states + 1) / 2;  // Hamming distance >= S/2

  const auto words = greedy_code_words(num_states, min_dist);
  const auto required = static_cast<std::size_t>(std::ceil(std::exp(num_states / 8.0)));
  if (words.size() < required) {
    throw std::logic_error("greedy code fell short of exp(S/8) codewords");
  }

  std::vector<std::vector<int>> out;
  out.reserve(words.size());
  for (std::uint32_t w : words) out.push_back(signs_from_bits(w, num_states));
  return out;
}

// ---------------------------------------------------------------------------
// Samplers
// ---------------------------------------------------------------------------

Dataset sample_bandit_data(const BanditInstance& inst, long n, std::uint64_t seed) {
  check(n >= 1, "n must be positive");
  Rng rng(seed);
  Dataset data;
  data.rows.reserve(n);
  for (long i = 0; i < n; ++i) {
    const int s = rng.next_categorical(inst.context_dist);
    const int a = rng.next_categorical(inst.ref_policy.probs.row(s));
    const double mean = inst.mean_reward(s, a);
    double r;
    if (inst.noise.kind == NoiseKind::kBernoulli) {
      r = rng.next_bernoulli(mean) ? 1.0 : 0.0;
    } else {
      r = rng.next_gaussian(mean, inst.noise.sigma);
    }
    data.rows.push_back({s, a, r});
  }
  return data;
}

PreferenceDataset sample_preference_data(const BanditInstance& inst, long n,
                                         std::uint64_t seed) {
  check(n >= 1, "n must be positive");
  Rng rng(seed);
  PreferenceDataset data;
  data.rows.reserve(n);
  for (long i = 0; i < n; ++i) {
    const int s = rng.next_categorical(inst.context_dist);
    const int a1 = rng.next_categorical(inst.ref_policy.probs.row(s));
    const int a2 = rng.next_categorical(inst.ref_policy.probs.row(s));
    const double diff = inst.mean_reward(s, a1) - inst.mean_reward(s, a2);
    const double p = 1.0 / (1.0 + std::exp(-diff));
    data.rows.push_back({s, a1, a2, rng.next_bernoulli(p) ? 1 : 0});
  }
  return data;
}

// ---------------------------------------------------------------------------
// Family serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

std::string kind_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kKlBandit: return "kl";
    case FamilyKind::kChi2Bandit: return "chi2";
    case FamilyKind::kKlDueling: return "dueling_kl";
    case FamilyKind::kChi2Dueling: return "dueling_chi2";
  }
  return "kl";
}

FamilyKind kind_from_name(const std::string& name) {
  if (name == "kl") return FamilyKind::kKlBandit;
  if (name == "chi2") return FamilyKind::kChi2Bandit;
  if (name == "dueling_kl") return FamilyKind::kKlDueling;
  if (name == "dueling_chi2") return FamilyKind::kChi2Dueling;
  throw std::invalid_argument("unknown family kind: " + name);
}

json table_rows(const Table& t) {
  json rows = json::array();
  for (int s = 0; s < t.rows(); ++s) {
    json row = json::array();
    for (int a = 0; a < t.cols(); ++a) row.push_back(t(s, a));
    rows.push_back(std::move(row));
  }
  return rows;
}

Table table_from(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Table t(rows, cols);
  for (int s = 0; s < rows; ++s) {
    for (int a = 0; a < cols; ++a) t(s, a) = j.at(s).at(a).get<double>();
  }
  return t;
}

std::string instance_file_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "instance_%03d.json", i);
  return buf;
}

}  // namespace

void save_family(const HardFamily& family, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json manifest;
  manifest["kind"] = kind_name(family.kind);
  manifest["preference"] = family.preference;
  manifest["params"] = {{"c_star", family.params.c_star}, {"eta", family.params.eta},
                        {"alpha", family.params.alpha},   {"delta", family.params.delta},
                        {"n_target", family.params.n_target}};
  manifest["index_signs"] = family.index_signs;
  json members = json::array();
  for (const Table& g : family.shared_class.members) members.push_back(table_rows(g));
  manifest["members"] = std::move(members);
  json files = json::array();
  for (int i = 0; i < static_cast<int>(family.instances.size()); ++i) {
    const std::string name = instance_file_name(i);
    save_instance(family.instances[i], (fs::path(dir) / name).string());
    files.push_back(name);
  }
  manifest["instance_files"] = std::move(files);
  std::ofstream os(fs::path(dir) / "family.json");
  if (!os) throw std::runtime_error("cannot write family manifest in " + dir);
  os << manifest.dump(2) << "\n";
}

HardFamily load_family(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(dir) / "family.json");
  if (!is) throw std::runtime_error("cannot open family manifest in " + dir);
  std::ostringstream ss;
  ss << is.rdbuf();
  const json manifest = json::parse(ss.str());

  HardFamily family;
  family.kind = kind_from_name(manifest.at("kind").get<std::string>());
  family.preference = manifest.at("preference").get<bool>();
  const json& p = manifest.at("params");
  family.params = {p.at("c_star").get<double>(), p.at("eta").get<double>(),
                   p.at("alpha").get<double>(), p.at("delta").get<double>(),
                   p.at("n_target").get<long>()};
  family.index_signs = manifest.at("index_signs").get<std::vector<std::vector<int>>>();
  for (const json& m : manifest.at("members")) family.shared_class.members.push_back(table_from(m));
  for (const json& f : manifest.at("instance_files")) {
    family.instances.push_back(load_instance((fs::path(dir) / f.get<std::string>()).string()));
  }
  return family;
}

}  // namespace fdbandits
