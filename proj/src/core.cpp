#include "fdbandits/core.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fdbandits {

namespace {

std::uint64_t splitmix_output(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4B9C15ULL;

}  // namespace

Rng::Rng(std::uint64_t seed) : state_(splitmix_output(seed + kGolden)) {}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return splitmix_output(state_);
}

std::uint64_t Rng::derive_seed(std::uint64_t seed, std::uint64_t index) {
  // Two mixing rounds keep substreams of nearby (seed, index) pairs apart.
  return splitmix_output(splitmix_output(seed + kGolden * (index + 1)) + kGolden);
}

double Rng::next_gaussian(double mean, double stddev) {
  const double u1 = next_open_double();
  const double u2 = next_double();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
}

int Rng::next_categorical(std::span<const double> probs) {
  const double u = next_double();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u can exceed the accumulated sum by rounding; fall back to the last
  // positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

Table table_diff(const Table& a, const Table& b) {
  Table out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.data().size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

double sup_distance(const Table& a, const Table& b) {
  double sup = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    sup = std::max(sup, std::abs(a.data()[i] - b.data()[i]));
  }
  return sup;
}

Policy uniform_policy(int num_states, int num_actions) {
  Policy pi;
  pi.probs = Table(num_states, num_actions, 1.0 / num_actions);
  return pi;
}

// ---------------------------------------------------------------------------
// Regularizer factories
// ---------------------------------------------------------------------------

Regularizer Regularizer::kl(double eta) {
  if (eta < 0.0) throw std::invalid_argument("eta must be nonnegative");
  Regularizer reg;
  reg.kind = Kind::kKl;
  reg.eta = eta;
  return reg;
}

Regularizer Regularizer::chi2(double eta, double alpha) {
  if (eta <= 0.0) throw std::invalid_argument("eta must be positive for f-divergences");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  Regularizer reg;
  reg.kind = Kind::kFDiv;
  reg.eta = eta;
  reg.alpha = alpha;
  reg.f = [alpha](double x) { return 0.5 * alpha * (x - 1.0) * (x - 1.0); };
  reg.f_prime = [alpha](double x) { return alpha * (x - 1.0); };
  reg.f_second = [alpha](double) { return alpha; };
  reg.f_prime_inverse = [alpha](double y) { return 1.0 + y / alpha; };
  return reg;
}

Regularizer Regularizer::kl_as_fdiv(double eta) {
  if (eta <= 0.0) throw std::invalid_argument("eta must be positive for f-divergences");
  Regularizer reg;
  reg.kind = Kind::kFDiv;
  reg.eta = eta;
  reg.f = [](double x) { return x <= 0.0 ? 0.0 : x * std::log(x); };
  reg.f_prime = [](double x) { return std::log(x) + 1.0; };
  reg.f_second = [](double x) { return 1.0 / x; };
  reg.f_prime_inverse = [](double y) { return std::exp(y - 1.0); };
  // 1/x over the check grid bottoms out at the largest grid point.
  const auto grid = regularizer_check_grid();
  reg.alpha = 1.0 / grid.back();
  return reg;
}

Regularizer Regularizer::fdiv(double eta, ScalarFn f, ScalarFn f_prime, ScalarFn f_second,
                              double alpha, ScalarFn f_prime_inverse) {
  if (eta <= 0.0) throw std::invalid_argument("eta must be positive for f-divergences");
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  Regularizer reg;
  reg.kind = Kind::kFDiv;
  reg.eta = eta;
  reg.f = std::move(f);
  reg.f_prime = std::move(f_prime);
  reg.f_second = std::move(f_second);
  reg.alpha = alpha;
  reg.f_prime_inverse = std::move(f_prime_inverse);
  const auto violations = validate_regularizer(reg);
  if (!violations.empty()) throw std::invalid_argument(violations.front());
  return reg;
}

std::vector<double> regularizer_check_grid() {
  // Log-spaced over [1e-3, 1e3], 61 points.
  std::vector<double> grid;
  grid.reserve(61);
  for (int i = 0; i <= 60; ++i) grid.push_back(std::pow(10.0, -3.0 + i * 0.1));
  return grid;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

std::string fmt(const char* pattern, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, value);
  return buf;
}

}  // namespace

std::vector<std::string> validate_policy_table(const Table& probs, double tol,
                                               const std::string& name) {
  std::vector<std::string> out;
  for (int s = 0; s < probs.rows(); ++s) {
    double sum = 0.0;
    for (int a = 0; a < probs.cols(); ++a) {
      const double p = probs(s, a);
      if (!(p >= 0.0)) {
        out.push_back(name + " row " + std::to_string(s) + " has negative entry at action " +
                      std::to_string(a));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
      out.push_back(name + " row " + std::to_string(s) + " sums to " + fmt("%.12g", sum));
    }
  }
  return out;
}

std::vector<std::string> validate_instance(const BanditInstance& inst) {
  std::vector<std::string> out;
  if (inst.num_states < 1) out.push_back("num_states must be positive");
  if (inst.num_actions < 1) out.push_back("num_actions must be positive");
  if (static_cast<int>(inst.context_dist.size()) != inst.num_states) {
    out.push_back("context_dist length != num_states");
    return out;
  }
  if (inst.mean_reward.rows() != inst.num_states || inst.mean_reward.cols() != inst.num_actions) {
    out.push_back("mean_reward shape mismatch");
    return out;
  }
  if (inst.ref_policy.probs.rows() != inst.num_states ||
      inst.ref_policy.probs.cols() != inst.num_actions) {
    out.push_back("ref_policy shape mismatch");
    return out;
  }

  double rho_sum = 0.0;
  for (int s = 0; s < inst.num_states; ++s) {
    if (!(inst.context_dist[s] >= 0.0)) {
      out.push_back("context_dist has negative entry at state " + std::to_string(s));
    }
    rho_sum += inst.context_dist[s];
  }
  if (std::abs(rho_sum - 1.0) > kInputProbTol) {
    out.push_back("context_dist sums to " + fmt("%.12g", rho_sum));
  }

  for (int s = 0; s < inst.num_states; ++s) {
    for (int a = 0; a < inst.num_actions; ++a) {
      const double r = inst.mean_reward(s, a);
      if (!(r >= 0.0 && r <= 1.0)) {
        out.push_back("mean_reward entry " + fmt("%.12g", r) + " out of [0,1] at (s=" +
                      std::to_string(s) + ", a=" + std::to_string(a) + ")");
      }
    }
  }

  auto pol = validate_policy_table(inst.ref_policy.probs, kInputProbTol, "ref_policy");
  out.insert(out.end(), pol.begin(), pol.end());

  if (inst.noise.kind == NoiseKind::kGaussian && !(inst.noise.sigma >= 0.0)) {
    out.push_back("gaussian noise sigma must be nonnegative");
  }
  return out;
}

std::vector<std::string> validate_function_class(const FunctionClass& fc,
                                                 const BanditInstance& inst) {
  std::vector<std::string> out;
  if (fc.members.empty()) {
    out.push_back("empty hypothesis class");
    return out;
  }
  for (int i = 0; i < fc.size(); ++i) {
    const Table& g = fc.members[i];
    if (g.rows() != inst.num_states || g.cols() != inst.num_actions) {
      out.push_back("member " + std::to_string(i) + " shape mismatch");
      continue;
    }
    for (double v : g.data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        out.push_back("member " + std::to_string(i) + " has entry out of [0,1]");
        break;
      }
    }
  }
  if (fc.realizable_index) {
    const int idx = *fc.realizable_index;
    if (idx < 0 || idx >= fc.size()) {
      out.push_back("realizable_index out of range");
    } else if (!(fc.members[idx] == inst.mean_reward)) {
      out.push_back("members[realizable_index] differs from instance mean_reward");
    }
  }
  return out;
}

std::vector<std::string> validate_regularizer(const Regularizer& reg) {
  std::vector<std::string> out;
  if (reg.kind == Regularizer::Kind::kKl) {
    if (!(reg.eta >= 0.0)) out.push_back("eta must be nonnegative");
    return out;
  }
  if (!(reg.eta > 0.0)) out.push_back("eta must be positive");
  if (!(reg.alpha > 0.0)) out.push_back("alpha must be positive");
  if (!reg.f || !reg.f_prime || !reg.f_second) {
    out.push_back("FDiv regularizer must provide f, f', f''");
    return out;
  }
  if (std::abs(reg.f(1.0)) > 1e-12) {
    out.push_back("f(1) = " + fmt("%.12g", reg.f(1.0)) + ", expected 0");
  }
  for (double x : regularizer_check_grid()) {
    if (reg.f_second(x) < reg.alpha - 1e-9) {
      out.push_back("f''(" + fmt("%.6g", x) + ") = " + fmt("%.6g", reg.f_second(x)) +
                    " below alpha = " + fmt("%.6g", reg.alpha));
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

json table_to_json(const Table& t) {
  json rows = json::array();
  for (int s = 0; s < t.rows(); ++s) {
    json row = json::array();
    for (int a = 0; a < t.cols(); ++a) row.push_back(t(s, a));
    rows.push_back(std::move(row));
  }
  return rows;
}

Table table_from_json(const json& j) {
  const int rows = static_cast<int>(j.size());
  const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
  Table t(rows, cols);
  for (int s = 0; s < rows; ++s) {
    for (int a = 0; a < cols; ++a) t(s, a) = j.at(s).at(a).get<double>();
  }
  return t;
}

}  // namespace

std::string instance_to_json(const BanditInstance& inst) {
  json j;
  j["num_states"] = inst.num_states;
  j["num_actions"] = inst.num_actions;
  j["context_dist"] = inst.context_dist;
  j["mean_reward"] = table_to_json(inst.mean_reward);
  j["ref_policy"] = table_to_json(inst.ref_policy.probs);
  json noise;
  if (inst.noise.kind == NoiseKind::kBernoulli) {
    noise["kind"] = "bernoulli";
  } else {
    noise["kind"] = "gaussian";
    noise["sigma"] = inst.noise.sigma;
  }
  j["noise"] = noise;
  return j.dump(2);
}

BanditInstance instance_from_json(const std::string& text) {
  const json j = json::parse(text);
  BanditInstance inst;
  inst.num_states = j.at("num_states").get<int>();
  inst.num_actions = j.at("num_actions").get<int>();
  inst.context_dist = j.at("context_dist").get<std::vector<double>>();
  inst.mean_reward = table_from_json(j.at("mean_reward"));
  inst.ref_policy.probs = table_from_json(j.at("ref_policy"));
  const json& noise = j.at("noise");
  const std::string kind = noise.at("kind").get<std::string>();
  if (kind == "bernoulli") {
    inst.noise = NoiseModel::bernoulli();
  } else if (kind == "gaussian") {
    inst.noise = NoiseModel::gaussian(noise.at("sigma").get<double>());
  } else {
    throw std::invalid_argument("unknown noise kind: " + kind);
  }
  return inst;
}

void save_instance(const BanditInstance& inst, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << instance_to_json(inst) << "\n";
}

BanditInstance load_instance(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return instance_from_json(ss.str());
}

std::string format_double(double x) {
  char buf[40];
  // %.17g always round-trips; prefer the shortest representation that does.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
  os << "s,a,r\n";
  for (const auto& row : data.rows) {
    os << row.s << ',' << row.a << ',' << format_double(row.r) << '\n';
  }
}

void write_dataset_csv(std::ostream& os, const PreferenceDataset& data) {
  os << "s,a1,a2,y\n";
  for (const auto& row : data.rows) {
    os << row.s << ',' << row.a1 << ',' << row.a2 << ',' << row.y << '\n';
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Dataset read_dataset_csv(std::istream& is) {
  Dataset data;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty dataset file");
  if (split_csv_line(line) != std::vector<std::string>{"s", "a", "r"}) {
    throw std::runtime_error("expected header s,a,r");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw std::runtime_error("malformed dataset row: " + line);
    data.rows.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stod(f[2])});
  }
  return data;
}

PreferenceDataset read_preference_csv(std::istream& is) {
  PreferenceDataset data;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty dataset file");
  if (split_csv_line(line) != std::vector<std::string>{"s", "a1", "a2", "y"}) {
    throw std::runtime_error("expected header s,a1,a2,y");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw std::runtime_error("malformed preference row: " + line);
    data.rows.push_back({std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3])});
  }
  return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_dataset_csv(os, data);
}

void save_dataset(const PreferenceDataset& data, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_dataset_csv(os, data);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_dataset_csv(is);
}

PreferenceDataset load_preference_dataset(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_preference_csv(is);
}

}  // namespace fdbandits
