// Copyright 2026 The hlmetro Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hlmetro/harness.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hlmetro/baselines.hpp"
#include "hlmetro/cluster_sampler.hpp"
#include "hlmetro/errors.hpp"
#include "hlmetro/locc.hpp"
#include "hlmetro/metrology.hpp"
#include "hlmetro/mps_backend.hpp"
#include "hlmetro/numerics.hpp"
#include "hlmetro/parallel.hpp"

namespace hlm {

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, int n, std::uint64_t index) {
  std::uint64_t k = SplitMix64::mix(seed + 0x9e3779b97f4a7c15ULL);
  k = SplitMix64::mix(k ^ (static_cast<std::uint64_t>(n) << 32));
  return SplitMix64::mix(k + index);
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError("config: '" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw ValidationError("config: '" + key + "' expects an integer");
  return static_cast<long long>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError("config: '" + key + "' expects true or false");
}

struct Frequencies {
  PriorInterval prior;
  double omega_true = 0.0;
};

Frequencies frequencies(const ExperimentConfig& cfg, int n) {
  Frequencies f;
  if (cfg.omega_true) {
    f.omega_true = *cfg.omega_true;
    f.prior = cfg.omega_prime ? prior_interval_at(*cfg.omega_prime, n, cfg.t)
                              : prior_interval(f.omega_true, n, cfg.t);
    if (!f.prior.contains(f.omega_true))
      throw ValidationError("omega_true lies outside the prior interval around omega_prime at N = " +
                            std::to_string(n));
  } else {
    f.prior = cfg.omega_prime ? prior_interval_at(*cfg.omega_prime, n, cfg.t)
                              : prior_interval(cfg.omega, n, cfg.t);
    f.omega_true = f.prior.omega_prime + cfg.offset * f.prior.half_width;
  }
  return f;
}

int parity_of(Mask x) { return (std::popcount(x) & 1) ? -1 : 1; }

// Inverse-CDF sampler over a full outcome distribution.
class TableSampler {
 public:
  explicit TableSampler(const std::vector<double>& p) : cdf_(p.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) cdf_[i] = s += p[i];
    for (double& c : cdf_) c /= s;
  }
  template <typename Rng>
  Mask operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u(rng));
    return static_cast<Mask>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
  }

 private:
  std::vector<double> cdf_;
};

void finish(CampaignRow& row, std::chrono::steady_clock::time_point start) {
  const int R = static_cast<int>(row.estimates.size());
  double se = 0.0, mean = 0.0;
  for (double w : row.estimates) {
    se += (w - row.omega_true) * (w - row.omega_true);
    mean += w;
  }
  row.delta_omega = std::sqrt(se / R);
  row.omega_est = mean / R;
  const auto lim = precision_limits(row.n, row.shots, row.t);
  row.hl = lim.hl;
  row.sql = lim.sql;
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Bisection for a monotone scalar map on [lo, hi]; clamps outside its range.
double invert_monotone(const std::function<double(double)>& g, double target, double lo, double hi,
                       double tol, bool* clamped) {
  double glo = g(lo), ghi = g(hi);
  const bool increasing = ghi > glo;
  if (!increasing) {
    std::swap(glo, ghi);
  }
  if (target <= glo || target >= ghi) {
    *clamped = true;
    const bool at_lo = (target <= glo) == increasing;
    return at_lo ? lo : hi;
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    ((g(mid) < target) == increasing ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

std::string ExperimentConfig::text() const {
  std::ostringstream os;
  os << "model = " << model << "\n";
  if (model == "file") os << "hamiltonian_file = " << hamiltonian_file << "\n";
  os << "J = " << num(J) << "\n";
  os << "state = " << state << "\n";
  if (state == "rotated_ghz") os << "theta = " << num(theta) << "\n";
  os << "backend = " << backend << "\n";
  os << "N = [";
  for (std::size_t i = 0; i < sizes.size(); ++i) os << (i ? ", " : "") << sizes[i];
  os << "]\n";
  os << "t = " << num(t) << "\n";
  if (omega_true) os << "omega_true = " << num(*omega_true) << "\n";
  else os << "omega = " << num(omega) << "\noffset = " << num(offset) << "\n";
  if (omega_prime) os << "omega_prime = " << num(*omega_prime) << "\n";
  os << "M = " << shots << "\n";
  os << "campaigns = " << campaigns << "\n";
  os << "reference_shots = " << reference_shots << "\n";
  os << "seed = " << seed << "\n";
  os << "bisection_tol = " << num(bisection_tol) << "\n";
  if (backend == "cluster")
    os << "cluster_order = " << cluster_order << "\nc_m = " << num(c_m)
       << "\nallow_unsafe = " << (allow_unsafe ? "true" : "false") << "\n";
  if (backend == "mps") os << "d_max = " << d_max << "\n";
  os << "naive_window = " << num(naive_window) << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : text()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError("config: " + m); };
  if (model != "ising" && model != "none" && model != "file") fail("model must be ising, none or file");
  if (model == "file" && hamiltonian_file.empty()) fail("model = file needs hamiltonian_file");
  if (state != "ghz" && state != "rotated_ghz") fail("state must be ghz or rotated_ghz");
  if (backend != "exact" && backend != "mps" && backend != "cluster")
    fail("backend must be exact, mps or cluster");
  if (backend == "cluster" && state != "ghz") fail("the cluster backend supports the GHZ state only");
  if (sizes.empty()) fail("N list is empty");
  for (int n : sizes)
    if (n < 1) fail("N must be positive");
  if (!(t > 0)) fail("t must be positive");
  if (!(J >= 0)) fail("J must be nonnegative");
  if (!(std::abs(offset) < 1)) fail("offset must lie in (-1, 1)");
  if (shots < 1 || campaigns < 1 || reference_shots < 0) fail("shot and campaign counts must be positive");
  if (!(bisection_tol > 0)) fail("bisection_tol must be positive");
  if (cluster_order < 1) fail("cluster_order must be positive");
  if (!(c_m > 0) || c_m > 1 / std::sqrt(2.0) + 1e-12) fail("c_m must lie in (0, 1/sqrt 2]");
  if (d_max < 1) fail("d_max must be positive");
  if (!(naive_window > 0)) fail("naive_window must be positive");
}

std::vector<int> parse_sizes(const std::string& list) {
  std::string s = trim(list);
  if (!s.empty() && s.front() == '[') s = s.substr(1);
  if (!s.empty() && s.back() == ']') s.pop_back();
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(static_cast<int>(to_int("N", item)));
  }
  if (out.empty()) throw ValidationError("empty N list");
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;  // section headers are ignored
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = unquote(trim(line.substr(eq + 1)));
    if (key == "model") c.model = v;
    else if (key == "hamiltonian_file") c.hamiltonian_file = v;
    else if (key == "J") c.J = to_double(key, v);
    else if (key == "state") c.state = v;
    else if (key == "theta") c.theta = to_double(key, v);
    else if (key == "backend") c.backend = v;
    else if (key == "N") c.sizes = parse_sizes(v);
    else if (key == "t") c.t = to_double(key, v);
    else if (key == "omega") c.omega = to_double(key, v);
    else if (key == "offset") c.offset = to_double(key, v);
    else if (key == "omega_true") c.omega_true = to_double(key, v);
    else if (key == "omega_prime") c.omega_prime = to_double(key, v);
    else if (key == "M") c.shots = static_cast<int>(to_int(key, v));
    else if (key == "campaigns") c.campaigns = static_cast<int>(to_int(key, v));
    else if (key == "reference_shots") c.reference_shots = static_cast<int>(to_int(key, v));
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_int(key, v));
    else if (key == "output") c.output = v;
    else if (key == "bisection_tol") c.bisection_tol = to_double(key, v);
    else if (key == "cluster_order") c.cluster_order = static_cast<int>(to_int(key, v));
    else if (key == "c_m") c.c_m = to_double(key, v);
    else if (key == "allow_unsafe") c.allow_unsafe = to_bool(key, v);
    else if (key == "d_max") c.d_max = static_cast<int>(to_int(key, v));
    else if (key == "naive_window") c.naive_window = to_double(key, v);
    else throw ValidationError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

PerturbedHamiltonian build_model(const ExperimentConfig& cfg, int n, double omega) {
  if (cfg.model == "none" || (cfg.model == "ising" && cfg.J == 0.0)) return field_only(n, omega);
  if (cfg.model == "ising") return ising_chain(n, cfg.J, omega);
  std::ifstream in(cfg.hamiltonian_file);
  if (!in) throw ValidationError("cannot read hamiltonian file " + cfg.hamiltonian_file);
  std::stringstream ss;
  ss << in.rdbuf();
  const PerturbedHamiltonian H = parse_hamiltonian(ss.str());
  if (H.n() != n)
    throw ValidationError("hamiltonian file has " + std::to_string(H.n()) + " qubits, run asks for " +
                          std::to_string(n));
  return make_hamiltonian(H.graph, H.terms, omega);
}

SuperposedPair build_state(const ExperimentConfig& cfg, int n) {
  if (cfg.state == "ghz") return make_ghz(n);
  return make_rotated_ghz(n, std::cos(cfg.theta), std::sin(cfg.theta));
}

CampaignRow run_locc_size(const ExperimentConfig& cfg, int n) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Frequencies fq = frequencies(cfg, n);
  const PerturbedHamiltonian Hp = build_model(cfg, n, fq.prior.omega_prime);
  const PerturbedHamiltonian Hw = build_model(cfg, n, fq.omega_true);
  const SuperposedPair pair = build_state(cfg, n);
  const std::vector<int> order = default_order(n);
  const double t = cfg.t;

  std::unique_ptr<BasisProvider> provider;
  OutcomeTree device;
  std::optional<double> exact_reference;
  std::vector<double> reference;  // sampled route
  if (cfg.backend == "exact") {
    auto [phi0, phi1] = evolved_pair(pair, Hp, t);
    provider = std::make_unique<ExactProvider>(std::move(phi0), std::move(phi1), order);
    device = build_outcome_tree(evolve(pair.combined(), Hw, t), *provider);
    exact_reference = parity_expectation(build_outcome_tree(evolve(pair.combined(), Hp, t), *provider));
  } else if (cfg.backend == "mps") {
    try {
      split_chain(Hp);
    } catch (const StructuralError&) {
      throw ValidationError("the mps backend needs a nearest-neighbour chain");
    }
    TrotterOptions opt;
    opt.trunc.d_max = cfg.d_max;
    auto m0 = evolve_mps(mps_from_dense(pair.branch0), Hp, t, opt);
    auto m1 = evolve_mps(mps_from_dense(pair.branch1), Hp, t, opt);
    provider = std::make_unique<MpsProvider>(std::move(m0), std::move(m1), order);
    device = build_outcome_tree(evolve_mps(mps_from_dense(pair.combined()), Hw, t, opt), *provider);
    reference = outcome_distribution(
        build_outcome_tree(evolve_mps(mps_from_dense(pair.combined()), Hp, t, opt), *provider));
  } else {
    SamplerParams params = make_sampler_params(interaction_picture(Hp, t), cfg.c_m, cfg.cluster_order);
    params.allow_unsafe = cfg.allow_unsafe;
    provider = std::make_unique<ClusterProvider>(Hp, t, params, order);
    device = build_outcome_tree(evolve(pair.combined(), Hw, t), *provider);
    // on GHZ branches the reference distribution equals that of branch 0
    ClusterSampler sampler(Hp, t, *provider, params);
    reference = sampler.distribution();
  }

  const PhaseFunction f(pair, pauli_terms(Hp, false), t, fq.prior);
  const auto f_call = [&f](double w) { return f(w); };

  CampaignRow row;
  row.protocol = "locc";
  row.backend = cfg.backend;
  row.n = n;
  row.t = t;
  row.J = cfg.model == "none" ? 0.0 : cfg.J;
  row.omega_true = fq.omega_true;
  row.omega_prime = fq.prior.omega_prime;
  row.shots = cfg.shots;
  row.campaigns = cfg.campaigns;
  row.seed = cfg.seed;
  const double tol = cfg.bisection_tol * precision_limits(n, cfg.shots, t).hl;
  const int ref_shots = cfg.reference_shots > 0 ? cfg.reference_shots : cfg.shots;
  std::optional<TableSampler> ref_sampler;
  if (!exact_reference) ref_sampler.emplace(reference);

  const std::size_t R = cfg.campaigns;
  std::vector<double> est(R), phat(R), pprime(R);
  std::vector<char> clamp(R, 0);
  parallel_for(R, [&](std::size_t r) {
    SplitMix64 rng(stream_key(cfg.seed, n, r));
    long long sum = 0;
    for (int s = 0; s < cfg.shots; ++s) sum += parity_of(sample_outcomes(device, rng));
    phat[r] = static_cast<double>(sum) / cfg.shots;
    if (exact_reference) {
      pprime[r] = *exact_reference;
    } else {
      long long ps = 0;
      for (int s = 0; s < ref_shots; ++s) ps += parity_of((*ref_sampler)(rng));
      pprime[r] = static_cast<double>(ps) / ref_shots;
    }
    const OmegaEstimate e = estimate_omega(phat[r], pprime[r], f_call, fq.prior, tol, 0.0);
    est[r] = e.omega;
    clamp[r] = e.clamped;
  });
  for (std::size_t r = 0; r < R; ++r) {
    row.P_hat += phat[r] / R;
    row.P_prime += pprime[r] / R;
    row.clamped += clamp[r];
  }
  row.estimates = std::move(est);
  finish(row, start);
  return row;
}

CampaignResult run_locc(const ExperimentConfig& cfg) {
  cfg.validate();
  CampaignResult res;
  res.config_hash = cfg.hash();
  for (int n : cfg.sizes) res.rows.push_back(run_locc_size(cfg, n));
  return res;
}

CampaignRow run_naive_size(const ExperimentConfig& cfg, int n) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const double w_true = cfg.omega_true.value_or(cfg.omega);
  const NaiveDistribution dist = naive_distribution(n, w_true, cfg.J, cfg.t);
  const std::vector<double> counts = dist.count_distribution();
  CampaignRow row;
  row.protocol = "naive";
  row.backend = "analytic";
  row.n = n;
  row.t = cfg.t;
  row.J = cfg.J;
  row.omega_true = w_true;
  row.omega_prime = w_true;
  row.shots = cfg.shots;
  row.campaigns = cfg.campaigns;
  row.seed = cfg.seed;
  const double lo = w_true - cfg.naive_window, hi = w_true + cfg.naive_window;
  const auto S = [&](double w) { return naive_statistic(n, w, cfg.J, cfg.t); };
  const double tol = cfg.bisection_tol * precision_limits(n, cfg.shots, cfg.t).hl;
  const TableSampler sampler(counts);
  const std::size_t R = cfg.campaigns;
  std::vector<double> est(R), stat(R);
  std::vector<char> clamp(R, 0);
  parallel_for(R, [&](std::size_t r) {
    SplitMix64 rng(stream_key(cfg.seed, n, r));
    double s = 0.0;
    for (int k = 0; k < cfg.shots; ++k) {
      const double m = (2.0 * static_cast<double>(sampler(rng)) - n) / n;
      s += m * m;
    }
    stat[r] = s / cfg.shots;
    bool c = false;
    est[r] = invert_monotone(S, stat[r], lo, hi, tol, &c);
    clamp[r] = c;
  });
  for (std::size_t r = 0; r < R; ++r) {
    row.P_hat += stat[r] / R;
    row.clamped += clamp[r];
  }
  row.P_prime = S(w_true);
  row.estimates = std::move(est);
  finish(row, start);
  return row;
}

CampaignResult run_naive(const ExperimentConfig& cfg) {
  CampaignResult res;
  res.config_hash = cfg.hash();
  for (int n : cfg.sizes) res.rows.push_back(run_naive_size(cfg, n));
  return res;
}

CampaignRow run_undo_size(const ExperimentConfig& cfg, int n) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Frequencies fq = frequencies(cfg, n);
  const PerturbedHamiltonian Hp = build_model(cfg, n, fq.prior.omega_prime);
  const SuperposedPair pair = build_state(cfg, n);
  const UndoProtocol undo(pair.combined(), pauli_terms(Hp, false), fq.prior.omega_prime, cfg.t);
  // the readout curve is tabulated once over the prior cell
  const Chebyshev<double> curve =
      chebyshev_fit([&](double w) { return undo.expectation(w); }, fq.prior.lo(), fq.prior.hi(), 24);
  const double x_true = undo.expectation(fq.omega_true);
  CampaignRow row;
  row.protocol = "undo";
  row.backend = "exact";
  row.n = n;
  row.t = cfg.t;
  row.J = cfg.model == "none" ? 0.0 : cfg.J;
  row.omega_true = fq.omega_true;
  row.omega_prime = fq.prior.omega_prime;
  row.shots = cfg.shots;
  row.campaigns = cfg.campaigns;
  row.seed = cfg.seed;
  const double tol = cfg.bisection_tol * precision_limits(n, cfg.shots, cfg.t).hl;
  const std::size_t R = cfg.campaigns;
  std::vector<double> est(R), xs(R);
  std::vector<char> clamp(R, 0);
  parallel_for(R, [&](std::size_t r) {
    SplitMix64 rng(stream_key(cfg.seed, n, r));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    long long s = 0;
    for (int k = 0; k < cfg.shots; ++k) s += u(rng) < 0.5 * (1 + x_true) ? 1 : -1;
    xs[r] = static_cast<double>(s) / cfg.shots;
    bool c = false;
    est[r] = invert_monotone([&](double w) { return curve(w); }, xs[r], fq.prior.lo(), fq.prior.hi(), tol, &c);
    clamp[r] = c;
  });
  for (std::size_t r = 0; r < R; ++r) {
    row.P_hat += xs[r] / R;
    row.clamped += clamp[r];
  }
  row.P_prime = x_true;
  row.estimates = std::move(est);
  finish(row, start);
  return row;
}

CampaignResult run_undo(const ExperimentConfig& cfg) {
  CampaignResult res;
  res.config_hash = cfg.hash();
  for (int n : cfg.sizes) res.rows.push_back(run_undo_size(cfg, n));
  return res;
}

ScalingFit scaling_study(const std::vector<CampaignRow>& rows) {
  std::vector<double> x, y;
  std::map<int, int> distinct;
  for (const auto& r : rows) {
    if (!(r.delta_omega > 0)) throw ValidationError("scaling fit needs positive delta omega");
    x.push_back(std::log(r.n));
    y.push_back(std::log(r.delta_omega));
    ++distinct[r.n];
  }
  if (distinct.size() < 3) throw ValidationError("scaling fit needs at least three distinct N");
  const LineFit lf = fit_line(x, y);
  ScalingFit f;
  f.exponent = lf.slope;
  f.stderr_ = lf.slope_stderr;
  f.ci_lo = lf.slope - 1.96 * lf.slope_stderr;
  f.ci_hi = lf.slope + 1.96 * lf.slope_stderr;
  f.r2 = lf.r2;
  return f;
}

std::string row_json(const CampaignRow& row, const std::string& hash) {
  nlohmann::ordered_json j;
  j["protocol"] = row.protocol;
  j["backend"] = row.backend;
  j["N"] = row.n;
  j["t"] = row.t;
  j["J"] = row.J;
  j["omega_true"] = row.omega_true;
  j["omega_prime"] = row.omega_prime;
  j["M"] = row.shots;
  j["campaigns"] = row.campaigns;
  j["P_hat"] = row.P_hat;
  j["P_prime"] = row.P_prime;
  j["omega_est"] = row.omega_est;
  j["delta_omega"] = row.delta_omega;
  j["hl_reference"] = row.hl;
  j["sql_reference"] = row.sql;
  j["clamped"] = row.clamped;
  j["wall_time"] = row.wall_time;
  j["seed"] = row.seed;
  j["config_hash"] = hash;
  j["version"] = kVersionTag;
  return j.dump();
}

std::string fit_json(const ScalingFit& fit, const std::string& hash) {
  nlohmann::ordered_json j;
  j["exponent"] = fit.exponent;
  j["stderr"] = fit.stderr_;
  j["ci95"] = {fit.ci_lo, fit.ci_hi};
  j["r2"] = fit.r2;
  j["config_hash"] = hash;
  j["version"] = kVersionTag;
  return j.dump();
}

std::string csv_header() {
  return "protocol,backend,N,t,J,omega_true,omega_prime,M,campaigns,P_hat,P_prime,omega_est,"
         "delta_omega,hl_reference,sql_reference,clamped,wall_time,seed,config_hash,version";
}

std::string row_csv(const CampaignRow& r, const std::string& hash) {
  std::ostringstream os;
  os << r.protocol << ',' << r.backend << ',' << r.n << ',' << num(r.t) << ',' << num(r.J) << ','
     << num(r.omega_true) << ',' << num(r.omega_prime) << ',' << r.shots << ',' << r.campaigns << ','
     << num(r.P_hat) << ',' << num(r.P_prime) << ',' << num(r.omega_est) << ',' << num(r.delta_omega)
     << ',' << num(r.hl) << ',' << num(r.sql) << ',' << r.clamped << ',' << num(r.wall_time) << ','
     << r.seed << ',' << hash << ',' << kVersionTag;
  return os.str();
}

}  // namespace hlm
