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

#include <bit>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hlmetro/cluster_sampler.hpp"
#include "hlmetro/errors.hpp"
#include "hlmetro/harness.hpp"
#include "hlmetro/locc.hpp"
#include "hlmetro/metrology.hpp"
#include "hlmetro/mps_backend.hpp"

using namespace hlm;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::string output;
  std::optional<std::string> sizes;
  std::optional<double> J, t, omega;
  std::optional<int> shots, campaigns;
  bool allow_unsafe = false;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "configuration file (key = value lines)");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--backend", f.backend, "exact, mps or cluster");
  app->add_option("--output", f.output, "output path, stdout when omitted");
  app->add_option("--N", f.sizes, "qubit counts, comma separated");
  app->add_option("--J", f.J, "perturbation strength");
  app->add_option("--t", f.t, "evolution time");
  app->add_option("--omega", f.omega, "nominal frequency");
  app->add_option("--M", f.shots, "shots per campaign");
  app->add_option("--campaigns", f.campaigns, "repeated campaigns per size");
  app->add_flag("--allow-unsafe", f.allow_unsafe, "run the cluster backend beyond t_star");
}

ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.backend) c.backend = *f.backend;
  if (!f.output.empty()) c.output = f.output;
  if (f.sizes) c.sizes = parse_sizes(*f.sizes);
  if (f.J) c.J = *f.J;
  if (f.t) c.t = *f.t;
  if (f.omega) c.omega = *f.omega;
  if (f.shots) c.shots = *f.shots;
  if (f.campaigns) c.campaigns = *f.campaigns;
  if (f.allow_unsafe) c.allow_unsafe = true;
  c.validate();
  return c;
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw ValidationError("cannot open output " + path);
    }
  }
  std::ostream& out() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_table(const CampaignResult& res, const std::string& path, bool fit) {
  Sink sink(path);
  sink.out() << csv_header() << "\n";
  for (const auto& r : res.rows) sink.out() << row_csv(r, res.config_hash) << "\n";
  if (fit) std::cerr << "fit " << fit_json(scaling_study(res.rows), res.config_hash) << "\n";
}

nlohmann::ordered_json bases_json(const std::vector<QubitBasis>& bases) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& b : bases) {
    const Eigen::Vector3d n = bloch_axis(b);
    a.push_back({std::acos(std::clamp(n.z(), -1.0, 1.0)), std::atan2(n.y(), n.x())});
  }
  return a;
}

struct ProtocolSetup {
  PriorInterval prior;
  PerturbedHamiltonian Hp;
  SuperposedPair pair;
  StateVector phi0, phi1;
};

ProtocolSetup setup(const ExperimentConfig& c, int n) {
  ProtocolSetup s{prior_interval(c.omega, n, c.t), {}, build_state(c, n), {}, {}};
  s.Hp = build_model(c, n, s.prior.omega_prime);
  std::tie(s.phi0, s.phi1) = evolved_pair(s.pair, s.Hp, c.t);
  return s;
}

std::unique_ptr<BasisProvider> make_provider(const ExperimentConfig& c, const ProtocolSetup& s, int n) {
  if (c.backend == "exact") return std::make_unique<ExactProvider>(s.phi0, s.phi1, default_order(n));
  if (c.backend == "mps") {
    TrotterOptions opt;
    opt.trunc.d_max = c.d_max;
    return std::make_unique<MpsProvider>(evolve_mps(mps_from_dense(s.pair.branch0), s.Hp, c.t, opt),
                                         evolve_mps(mps_from_dense(s.pair.branch1), s.Hp, c.t, opt),
                                         default_order(n));
  }
  SamplerParams p = make_sampler_params(interaction_picture(s.Hp, c.t), c.c_m, c.cluster_order);
  p.allow_unsafe = c.allow_unsafe;
  return std::make_unique<ClusterProvider>(s.Hp, c.t, p, default_order(n));
}

int run_main(int argc, char** argv) {
  CLI::App app{"hlmetro: adaptive product-measurement frequency estimation"};
  app.require_subcommand(1);
  Flags f;
  std::string protocol = "locc";
  int shots = 10, points = 33;

  auto* run = app.add_subcommand("run", "seeded campaigns, JSON-lines rows");
  add_common(run, f);
  auto* scale = app.add_subcommand("scale", "delta omega against N, CSV table");
  add_common(scale, f);
  scale->add_option("--protocol", protocol, "locc, ideal, naive or undo")
      ->check(CLI::IsMember({"locc", "ideal", "naive", "undo"}));
  auto* qfi_cmd = app.add_subcommand("qfi", "quantum Fisher information and its lower bounds");
  add_common(qfi_cmd, f);
  auto* sample_cmd = app.add_subcommand("sample", "adaptive measurement transcripts");
  add_common(sample_cmd, f);
  sample_cmd->add_option("--shots", shots, "number of transcripts");
  auto* verify = app.add_subcommand("verify-basis", "largest basis-condition residual");
  add_common(verify, f);
  auto* base_a = app.add_subcommand("baseline-a", "naive x-basis counting protocol");
  add_common(base_a, f);
  auto* base_b = app.add_subcommand("baseline-b", "time-reversal readout protocol");
  add_common(base_b, f);
  auto* dump = app.add_subcommand("dump-phase-fn", "phase function on the prior interval, CSV");
  add_common(dump, f);
  dump->add_option("--points", points, "grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const ExperimentConfig c = resolve(f);
  if (run->parsed()) {
    const CampaignResult res = run_locc(c);
    Sink sink(c.output);
    for (const auto& r : res.rows) sink.out() << row_json(r, res.config_hash) << "\n";
  } else if (scale->parsed()) {
    ExperimentConfig s = c;
    if (protocol == "ideal") s.model = "none";
    const CampaignResult res = protocol == "naive" ? run_naive(s)
                               : protocol == "undo" ? run_undo(s)
                                                    : run_locc(s);
    write_table(res, s.output, true);
  } else if (base_a->parsed()) {
    write_table(run_naive(c), c.output, c.sizes.size() >= 3);
  } else if (base_b->parsed()) {
    write_table(run_undo(c), c.output, c.sizes.size() >= 3);
  } else if (qfi_cmd->parsed()) {
    Sink sink(c.output);
    for (int n : c.sizes) {
      const auto H = build_model(c, n, c.omega);
      const QfiReport q = qfi_report(build_state(c, n), H, c.t);
      nlohmann::ordered_json j;
      j["N"] = n;
      j["t"] = c.t;
      j["J"] = q.J;
      j["omega"] = c.omega;
      j["F"] = q.value;
      j["F_ideal"] = 4.0 * n * n * c.t * c.t;
      j["bound_coherence"] = std::isnan(q.lower_bound_coherence) ? nlohmann::ordered_json() : nlohmann::ordered_json(q.lower_bound_coherence);
      j["bound_fluctuation"] = q.lower_bound_fluctuation;
      j["config_hash"] = c.hash();
      j["version"] = kVersionTag;
      sink.out() << j.dump() << "\n";
    }
  } else if (verify->parsed()) {
    Sink sink(c.output);
    for (int n : c.sizes) {
      const ProtocolSetup s = setup(c, n);
      auto p = make_provider(c, s, n);
      nlohmann::ordered_json j;
      j["N"] = n;
      j["backend"] = c.backend;
      j["residual"] = verify_basis_condition(*p, s.phi0, s.phi1);
      j["fallbacks"] = p->fallbacks();
      sink.out() << j.dump() << "\n";
    }
  } else if (sample_cmd->parsed()) {
    Sink sink(c.output);
    for (int n : c.sizes) {
      const ProtocolSetup s = setup(c, n);
      auto p = make_provider(c, s, n);
      const double w_true = s.prior.omega_prime + c.offset * s.prior.half_width;
      const StateVector psi = evolve(s.pair.combined(), build_model(c, n, w_true), c.t);
      for (int k = 0; k < shots; ++k) {
        SplitMix64 rng(stream_key(c.seed, n, static_cast<std::uint64_t>(k)));
        const MeasurementRecord rec = adaptive_measure(psi, *p, rng);
        nlohmann::ordered_json j;
        j["trial"] = k;
        j["N"] = n;
        j["order"] = rec.order;
        j["outcomes"] = rec.outcomes;
        j["parity"] = rec.parity();
        j["bases"] = bases_json(rec.bases);
        j["config_hash"] = c.hash();
        sink.out() << j.dump() << "\n";
      }
    }
  } else if (dump->parsed()) {
    Sink sink(c.output);
    sink.out() << "N,omega,f,slope\n";
    for (int n : c.sizes) {
      const ProtocolSetup s = setup(c, n);
      const PhaseFunction pf(s.pair, pauli_terms(s.Hp, false), c.t, s.prior);
      for (int i = 0; i < points; ++i) {
        const double w = s.prior.lo() + (s.prior.hi() - s.prior.lo()) * i / std::max(1, points - 1);
        sink.out() << n << ',' << w << ',' << pf(w) << ',' << pf.slope(w) << "\n";
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const StructuralError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const ResourceError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
