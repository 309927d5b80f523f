#include "graphturing/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include <Eigen/Core>

#include "graphturing/io.hpp"

namespace graphturing {

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

namespace {

std::string size_dir(int n) { return "N-" + std::to_string(n); }

std::string trial_dir(int t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trial-%03d", t);
  return buf;
}

// Single-task runs write into `out` directly; sweeps get N-<n>/trial-<t> subdirectories.
fs::path task_path(const ExperimentConfig& c, const fs::path& out, int n, int t) {
  if (c.sizes.size() == 1 && c.trials == 1) return out;
  return out / size_dir(n) / trial_dir(t);
}

struct Task {
  int n;
  int trial;
};

std::vector<Task> tasks_of(const ExperimentConfig& c) {
  std::vector<Task> tasks;
  for (int n : c.sizes) {
    for (int t = 0; t < c.trials; ++t) tasks.push_back({n, t});
  }
  return tasks;
}

OJson library_info() {
  OJson j;
  j["name"] = "graphturing";
  j["version"] = kLibraryVersion;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  return j;
}

OJson controls_json(const ContinuationControls& cc) {
  OJson k;
  k["ds"] = cc.ds;
  k["ds_max"] = cc.ds_max;
  k["ds_min"] = cc.ds_min;
  k["h0"] = cc.h0;
  k["tol"] = cc.tol;
  k["max_newton"] = cc.max_newton;
  k["max_steps"] = cc.max_steps;
  k["amplitude_cap"] = cc.amplitude_cap;
  k["epsilon_min"] = cc.epsilon_min;
  k["epsilon_max"] = cc.epsilon_max;
  k["grow_after"] = cc.grow_after;
  k["grow_factor"] = cc.grow_factor;
  return k;
}

void write_metadata(const fs::path& out, const std::string& command, const ExperimentConfig& c,
                    const std::string& status, const std::string& diagnostics) {
  OJson meta;
  meta["command"] = command;
  meta["config"] = to_json(c);
  auto seeds = OJson::array();
  if (c.graph == GraphKind::Random) {
    // concentration_report derives its trial seeds itself.
    for (int t = 0; t < c.trials; ++t) {
      seeds.push_back(command == "concentration" ? derive_seed(c.seed, static_cast<std::uint64_t>(t)) : trial_seed(c, t));
    }
  }
  meta["seeds"] = seeds;
  auto resolved = OJson::object();
  for (int n : c.sizes) resolved[std::to_string(n)] = controls_json(c.continuation.resolved(n));
  meta["resolved_continuation"] = resolved;
  meta["library"] = library_info();
  meta["status"] = status;
  meta["diagnostics"] = diagnostics;
  write_json(out / "metadata.json", meta);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

OJson graphon_reference(const GraphonModel& model) {
  OJson j;
  j["graphon"] = graphon_to_json(model);
  if (model.is_ring()) {
    const auto spec = graphon_spectrum(model, 16);
    auto entries = OJson::array();
    for (const auto& e : spec.entries) {
      entries.push_back({{"mode", e.mode}, {"eigenvalue", e.eigenvalue}, {"multiplicity", e.multiplicity}});
    }
    j["eigenvalues"] = entries;
    j["accumulation_point"] = spec.accumulation_point;
  } else {
    const auto& bp = std::get<Bipartite>(model.variant());
    const auto spec = bipartite_spectrum(bp.p, bp.alpha);
    auto levels = OJson::array();
    for (const auto& l : spec.levels) {
      levels.push_back({{"eigenvalue", l.eigenvalue}, {"isolated", l.isolated}});
    }
    j["eigenvalues"] = levels;
  }
  return j;
}

// Largest deviation |lambda/N - mu| over the m eigenvalues closest to mu N.
double pair_error(const Eigen::VectorXd& ev, int n, double mu, int m) {
  std::vector<double> d;
  for (Eigen::Index k = 0; k < ev.size(); ++k) d.push_back(std::fabs(ev(k) / n - mu));
  std::sort(d.begin(), d.end());
  return d[static_cast<std::size_t>(std::min<int>(m, static_cast<int>(d.size())) - 1)];
}

int best_profile_index(const Branch& branch, double target) {
  int best = -1;
  bool best_stable = false;
  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const auto& s = branch.points[i];
    if (std::fabs(s.amplitude) == 0.0) continue;
    const bool better =
        best < 0 || (s.stable && !best_stable) ||
        (s.stable == best_stable &&
         std::fabs(s.epsilon - target) < std::fabs(branch.points[static_cast<std::size_t>(best)].epsilon - target));
    if (better) {
      best = static_cast<int>(i);
      best_stable = s.stable;
    }
  }
  return best;
}

OJson fit_json(const BifurcationResult& r) {
  OJson j;
  if (r.fit) {
    j["a2"] = r.fit->a2;
    j["a3"] = r.fit->a3;
    j["residual"] = r.fit->residual;
    j["exponent"] = r.fit->exponent;
    j["fit_points"] = r.fit->fit_points;
    j["exponent_points"] = r.fit->exponent_points;
  } else {
    j["error"] = r.fit_error;
  }
  return j;
}

OJson prediction_json(const BifurcationResult& r) {
  OJson j;
  j["kappa"] = r.params.kappa;
  j["critical_index"] = r.mode.index + 1;
  j["critical_multiplicity"] = r.mode.multiplicity;
  j["epsilon_bp"] = r.eps_bp;
  if (r.prediction) {
    const auto& p = *r.prediction;
    j["beta"] = p.beta;
    j["l_N"] = p.l_n;
    j["l_3"] = p.l_3;
    j["l_3_index"] = p.l_3_index + 1;
    j["Gamma_r"] = p.gamma_r;
    j["epsilon_SN"] = p.epsilon_sn;
    j["criticality"] = p.gamma_r > 0.0 ? "supercritical" : "subcritical";
    j["a2"] = p.a2(r.n);
    j["a3"] = p.a3(r.n);
    j["Omega"] = p.omega;
    j["a1"] = {p.a1.real(), p.a1.imag()};
  } else {
    j["error"] = r.prediction_error;
  }
  return j;
}

void write_bifurcation(const BifurcationResult& r, const GraphRealization& g, const ExperimentConfig& c,
                       const fs::path& dir, OJson extra) {
  write_eigenvalues_csv(dir / "eigenvalues.csv", r.n, r.spec.eigenvalues);
  write_branch_csv(dir / "branch.csv", r.branch);
  if (r.profile_index >= 0) {
    write_profile_csv(dir / "profile.csv", r.branch.points[static_cast<std::size_t>(r.profile_index)].u);
  }
  OJson events;
  events["events"] = events_to_json(r.branch);
  events["fit"] = fit_json(r);
  write_json(dir / "events.json", events);

  OJson pred = prediction_json(r);
  if (r.profile_index >= 0) {
    const auto& s = r.branch.points[static_cast<std::size_t>(r.profile_index)];
    OJson prof;
    prof["epsilon"] = s.epsilon;
    prof["amplitude"] = s.amplitude;
    prof["stable"] = s.stable;
    prof["correlation_k_star"] = r.corr_single;
    prof["correlation_k_star_2k_star"] = r.corr_pair;
    prof["best_single_mode"] = r.best_single_mode;
    prof["best_single_correlation"] = r.corr_best_single;
    if (r.prediction) {
      const Eigen::VectorXd u = r.prediction->profile(s.epsilon, r.n);
      auto samples = OJson::array();
      for (Eigen::Index j = 0; j < u.size(); ++j) samples.push_back(u(j));
      prof["predicted"] = samples;
    }
    pred["profile"] = prof;
  }
  for (auto& [k, v] : extra.items()) pred[k] = v;
  write_json(dir / "prediction.json", pred);

  if (c.graphon.is_ring()) {
    OJson al;
    const auto gs = graphon_spectrum(c.graphon);
    const MatchBudget budget = budget_for_mode(gs, c.k_star, c.delta_fraction, c.gamma);
    const auto matched = match_eigenvalues(r.spec.eigenvalues, budget, r.n);
    const auto ref = eig_sym(deterministic_graph(c.graphon, g.n).laplacian);
    const auto ref_matched = match_eigenvalues(ref.eigenvalues, budget, r.n);
    al["mu"] = budget.mu;
    al["delta"] = budget.delta;
    al["delta0"] = budget.delta0;
    al["gamma"] = budget.gamma;
    al["multiplicity"] = budget.multiplicity;
    auto idx = OJson::array();
    for (int k : matched) idx.push_back(k + 1);
    al["matched"] = idx;
    if (!matched.empty() && matched.size() == ref_matched.size()) {
      const auto rep = align_to_fourier(r.spec, matched, c.k_star, budget, ref, ref_matched);
      auto mags = OJson::array();
      for (const auto& a : rep.coefficients) mags.push_back(std::abs(a));
      al["abs_a"] = mags;
      al["fourier_residual"] = rep.fourier_residual;
      al["procrustes_residual"] = rep.procrustes_residual;
      al["davis_kahan_bound"] = rep.davis_kahan_bound;
      al["beta"] = rep.beta;
    } else {
      al["note"] = "matched block size differs from the deterministic reference";
    }
    write_json(dir / "alignment.json", al);
  }
}

}  // namespace

void run_parallel(int count, int jobs, const std::function<void(int)>& task) {
  const int workers = std::clamp(jobs, 1, std::max(count, 1));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
}

std::uint64_t trial_seed(const ExperimentConfig& c, int trial) {
  return c.seed + static_cast<std::uint64_t>(trial);
}

GraphRealization realize(const ExperimentConfig& c, int n, int trial) {
  return c.graph == GraphKind::Random ? random_graph(c.graphon, n, trial_seed(c, trial))
                                      : deterministic_graph(c.graphon, n);
}

BifurcationResult analyze_bifurcation(const GraphRealization& g, const ExperimentConfig& c) {
  BifurcationResult r;
  r.n = g.n;
  r.spec = eig_sym(g.laplacian);
  int index = 0;
  double kappa = 0.0;
  if (c.kappa.kind == KappaRule::Kind::Index) {
    index = c.kappa.index - 1;
    if (index >= g.n) {
      throw ConfigError("model.kappa.index exceeds the graph size");
    }
    kappa = r.spec.eigenvalues(index);
    r.eps_bp = 0.0;
  } else {
    kappa = c.kappa.value;
    (r.spec.eigenvalues.array() - kappa).abs().minCoeff(&index);
    const double d = r.spec.eigenvalues(index) - kappa;
    r.eps_bp = d * d;
  }
  if (!(kappa < 0.0)) {
    throw ConfigError("selected kappa is not negative; choose a nonzero Laplacian eigenvalue");
  }
  r.mode = critical_mode(r.spec, index);
  r.params.kappa = kappa;
  r.params.r = c.r;
  r.params.b = c.b;
  r.params.validate();
  r.controls = c.continuation.resolved(g.n);

  const SwiftHohenberg op(g.laplacian, kappa);
  r.branch = trace_bifurcating_branch(op, r.params, r.eps_bp, r.mode, r.controls);

  const double window = c.fit_amplitude > 0.0 ? c.fit_amplitude : 0.05 * std::sqrt(static_cast<double>(g.n));
  try {
    r.fit = fit_normal_form(r.branch, r.eps_bp, window, c.exponent_points);
  } catch (const ContinuationError& e) {
    r.fit_error = e.what();
  }
  if (c.graphon.is_ring()) {
    try {
      r.prediction = random_prediction(r.spec, index, r.mode.v, graphon_spectrum(c.graphon), c.k_star,
                                        c.r, c.b, c.delta_fraction);
    } catch (const std::exception& e) {
      r.prediction_error = e.what();
    }
  } else {
    r.prediction_error = "analytic prediction needs a ring graphon";
  }

  r.profile_index = best_profile_index(r.branch, c.profile_epsilon);
  if (r.profile_index >= 0) {
    const Eigen::VectorXd& u = r.branch.points[static_cast<std::size_t>(r.profile_index)].u;
    const std::vector<int> single{c.k_star};
    const std::vector<int> pair{c.k_star, 2 * c.k_star};
    r.corr_single = fourier_correlation(u, single);
    r.corr_pair = fourier_correlation(u, pair);
    for (int k = 1; k <= g.n / 2; ++k) {
      const std::vector<int> mode{k};
      const double corr = fourier_correlation(u, mode);
      if (corr > r.corr_best_single) {
        r.corr_best_single = corr;
        r.best_single_mode = k;
      }
    }
  }
  return r;
}

BipartiteReport analyze_bipartite(const SpectralData& spec, double p, double alpha) {
  const int n = static_cast<int>(spec.size());
  const double mid_a = -p * alpha;
  const double mid_b = -p * (1.0 - alpha);
  BipartiteReport rep;
  for (int k = 0; k < n; ++k) {
    const double v = spec.eigenvalues(k) / n;
    if (std::fabs(v) <= 0.02) {
      ++rep.near_zero;
    } else if (std::fabs(v + p) <= 0.02) {
      ++rep.near_full;
    } else if (std::fabs(v - mid_a) > 0.05 && std::fabs(v - mid_b) > 0.05) {
      ++rep.off_levels;
    }
  }
  (spec.eigenvalues.array() + p * n).abs().minCoeff(&rep.vector_index);
  rep.vector = spec.eigenvectors.col(rep.vector_index);
  std::vector<double> low, high;
  for (int j = 0; j < n; ++j) {
    const double x = static_cast<double>(j + 1) / n;
    (x <= alpha ? low : high).push_back(rep.vector(j));
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size()));
  };
  if (!low.empty() && !high.empty()) {
    stats(low, rep.mean_low, rep.std_low);
    stats(high, rep.mean_high, rep.std_high);
    rep.spread_ratio = std::max(rep.std_low, rep.std_high) / std::fabs(rep.mean_low - rep.mean_high);
  }
  return rep;
}

void cmd_spectrum(const ExperimentConfig& c, const fs::path& out, int jobs) {
  write_json(out / "graphon.json", graphon_reference(c.graphon));
  struct Item {
    int n;
    int trial;  // -1 for the deterministic graph
  };
  std::vector<Item> items;
  for (int n : c.sizes) {
    items.push_back({n, -1});
    if (c.graph == GraphKind::Random) {
      for (int t = 0; t < c.trials; ++t) items.push_back({n, t});
    }
  }
  std::optional<double> mu;
  if (c.graphon.is_ring()) mu = graphon_spectrum(c.graphon).eigenvalue(c.k_star);
  std::vector<double> errors(items.size(), std::nan(""));
  run_parallel(static_cast<int>(items.size()), jobs, [&](int i) {
    const Item& it = items[static_cast<std::size_t>(i)];
    const auto g = it.trial < 0 ? deterministic_graph(c.graphon, it.n)
                                : random_graph(c.graphon, it.n, trial_seed(c, it.trial));
    const Eigen::VectorXd ev = eigenvalues_sym(g.laplacian);
    const fs::path dir = it.trial < 0 ? out / "deterministic" / size_dir(it.n)
                                      : out / "random" / size_dir(it.n) / trial_dir(it.trial);
    write_eigenvalues_csv(dir / "eigenvalues.csv", it.n, ev);
    if (mu) errors[static_cast<std::size_t>(i)] = pair_error(ev, it.n, *mu, 2);
  });
  if (mu) {
    OJson summary;
    summary["mu"] = *mu;
    summary["k_star"] = c.k_star;
    auto rows = OJson::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
      OJson row;
      row["N"] = items[i].n;
      row["graph"] = items[i].trial < 0 ? "deterministic" : "random";
      if (items[i].trial >= 0) row["seed"] = trial_seed(c, items[i].trial);
      row["pair_error"] = errors[i];
      rows.push_back(row);
    }
    summary["pairs"] = rows;
    write_json(out / "summary.json", summary);
  }
}

void cmd_bifurcate(const ExperimentConfig& c, const fs::path& out, int jobs) {
  const auto tasks = tasks_of(c);
  run_parallel(static_cast<int>(tasks.size()), jobs, [&](int i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    const auto g = realize(c, t.n, t.trial);
    const auto r = analyze_bifurcation(g, c);
    write_bifurcation(r, g, c, task_path(c, out, t.n, t.trial), OJson::object());
  });
}

void cmd_resonance(const ExperimentConfig& c, const fs::path& out, int jobs) {
  if (!c.graphon.is_ring()) {
    throw ConfigError("resonance needs a ring graphon");
  }
  const auto gs = graphon_spectrum(c.graphon);
  const double mu = gs.eigenvalue(c.k_star);
  if (std::fabs(gs.eigenvalue(2 * c.k_star) - mu) > 1e-12) {
    throw ConfigError("modes k* and 2k* are not resonant for this graphon");
  }
  const auto tasks = tasks_of(c);
  run_parallel(static_cast<int>(tasks.size()), jobs, [&](int i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    const auto g = realize(c, t.n, t.trial);
    const auto r = analyze_bifurcation(g, c);
    OJson extra;
    auto cluster = OJson::array();
    for (Eigen::Index k = 0; k < r.spec.size(); ++k) {
      if (std::fabs(r.spec.eigenvalues(k) - mu * t.n) < 0.05 * t.n) cluster.push_back(r.spec.eigenvalues(k));
    }
    extra["cluster_center"] = mu * t.n;
    extra["cluster_radius"] = 0.05 * t.n;
    extra["cluster"] = cluster;
    if (r.profile_index >= 0 && c.r != 0.0) {
      const auto& s = r.branch.points[static_cast<std::size_t>(r.profile_index)];
      // Graphon-scale expansion at the profile's epsilon, phase read from the critical vector.
      const auto a1 = fourier_basis(t.n, c.k_star).dot(r.mode.v.cast<std::complex<double>>());
      const double phi = -std::arg(a1) / (2.0 * 3.14159265358979323846 * c.k_star);
      const auto rp = resonance(c.k_star, c.r, s.epsilon, phi, s.amplitude >= 0.0 ? 1 : -1);
      extra["resonance"] = {{"k1", rp.k1},       {"k2", rp.k2},       {"epsilon", rp.epsilon},
                            {"phi", rp.phi},     {"amp1", rp.amp1},   {"amp2", rp.amp2},
                            {"eta1", rp.eta1},   {"eta2", rp.eta2},   {"Omega1", rp.omega1},
                            {"Omega2", rp.omega2}};
    }
    write_bifurcation(r, g, c, task_path(c, out, t.n, t.trial), extra);
  });
}

void cmd_bipartite(const ExperimentConfig& c, const fs::path& out, int jobs) {
  const auto* bp = std::get_if<Bipartite>(&c.graphon.variant());
  if (!bp) {
    throw ConfigError("bipartite needs a bipartite graphon");
  }
  write_json(out / "graphon.json", graphon_reference(c.graphon));
  const auto tasks = tasks_of(c);
  run_parallel(static_cast<int>(tasks.size()), jobs, [&](int i) {
    const Task& t = tasks[static_cast<std::size_t>(i)];
    const auto g = realize(c, t.n, t.trial);
    const auto spec = eig_sym(g.laplacian);
    const auto rep = analyze_bipartite(spec, bp->p, bp->alpha);
    const fs::path dir = task_path(c, out, t.n, t.trial);
    write_eigenvalues_csv(dir / "eigenvalues.csv", t.n, spec.eigenvalues);
    write_profile_csv(dir / "profile.csv", rep.vector);
    OJson j;
    j["near_zero"] = rep.near_zero;
    j["near_minus_p"] = rep.near_full;
    j["off_levels"] = rep.off_levels;
    j["vector_index"] = rep.vector_index + 1;
    j["vector_eigenvalue"] = spec.eigenvalues(rep.vector_index);
    j["mean_low"] = rep.mean_low;
    j["mean_high"] = rep.mean_high;
    j["std_low"] = rep.std_low;
    j["std_high"] = rep.std_high;
    j["spread_ratio"] = rep.spread_ratio;
    write_json(dir / "bipartite.json", j);
  });
}

void cmd_concentration(const ExperimentConfig& c, const fs::path& out, int jobs) {
  if (c.graph != GraphKind::Random) {
    throw ConfigError("concentration compares random graphs with the deterministic one; set graph to random");
  }
  std::vector<ConcentrationReport> reports;
  for (int n : c.sizes) reports.push_back(concentration_report(c.graphon, n, c.gamma, c.trials, c.seed, jobs));
  fs::create_directories(out);
  {
    std::ofstream csv(out / "concentration.csv", std::ios::binary);
    csv << "N,trial,seed,norm,ratio\n";
    for (const auto& rep : reports) {
      for (std::size_t t = 0; t < rep.norms.size(); ++t) {
        csv << rep.n << ',' << t << ',' << rep.trial_seeds[t] << ',' << format_number(rep.norms[t]) << ','
            << format_number(rep.ratios[t]) << '\n';
      }
    }
  }
  OJson j = OJson::array();
  for (const auto& rep : reports) {
    OJson row;
    row["N"] = rep.n;
    row["gamma"] = rep.gamma;
    row["failure_bound"] = rep.failure_bound;
    row["median_ratio"] = median(rep.ratios);
    row["max_ratio"] = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    j.push_back(row);
  }
  write_json(out / "concentration.json", j);
}

int run_command(const std::string& name, const ExperimentConfig& c, const fs::path& out, int jobs,
                std::ostream& log) {
  using Fn = void (*)(const ExperimentConfig&, const fs::path&, int);
  Fn fn = nullptr;
  if (name == "spectrum") fn = cmd_spectrum;
  if (name == "bifurcate") fn = cmd_bifurcate;
  if (name == "resonance") fn = cmd_resonance;
  if (name == "bipartite") fn = cmd_bipartite;
  if (name == "concentration") fn = cmd_concentration;
  if (!fn) {
    throw ConfigError("unknown command '" + name + "'");
  }
  fs::create_directories(out);
  try {
    fn(c, out, jobs);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::exception& e) {
    write_metadata(out, name, c, "numerical_failure", e.what());
    log << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  write_metadata(out, name, c, "ok", "");
  return 0;
}

}  // namespace graphturing
