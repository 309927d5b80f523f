#include "graphturing/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

namespace graphturing {

namespace {

constexpr double kSymmetryTol = 1e-12;

// Adjacency entry for rows (i, j): ring graphons are read through the integer
// offset |i - j| so that grid distances hit the kernel's breakpoints exactly.
double grid_weight(const GraphonModel& model, int n, int i, int j) {
  if (model.is_ring()) {
    return ring_profile(model, static_cast<double>(std::abs(i - j)) / n);
  }
  return evaluate(model, static_cast<double>(i + 1) / n, static_cast<double>(j + 1) / n);
}

void require_size(int n) {
  if (n < 2) {
    throw std::invalid_argument("graph needs at least two vertices");
  }
}

template <class RowFn>
void parallel_rows(int n, int jobs, RowFn&& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += jobs) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

double edge_uniform(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (i * 0xD1B54A32D192ED03ULL));
  h = mix64(h ^ (j * 0xABC98388FB8FAC03ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd laplacian(const Eigen::MatrixXd& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw std::invalid_argument("laplacian: adjacency must be square");
  }
  const Eigen::Index n = adjacency.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (adjacency(i, i) != 0.0) {
      throw std::invalid_argument("laplacian: adjacency diagonal must be zero");
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::fabs(adjacency(i, j) - adjacency(j, i)) > kSymmetryTol) {
        throw std::invalid_argument("laplacian: adjacency must be symmetric");
      }
    }
  }
  Eigen::MatrixXd lap = adjacency;
  lap.diagonal() = -adjacency.rowwise().sum();
  return lap;
}

GraphRealization deterministic_graph(const GraphonModel& model, int n) {
  require_size(n);
  GraphRealization g;
  g.n = n;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double w = grid_weight(model, n, i, j);
      g.adjacency(i, j) = w;
      g.adjacency(j, i) = w;
    }
  }
  g.laplacian = laplacian(g.adjacency);
  g.provenance = Provenance::Deterministic;
  return g;
}

GraphRealization random_graph(const GraphonModel& model, int n, std::uint64_t seed, int jobs) {
  require_size(n);
  GraphRealization g;
  g.n = n;
  g.adjacency = Eigen::MatrixXd::Zero(n, n);
  std::vector<long long> degrees(static_cast<std::size_t>(n), 0);

  // Row i owns the entries (i, j > i); mirroring writes only to column i of later rows.
  parallel_rows(n, jobs, [&](int i) {
    for (int j = i + 1; j < n; ++j) {
      const double prob = grid_weight(model, n, i, j);
      if (edge_uniform(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)) < prob) {
        g.adjacency(i, j) = 1.0;
        g.adjacency(j, i) = 1.0;
      }
    }
  });
  for (int i = 0; i < n; ++i) {
    long long deg = 0;
    for (int j = 0; j < n; ++j) deg += g.adjacency(i, j) != 0.0 ? 1 : 0;
    degrees[static_cast<std::size_t>(i)] = deg;
  }
  g.laplacian = g.adjacency;
  for (int i = 0; i < n; ++i) {
    g.laplacian(i, i) = -static_cast<double>(degrees[static_cast<std::size_t>(i)]);
  }
  g.provenance = Provenance::Random;
  g.seed = seed;
  return g;
}

StepGraphon::StepGraphon(const GraphonModel& model, int n) : n_(n), table_(n, n) {
  if (!model.is_ring()) {
    throw std::invalid_argument("step graphon requires a ring graphon");
  }
  if (n < 1) {
    throw std::invalid_argument("step graphon needs at least one block");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      table_(i, j) = ring_profile(model, static_cast<double>(std::abs(i - j)) / n);
    }
  }
}

double StepGraphon::value(double x, double y) const {
  auto block = [&](double t) {
    return std::clamp(static_cast<int>(std::floor(t * n_)), 0, n_ - 1);
  };
  return table_(block(x), block(y));
}

Eigen::MatrixXd StepGraphon::refined_laplacian(int refine) const {
  if (refine < 1) {
    throw std::invalid_argument("refinement factor must be positive");
  }
  const int m = refine * n_;
  const double cell = 1.0 / m;
  Eigen::MatrixXd op(m, m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      op(a, b) = table_(a / refine, b / refine) * cell;
    }
  }
  // (L f)(x) = int W f dy - Deg(x) f(x); the diagonal kernel term cancels out.
  const Eigen::VectorXd deg = op.rowwise().sum();
  op.diagonal() -= deg;
  return op;
}

StepGraphon step_graphon(const GraphonModel& model, int n) { return StepGraphon(model, n); }

void export_realization(const GraphRealization& g, const std::filesystem::path& stem) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  std::ofstream csv(stem.string() + ".csv");
  if (!csv) {
    throw std::runtime_error("cannot write " + stem.string() + ".csv");
  }
  csv << "i,j,weight\n" << std::setprecision(17);
  for (int i = 0; i < g.n; ++i) {
    for (int j = i + 1; j < g.n; ++j) {
      if (g.adjacency(i, j) != 0.0) {
        csv << (i + 1) << ',' << (j + 1) << ',' << g.adjacency(i, j) << '\n';
      }
    }
  }
  nlohmann::ordered_json header;
  header["N"] = g.n;
  header["provenance"] = g.provenance == Provenance::Random ? "random" : "deterministic";
  if (g.seed) {
    header["seed"] = *g.seed;
  } else {
    header["seed"] = nullptr;
  }
  std::ofstream js(stem.string() + ".json");
  js << header.dump(2) << '\n';
}

GraphRealization import_realization(const std::filesystem::path& stem) {
  std::ifstream js(stem.string() + ".json");
  if (!js) {
    throw std::runtime_error("cannot read " + stem.string() + ".json");
  }
  const auto header = nlohmann::json::parse(js);
  GraphRealization g;
  g.n = header.at("N").get<int>();
  require_size(g.n);
  g.provenance = header.at("provenance").get<std::string>() == "random" ? Provenance::Random
                                                                        : Provenance::Deterministic;
  if (!header.at("seed").is_null()) {
    g.seed = header.at("seed").get<std::uint64_t>();
  }
  g.adjacency = Eigen::MatrixXd::Zero(g.n, g.n);

  std::ifstream csv(stem.string() + ".csv");
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, w;
    std::getline(row, a, ',');
    std::getline(row, b, ',');
    std::getline(row, w, ',');
    const int i = std::stoi(a) - 1;
    const int j = std::stoi(b) - 1;
    if (i < 0 || j < 0 || i >= g.n || j >= g.n || i == j) {
      throw std::runtime_error("edge list entry out of range: " + line);
    }
    const double weight = std::strtod(w.c_str(), nullptr);
    g.adjacency(i, j) = weight;
    g.adjacency(j, i) = weight;
  }
  g.laplacian = laplacian(g.adjacency);
  return g;
}

}  // namespace graphturing
