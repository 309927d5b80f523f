#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphturing/continuation.hpp"
#include "graphturing/graphon.hpp"

namespace graphturing {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class GraphKind { Random, Deterministic };

/// How kappa is chosen: the eigenvalue at a 1-based descending index of the
/// realized Laplacian (2 is the largest nonzero one), or an explicit value.
struct KappaRule {
  enum class Kind { Index, Value } kind = Kind::Index;
  int index = 2;
  double value = 0.0;
};

struct ExperimentConfig {
  GraphonModel graphon = GraphonModel::small_world(0.90, 0.01, 0.20);
  std::vector<int> sizes{400};
  std::uint64_t seed = 1;
  int trials = 1;
  GraphKind graph = GraphKind::Random;

  double r = 1.0;
  double b = 1.0;
  KappaRule kappa;

  int k_star = 1;
  double delta_fraction = 0.5;  // delta = fraction * delta0
  double gamma = 0.25;

  ContinuationControls continuation;
  double fit_amplitude = 0.0;  // 0 selects 0.05 sqrt(N)
  int exponent_points = 8;
  double profile_epsilon = 0.003;

  std::optional<std::string> out;
};

/// Parses the JSON document; unknown keys and out-of-range values throw ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Fully resolved document; parse_config(to_json(c).dump()) reproduces c.
nlohmann::ordered_json to_json(const ExperimentConfig& c);
std::string serialize_config(const ExperimentConfig& c);

nlohmann::ordered_json graphon_to_json(const GraphonModel& model);

}  // namespace graphturing
