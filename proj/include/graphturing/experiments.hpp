#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "graphturing/config.hpp"
#include "graphturing/continuation.hpp"
#include "graphturing/sampler.hpp"
#include "graphturing/theory.hpp"

namespace graphturing {

inline constexpr const char* kLibraryVersion = "1.0.0";

/// Runs tasks 0..count-1 on up to `jobs` threads. The first exception is rethrown.
void run_parallel(int count, int jobs, const std::function<void(int)>& task);

/// Seed of trial t: seed + t.
std::uint64_t trial_seed(const ExperimentConfig& c, int trial);

GraphRealization realize(const ExperimentConfig& c, int n, int trial);

struct BifurcationResult {
  int n = 0;
  SpectralData spec;
  CriticalMode mode;
  SHParams params;
  double eps_bp = 0.0;
  ContinuationControls controls;  // resolved
  Branch branch;
  std::optional<NormalFormFit> fit;
  std::string fit_error;
  std::optional<RandomPrediction> prediction;
  std::string prediction_error;
  int profile_index = -1;
  double corr_single = 0.0;  // against mode k*
  double corr_pair = 0.0;    // against modes k* and 2k*
  double corr_best_single = 0.0;
  int best_single_mode = 0;
};

/// Chooses kappa by the config rule, continues the bifurcating branch in both
/// directions and evaluates the normal-form fit and the analytic prediction.
BifurcationResult analyze_bifurcation(const GraphRealization& g, const ExperimentConfig& c);

struct BipartiteReport {
  int near_zero = 0;
  int near_full = 0;       // within 0.02 of -p
  int off_levels = 0;      // remaining values farther than 0.05 from -p alpha and -p (1 - alpha)
  int vector_index = 0;    // eigenvector of the eigenvalue closest to -p N
  double mean_low = 0.0;   // on x_j <= alpha
  double mean_high = 0.0;
  double std_low = 0.0;
  double std_high = 0.0;
  double spread_ratio = 0.0;  // max(std) / |mean_low - mean_high|
  Eigen::VectorXd vector;
};

BipartiteReport analyze_bipartite(const SpectralData& spec, double p, double alpha);

/// Subcommand drivers. Each writes its artifacts plus metadata.json under `out`.
void cmd_spectrum(const ExperimentConfig& c, const std::filesystem::path& out, int jobs);
void cmd_bifurcate(const ExperimentConfig& c, const std::filesystem::path& out, int jobs);
void cmd_resonance(const ExperimentConfig& c, const std::filesystem::path& out, int jobs);
void cmd_bipartite(const ExperimentConfig& c, const std::filesystem::path& out, int jobs);
void cmd_concentration(const ExperimentConfig& c, const std::filesystem::path& out, int jobs);

/// Dispatches by name and returns the process exit code: 0 success, 3 numerical
/// failure (recorded in metadata.json). Config problems throw ConfigError.
int run_command(const std::string& name, const ExperimentConfig& c, const std::filesystem::path& out,
                int jobs, std::ostream& log);

}  // namespace graphturing
