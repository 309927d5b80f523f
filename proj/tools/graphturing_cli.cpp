#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "graphturing/config.hpp"
#include "graphturing/experiments.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
};

std::filesystem::path output_root(const Options& o, const graphturing::ExperimentConfig& c,
                                  const std::string& command) {
  if (!o.out.empty()) return o.out;
  if (c.out) return *c.out;
  const char* env = std::getenv("GRAPHTURING_OUT");
  const std::filesystem::path root = env && *env ? env : "runs";
  return root / command;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Swift-Hohenberg pattern formation on graphon-sampled graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", graphturing::kLibraryVersion);

  Options opts;
  const char* commands[][2] = {
      {"spectrum", "Eigenvalue convergence of deterministic and random graphs"},
      {"bifurcate", "Continue the branch bifurcating from u = 0 and fit the normal form"},
      {"resonance", "Bifurcation at a 2:1 resonant eigenvalue cluster"},
      {"bipartite", "Spectrum and step eigenvector of the bipartite graphon"},
      {"concentration", "Operator-norm distance between random and deterministic Laplacians"},
  };
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd[0], cmd[1]);
    sub->add_option("--config", opts.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Base seed, overrides the config");
    sub->add_option("--out", opts.out, "Output directory (default $GRAPHTURING_OUT/<command> or runs/<command>)");
    sub->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    graphturing::ExperimentConfig c =
        opts.config.empty() ? graphturing::ExperimentConfig{} : graphturing::load_config(opts.config);
    if (opts.seed) c.seed = *opts.seed;
    const auto out = output_root(opts, c, command);
    const int code = graphturing::run_command(command, c, out, opts.jobs, std::cerr);
    if (code == 0) std::cout << "wrote " << out.string() << '\n';
    return code;
  } catch (const graphturing::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
