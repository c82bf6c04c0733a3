// szego run|folner|bergman|det --config <path> [--out <dir>] [--seed <u64>] [--max-rank <int>]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "szego/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Finite-section spectra of Toeplitz-like operators on the Drury-Arveson space"};
  app.set_version_flag("--version", std::string(szego::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> max_rank;

  const std::pair<const char*, const char*> commands[] = {
      {"run", "eigenvalue means against the sphere integral of f(phi)"},
      {"folner", "Folner ratios of the generators and the symbol's operator"},
      {"bergman", "Drury-Arveson vs weighted Bergman spectra"},
      {"det", "geometric mean of the spectrum against exp(int log phi)"},
  };
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "Monte Carlo seed (overrides the config)");
    sub->add_option("--max-rank", max_rank, "cap on the truncation size d_N");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : szego::kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  szego::ExperimentConfig config;
  try {
    const std::filesystem::path path(config_path);
    auto doc = szego::detail::parse_json_text(szego::detail::read_file(path), path.string());
    if (doc.is_object()) {
      if (seed) doc["seed"] = *seed;
      if (max_rank) doc["max_rank"] = *max_rank;
    }
    config = szego::config_from_json(doc, path.parent_path(), path.string());
  } catch (const szego::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return szego::kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return szego::kExitUsage;
  }
  if (out_dir) config.output_dir = *out_dir;

  return szego::dispatch(command, config);
}
