#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "dagvae/error.hpp"

namespace fs = std::filesystem;
using namespace dagvae;

namespace {

constexpr int kOk = 0, kConfigError = 1, kRuntimeError = 2;

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::ConfigError:
    case ErrorKind::MissingCheckpoint:
      return kConfigError;
    default:
      return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph autoencoder for neural architecture cells"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  const cli::Command* chosen = nullptr;

  for (const auto& cmd : cli::commands()) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--seed", seed, "Overrides the config seed");
    sub->add_option("--out", out_dir, "Output directory (created if missing)");
    sub->callback([&chosen, &cmd] { chosen = &cmd; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    cli::ExperimentConfig config = cli::load_config(config_path);
    if (seed) config.seed = seed;
    if (!config.seed) throw Error(ErrorKind::ConfigError, "a seed is required (config 'seed' or --seed)");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorKind::ConfigError, "cannot create output directory '" + out_dir + "'");
    chosen->run(config, out_dir);
  } catch (const Error& e) {
    std::cerr << "dagvae " << chosen->name << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "dagvae " << chosen->name << ": " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
