#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace dagvae::cli {

struct Command {
  std::string name;
  std::string help;
  void (*run)(const ExperimentConfig& config, const std::filesystem::path& out);
};

/// Every subcommand in the order shown by --help.
const std::vector<Command>& commands();

}  // namespace dagvae::cli
