#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ultraloc/io.hpp"

namespace ultraloc::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kVerificationFailure = 4 };

struct Options {
  std::string out_dir = ".";
  /// relative paths inside the config resolve against this directory
  std::string config_dir = ".";
  std::optional<std::uint64_t> seed;
  bool strict = false;
};

int cmd_transform(const io::json& cfg, const Options& opt);
int cmd_verify(const io::json& cfg, const Options& opt);
int cmd_locop(const io::json& cfg, const Options& opt);
int cmd_weights(const io::json& cfg, const Options& opt);

}  // namespace ultraloc::cli
