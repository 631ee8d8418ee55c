#pragma once

#include <iosfwd>

#include "config.hpp"

namespace dreid::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Each command reads a validated config, writes its files under
/// config["output"], logs progress to `log`, and returns an exit code.
int cmd_extract(const json& config, std::ostream& log);
int cmd_evaluate(const json& config, std::ostream& log);
int cmd_transfer_train(const json& config, std::ostream& log);
int cmd_transfer_apply(const json& config, std::ostream& log);
int cmd_synth(const json& config, std::ostream& log);
int cmd_verify(const json& config, std::ostream& log);

}  // namespace dreid::cli
