#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "config.hpp"

namespace bessched::cli {

/// Stable exit codes for scripting.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitSolverFailure = 4;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;  // spc | dpc | dpc-nv | all
};

int cmd_envelope(const GlobalOptions& options);
int cmd_schedule(const GlobalOptions& options);
int cmd_simulate(const GlobalOptions& options);
int cmd_sweep(const GlobalOptions& options);
int cmd_forecast(const GlobalOptions& options);

}  // namespace bessched::cli
