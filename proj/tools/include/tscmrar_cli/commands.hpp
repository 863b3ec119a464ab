#pragma once

#include <iosfwd>

#include "tscmrar_cli/config.hpp"

namespace tscmrar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Subcommands. Each takes a resolved config and returns an exit code; errors
// propagate as exceptions and are mapped to exit codes by run().
int cmd_ingest(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_eval(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_predict(const RunConfig& config, std::ostream& out);
int cmd_gradcheck(const RunConfig& config, std::ostream& out);
int cmd_synth(const RunConfig& config, std::ostream& out);

// Full command line: parses flags, runs the subcommand, maps exceptions to
// exit codes (1 usage, 2 data, 3 numeric). Messages go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tscmrar::cli
