#pragma once

namespace inp::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kValidation = 2, kNumerical = 3, kIo = 4 };

/// Parses and runs one subcommand: simulate | train-offline | active | theory | score.
int run(int argc, char** argv);

}  // namespace inp::cli
