#pragma once

#include <string>
#include <vector>

namespace senticast::cli {

/// Dispatches one CLI invocation (argv without the program name).
/// Subcommands: synth, train-scorer, score, index, gct, train, predict,
/// evaluate, ablate. Every run writes its artifacts plus a manifest under
/// the output directory.
///
/// Exit codes: 0 success, 2 validation/usage, 3 runtime/divergence, 4 I/O.
int run(const std::vector<std::string>& args);

}  // namespace senticast::cli
