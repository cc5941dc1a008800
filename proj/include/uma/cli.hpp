#pragma once

namespace uma {

/// Subcommands: generate, run, score, advantages, inspect.
/// Exit codes: 0 success, 1 validation, 2 runtime, 3 partial failure.
int cli_main(int argc, char** argv);

}  // namespace uma
