#pragma once

#include <ostream>

namespace anisolab::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_runtime_error = 2;

/// Environment variable naming the default output directory for `run`.
inline constexpr const char* output_dir_env = "ANISOLAB_OUT_DIR";

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace anisolab::cli
