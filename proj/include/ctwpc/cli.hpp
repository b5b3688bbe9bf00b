#pragma once

#include <iosfwd>

#include "ctwpc/io.hpp"

namespace ctwpc::cli {

inline constexpr const char* kToolVersion = "1.0.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;
inline constexpr int kExitIo = 4;

/// The bundled configuration used when --config is absent: fitted cell,
/// 400 cells, open junction on cell 165, no disorder, seed 0.
io::json default_config();

/// Parameter defaults of one subcommand (the "params.<command>" section of a config).
io::json default_params(const std::string& command);

/// Entry point. Errors are reported on `err` as one line of JSON.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctwpc::cli
