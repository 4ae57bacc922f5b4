// Copyright 2026 The pcn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pcn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point behind the pcn binary. args excludes the program name.
/// Subcommands: gen-data, train, eval, gradcheck, inspect.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcn::cli
