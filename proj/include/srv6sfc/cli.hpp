#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "srv6sfc/error.hpp"

namespace srv6sfc {

// Process exit codes; each error path has its own.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kInternal = 1;
inline constexpr int kUsage = 2;
inline constexpr int kPacketsDropped = 3;
inline constexpr int kIo = 4;
inline constexpr int kParse = 5;
inline constexpr int kValidation = 6;
inline constexpr int kBadPrefix = 7;
inline constexpr int kUnknownSegment = 8;
inline constexpr int kBadNextHop = 9;
inline constexpr int kInsufficientPoints = 10;
inline constexpr int kDegenerateX = 11;
inline constexpr int kEmptySweep = 12;
inline constexpr int kBadArgument = 13;
inline constexpr int kSimulation = 14;
}  // namespace exit_code

int exit_code_for(Errc code);

/// Entry point of the srv6sfc tool. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// Same, with args excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace srv6sfc
