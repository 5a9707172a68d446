#pragma once

#include <iosfwd>

namespace salient {

inline constexpr const char* kPipelineVersion = "1.0.0";
inline constexpr const char* kSaliencyFormat = "SALIENCY 1";
inline constexpr const char* kGradientFormat = "GRAD1F 1";

/// Command-line entry point. Returns 0 on success, 1 on bad input or usage,
/// 2 when an internal invariant breaks.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace salient
