#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace lrising {

struct RunOptions {
  std::string config_path;  // empty: the built-in desk config
  std::string out_dir;      // empty: $LRISING_OUT, then ./out
  bool has_seed = false;
  uint64_t seed = 0;
  size_t workers = 0;  // 0: logical cores
  bool strict = false;
  bool override_scale_guard = false;
};

// exit codes shared with the shell front end
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitScaleGuard = 3;
inline constexpr int kExitViolated = 4;

inline constexpr const char* kVersion = "0.1.0";

std::string default_config_json();

/// Dispatches one command (enumerate, contours, sample, verify <bound>,
/// sweep). Artifacts land under the resolved output directory; every run that
/// passes validation writes a manifest echoing the resolved config. Data files
/// are deterministic functions of config + seed.
int run_command(const std::string& command, const std::string& bound, const RunOptions& opts,
                std::ostream& out, std::ostream& err);

}  // namespace lrising
