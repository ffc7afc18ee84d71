#pragma once

#include <string>

#include "mrshe/config.hpp"

namespace mrshe {

inline constexpr const char* kVersion = "0.1.0";

// Each pipeline returns its scientific outputs as strings so callers can
// byte-compare runs; run_cli writes them to disk and records a manifest.

struct SimulateOutputs {
  std::string trajectory_json;
  std::string k_csv;
  std::string snapshots_csv;
};
SimulateOutputs run_simulate_pipeline(const SimulateConfig& cfg);

struct CoupleOutputs {
  std::string report_json;
  std::string marginals_csv;
};
CoupleOutputs run_couple_pipeline(const CoupleConfig& cfg);

struct ConstantsOutputs {
  std::string record_json;
};
ConstantsOutputs run_constants_pipeline(const ConstantsConfig& cfg);

struct KernelCheckOutputs {
  std::string summary_json;
  std::string pointwise_csv;
  std::string integrals_csv;
  bool all_ok = false;
};
KernelCheckOutputs run_kernel_check_pipeline(const KernelCheckConfig& cfg);

struct ConcentrationOutputs {
  std::string report_json;
  std::string tails_csv;
};
ConcentrationOutputs run_concentration_pipeline(const ConcentrationConfig& cfg);

/// Exit status: 0 success, 2 configuration error, 3 numerical blow-up,
/// 4 failed scientific assertion, 1 anything else.
int run_cli(int argc, const char* const* argv);

}  // namespace mrshe
