#pragma once

#include <string>

#include "actdiag/toylab.hpp"
#include "json.hpp"

namespace actdiag::toy {

inline constexpr const char* kRunSchema = "actdiag-toy-run/1";
inline constexpr const char* kSweepSchema = "actdiag-sweep/1";

nlohmann::json circles_to_json(const CirclesConfig& cfg);
nlohmann::json hyper_to_json(const Hyperparameters& h);
nlohmann::json record_to_json(const RunRecord& r);
nlohmann::json measure_to_json(const MeasureCorrelation& m);

/// Run record plus the full configuration that produced it.
nlohmann::json run_to_json(const RunConfig& cfg, const RunRecord& r);

/// Options, every run, per-setting medians and the tau block.
nlohmann::json sweep_to_json(const SweepResult& s);

/// One row per setting x seed, final-layer measures plus norms.
std::string sweep_to_csv(const SweepResult& s);

}  // namespace actdiag::toy
