#pragma once

#include <string>

#include "actdiag/analysis.hpp"
#include "actdiag/density.hpp"
#include "actdiag/ranking.hpp"
#include "json.hpp"

namespace actdiag {

inline constexpr const char* kReportSchema = "actdiag-report/1";
inline constexpr const char* kDensitySchema = "actdiag-density/1";
inline constexpr const char* kRankingSchema = "actdiag-ranking/1";

nlohmann::json config_to_json(const EstimatorConfig& cfg);
EstimatorConfig config_from_json(const nlohmann::json& j);

/// NaN entries (excluded diagonal, undefined means) serialize as null.
nlohmann::json report_to_json(const DiversityReport& r);
DiversityReport report_from_json(const nlohmann::json& j);

nlohmann::json density_to_json(const DensityModel& d);
nlohmann::json ranking_to_json(const RankingResult& r);

/// Stable text form used for every file the tools write: two-space indent,
/// trailing newline.
std::string dump(const nlohmann::json& j);

}  // namespace actdiag
