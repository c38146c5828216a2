#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "actdiag/analysis.hpp"

namespace actdiag {

/// Tau-b: (C - D) / sqrt((n0 - t_a)(n0 - t_b)) by direct pair counting.
double kendall_tau(std::span<const double> a, std::span<const double> b);

double pearson(std::span<const double> a, std::span<const double> b);

/// How mean MI is oriented before correlating. Higher MI is the heuristic
/// memorization signature, so NegateMi makes "more diverse" rank higher.
enum class MiOrientation { NegateMi, Raw };

struct MeasureCorrelation {
  std::string measure;
  bool negated = false;
  std::optional<double> tau;      // after orientation; empty if a ranking is all tied
  std::optional<double> tau_raw;  // before orientation
  std::optional<double> abs_tau;
  std::optional<double> pearson;
};

/// Correlates one intrinsic measure with the extrinsic metric, optionally
/// negating the measure first. Undefined correlations come back empty.
MeasureCorrelation correlate_measure(std::string name, std::span<const double> extrinsic,
                                     std::span<const double> measure, bool negate);

struct ModelReport {
  std::string id;
  DiversityReport report;
};

struct RankingResult {
  std::vector<std::string> model_ids;  // in extrinsic-input order
  std::vector<MeasureCorrelation> measures;
};

RankingResult rank_models(std::span<const ModelReport> reports,
                          std::span<const std::pair<std::string, double>> extrinsic,
                          MiOrientation orientation = MiOrientation::NegateMi);

}  // namespace actdiag
