#include "actdiag/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "actdiag/error.hpp"

namespace actdiag {

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "kendall_tau inputs differ in length");
  if (a.size() < 2) throw Error(ErrorKind::LengthMismatch, "kendall_tau needs at least two observations");
  long long concordant = 0, discordant = 0, tied_a = 0, tied_b = 0, pairs = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const int sa = sign(a[j] - a[i]), sb = sign(b[j] - b[i]);
      ++pairs;
      if (sa == 0) ++tied_a;
      if (sb == 0) ++tied_b;
      if (sa == 0 || sb == 0) continue;
      (sa == sb ? concordant : discordant)++;
    }
  }
  if (tied_a == pairs || tied_b == pairs) throw Error(ErrorKind::AllTied, "one ranking is constant; tau is undefined");
  const double denom = std::sqrt(static_cast<double>(pairs - tied_a) * static_cast<double>(pairs - tied_b));
  return static_cast<double>(concordant - discordant) / denom;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::LengthMismatch, "pearson inputs differ in length");
  if (a.size() < 2) throw Error(ErrorKind::LengthMismatch, "pearson needs at least two observations");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw Error(ErrorKind::ZeroVariance, "pearson input is constant");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

MeasureCorrelation correlate_measure(std::string name, std::span<const double> extrinsic,
                                     std::span<const double> measure, bool negate) {
  MeasureCorrelation out;
  out.measure = std::move(name);
  out.negated = negate;
  try {
    out.tau_raw = kendall_tau(extrinsic, measure);
    out.tau = negate ? -*out.tau_raw : *out.tau_raw;
    out.abs_tau = std::fabs(*out.tau);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::AllTied) throw;
  }
  try {
    const double r = pearson(extrinsic, measure);
    out.pearson = negate ? -r : r;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ZeroVariance) throw;
  }
  return out;
}

RankingResult rank_models(std::span<const ModelReport> reports,
                          std::span<const std::pair<std::string, double>> extrinsic, MiOrientation orientation) {
  if (extrinsic.size() < 2) throw Error(ErrorKind::IdMismatch, "ranking needs at least two models");
  std::map<std::string, const DiversityReport*> by_id;
  for (const auto& r : reports) {
    if (!by_id.emplace(r.id, &r.report).second) throw Error(ErrorKind::IdMismatch, "duplicate report id '" + r.id + "'");
  }
  if (by_id.size() != extrinsic.size()) {
    throw Error(ErrorKind::IdMismatch, std::to_string(reports.size()) + " reports but " +
                                           std::to_string(extrinsic.size()) + " extrinsic rows");
  }

  RankingResult out;
  std::vector<double> metric, ent, mi;
  std::set<std::string> seen;
  for (const auto& [id, value] : extrinsic) {
    if (!seen.insert(id).second) throw Error(ErrorKind::IdMismatch, "model '" + id + "' listed twice");
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::IdMismatch, "no report for model '" + id + "'");
    out.model_ids.push_back(id);
    metric.push_back(value);
    ent.push_back(it->second->mean_entropy);
    mi.push_back(it->second->mean_mi);
  }
  out.measures.push_back(correlate_measure("mean_entropy", metric, ent, false));
  out.measures.push_back(correlate_measure("mean_mi", metric, mi, orientation == MiOrientation::NegateMi));
  return out;
}

}  // namespace actdiag
