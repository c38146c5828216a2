#include "actdiag/report_json.hpp"

#include <cmath>
#include <limits>

#include "actdiag/error.hpp"

namespace actdiag {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json number_or_null(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

double number_or_nan(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

[[noreturn]] void bad_report(const std::string& what) {
  throw Error(ErrorKind::MalformedReport, "report JSON: " + what);
}

}  // namespace

json config_to_json(const EstimatorConfig& cfg) {
  json j;
  j["n_bins"] = cfg.n_bins;
  j["k"] = cfg.k;
  j["mi_mode"] = std::string(to_string(cfg.mi_mode));
  j["normalize"] = cfg.normalize;
  j["jitter"] = cfg.jitter;
  j["jitter_scale"] = cfg.jitter_scale;
  j["max_samples"] = cfg.max_samples ? json(*cfg.max_samples) : json(nullptr);
  j["seed"] = cfg.seed;
  j["clamp_negative"] = cfg.clamp_negative;
  return j;
}

EstimatorConfig config_from_json(const json& j) {
  EstimatorConfig cfg;
  cfg.n_bins = j.value("n_bins", cfg.n_bins);
  cfg.k = j.value("k", cfg.k);
  if (j.contains("mi_mode")) {
    auto mode = parse_mi_mode(j["mi_mode"].get<std::string>());
    if (!mode) bad_report("unknown mi_mode");
    cfg.mi_mode = *mode;
  }
  cfg.normalize = j.value("normalize", cfg.normalize);
  cfg.jitter = j.value("jitter", cfg.jitter);
  cfg.jitter_scale = j.value("jitter_scale", cfg.jitter_scale);
  if (j.contains("max_samples") && !j["max_samples"].is_null()) cfg.max_samples = j["max_samples"].get<std::size_t>();
  cfg.seed = j.value("seed", cfg.seed);
  cfg.clamp_negative = j.value("clamp_negative", cfg.clamp_negative);
  return cfg;
}

json report_to_json(const DiversityReport& r) {
  json j;
  j["schema"] = kReportSchema;
  j["n_neurons"] = r.n_neurons;
  j["n_samples"] = r.n_samples;
  j["n_samples_input"] = r.n_samples_input;
  j["source"] = r.source ? json(*r.source) : json(nullptr);
  if (r.neuron_labels) j["neuron_labels"] = *r.neuron_labels;
  j["config"] = config_to_json(r.config);
  j["config"]["diagonal"] = r.diagonal == DiagonalPolicy::Excluded ? "excluded" : "included";
  j["entropy"] = r.entropy.values;
  j["mean_entropy"] = number_or_null(r.mean_entropy);
  j["mean_mi"] = number_or_null(r.mean_mi);

  json mi;
  if (r.mi) {
    mi["kind"] = "full";
    mi["diagonal"] = r.mi->diagonal == DiagonalPolicy::Excluded ? "excluded" : "included";
    json rows = json::array();
    for (std::size_t i = 0; i < r.mi->n; ++i) {
      json row = json::array();
      for (std::size_t c = 0; c < r.mi->n; ++c) row.push_back(number_or_null((*r.mi)(i, c)));
      rows.push_back(std::move(row));
    }
    mi["values"] = std::move(rows);
  } else {
    mi["kind"] = "histogram";
  }
  const auto& s = r.mi_summary;
  mi["pairs"] = s.pairs;
  mi["min"] = s.min;
  mi["max"] = s.max;
  mi["mean"] = s.mean;
  mi["variance"] = s.variance;
  mi["counts"] = s.counts;
  j["mi"] = std::move(mi);
  return j;
}

DiversityReport report_from_json(const json& j) {
  if (!j.is_object() || j.value("schema", "") != kReportSchema) bad_report("missing or unknown schema tag");
  DiversityReport r;
  try {
    r.n_neurons = j.at("n_neurons").get<std::size_t>();
    r.n_samples = j.at("n_samples").get<std::size_t>();
    r.n_samples_input = j.value("n_samples_input", r.n_samples);
    if (j.contains("source") && !j["source"].is_null()) r.source = j["source"].get<std::string>();
    if (j.contains("neuron_labels")) r.neuron_labels = j["neuron_labels"].get<std::vector<std::string>>();
    r.config = config_from_json(j.at("config"));
    r.diagonal = j["config"].value("diagonal", "excluded") == "included" ? DiagonalPolicy::Included
                                                                          : DiagonalPolicy::Excluded;
    r.entropy.values = j.at("entropy").get<std::vector<double>>();
    r.entropy.n_bins = r.config.n_bins;
    r.mean_entropy = number_or_nan(j.at("mean_entropy"));
    r.mean_mi = number_or_nan(j.at("mean_mi"));

    const json& mi = j.at("mi");
    r.mi_summary.pairs = mi.value("pairs", std::size_t{0});
    r.mi_summary.min = mi.value("min", 0.0);
    r.mi_summary.max = mi.value("max", 0.0);
    r.mi_summary.mean = mi.value("mean", 0.0);
    r.mi_summary.variance = mi.value("variance", 0.0);
    if (mi.contains("counts")) r.mi_summary.counts = mi["counts"].get<std::vector<std::size_t>>();
    if (mi.at("kind") == "full") {
      MIMatrix m;
      m.n = r.n_neurons;
      m.diagonal = mi.value("diagonal", "excluded") == "included" ? DiagonalPolicy::Included
                                                                  : DiagonalPolicy::Excluded;
      const json& rows = mi.at("values");
      if (rows.size() != m.n) bad_report("MI matrix row count differs from n_neurons");
      for (const auto& row : rows) {
        if (row.size() != m.n) bad_report("MI matrix is not square");
        for (const auto& v : row) m.values.push_back(number_or_nan(v));
      }
      r.mi = std::move(m);
    }
  } catch (const json::exception& e) {
    bad_report(e.what());
  }
  if (r.entropy.values.size() != r.n_neurons) bad_report("entropy length differs from n_neurons");
  return r;
}

json density_to_json(const DensityModel& d) {
  json j;
  j["schema"] = kDensitySchema;
  j["chosen_k"] = d.chosen_k;
  j["degenerate"] = d.degenerate;
  json comps = json::array();
  for (const auto& c : d.components) comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
  j["components"] = std::move(comps);
  j["bic"] = d.bic;
  j["log_likelihood_trace"] = d.log_likelihood_trace;
  json xs = json::array(), ys = json::array();
  for (const auto& g : d.grid) {
    xs.push_back(g.x);
    ys.push_back(g.density);
  }
  j["grid"] = {{"x", std::move(xs)}, {"density", std::move(ys)}};
  return j;
}

json ranking_to_json(const RankingResult& r) {
  json j;
  j["schema"] = kRankingSchema;
  j["models"] = r.model_ids;
  json ms = json::array();
  for (const auto& m : r.measures) {
    ms.push_back({{"measure", m.measure},
                  {"negated", m.negated},
                  {"tau", number_or_null(m.tau)},
                  {"tau_raw", number_or_null(m.tau_raw)},
                  {"abs_tau", number_or_null(m.abs_tau)},
                  {"pearson", number_or_null(m.pearson)}});
  }
  j["measures"] = std::move(ms);
  return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace actdiag
