#include "actdiag/toy_io.hpp"

#include <cmath>
#include <sstream>

#include "actdiag/report_json.hpp"

namespace actdiag::toy {

using nlohmann::json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
json number_or_null(const std::optional<double>& v) { return v ? number_or_null(*v) : json(nullptr); }

json vector_or_nulls(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number_or_null(x));
  return out;
}

json norms_to_json(const NormRecord& n) {
  return {{"two_norm", number_or_null(n.two_norm)},
          {"frobenius_norm", number_or_null(n.frobenius_norm)},
          {"path_norm", number_or_null(n.path_norm)}};
}

// Shortest text that reads back to the same double, so CSV and JSON agree.
std::string csv_number(double v) {
  if (!std::isfinite(v)) return "";
  return json(v).dump();
}

}  // namespace

json circles_to_json(const CirclesConfig& cfg) {
  return {{"variant", std::string(to_string(cfg.variant))},
          {"n_train", cfg.n_train},
          {"n_test", cfg.n_test},
          {"inner_radius", cfg.inner_radius},
          {"outer_radius", cfg.outer_radius},
          {"noise_sigma", cfg.noise_sigma},
          {"alpha", cfg.alpha ? json(*cfg.alpha) : json(nullptr)},
          {"beta", cfg.beta ? json(*cfg.beta) : json(nullptr)},
          {"seed", cfg.seed}};
}

json hyper_to_json(const Hyperparameters& h) {
  return {{"hidden", h.hidden},       {"learning_rate", h.learning_rate}, {"batch_size", h.batch_size},
          {"epochs", h.epochs},       {"beta1", h.beta1},                 {"beta2", h.beta2},
          {"epsilon", h.epsilon},     {"trace_interval", h.trace_interval}};
}

json record_to_json(const RunRecord& r) {
  return {{"variant", std::string(to_string(r.variant))},
          {"setting", r.setting},
          {"seed", r.seed},
          {"train_accuracy", r.train_accuracy},
          {"test_accuracy", r.test_accuracy},
          {"final_train_loss", number_or_null(r.final_train_loss)},
          {"mean_entropy", vector_or_nulls(r.mean_entropy)},
          {"mean_mi", vector_or_nulls(r.mean_mi)},
          {"norms", norms_to_json(r.norms)}};
}

json measure_to_json(const MeasureCorrelation& m) {
  return {{"measure", m.measure},
          {"negated", m.negated},
          {"tau", number_or_null(m.tau)},
          {"tau_raw", number_or_null(m.tau_raw)},
          {"abs_tau", number_or_null(m.abs_tau)},
          {"pearson", number_or_null(m.pearson)}};
}

json run_to_json(const RunConfig& cfg, const RunRecord& r) {
  json j;
  j["schema"] = kRunSchema;
  j["circles"] = circles_to_json(cfg.circles);
  j["hyper"] = hyper_to_json(cfg.hyper);
  j["estimator"] = config_to_json(cfg.estimator);
  j["probe_samples"] = cfg.probe_samples;
  j["record"] = record_to_json(r);
  return j;
}

json sweep_to_json(const SweepResult& s) {
  const auto& o = s.options;
  json j;
  j["schema"] = kSweepSchema;
  j["variant"] = std::string(to_string(o.variant));
  j["grid"] = o.grid;
  j["seeds"] = o.seeds;
  j["circles"] = circles_to_json(o.circles);
  j["hyper"] = hyper_to_json(o.hyper);
  j["estimator"] = config_to_json(o.estimator);
  j["probe_samples"] = o.probe_samples;

  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back(record_to_json(r));
  j["runs"] = std::move(runs);

  json medians = json::array();
  for (const auto& m : s.medians) {
    medians.push_back({{"setting", m.setting},
                       {"test_accuracy", m.test_accuracy},
                       {"mean_entropy", vector_or_nulls(m.mean_entropy)},
                       {"mean_mi", vector_or_nulls(m.mean_mi)},
                       {"norms", norms_to_json(m.norms)}});
  }
  j["medians"] = std::move(medians);

  json tau = json::array();
  for (const auto& c : s.correlations) tau.push_back(measure_to_json(c));
  j["tau"] = std::move(tau);
  return j;
}

std::string sweep_to_csv(const SweepResult& s) {
  std::ostringstream out;
  out << "variant,setting,seed,train_accuracy,test_accuracy,mean_entropy,mean_mi,two_norm,frobenius_norm,path_norm\n";
  for (const auto& r : s.runs) {
    out << to_string(r.variant) << ',' << csv_number(r.setting) << ',' << r.seed << ','
        << csv_number(r.train_accuracy) << ',' << csv_number(r.test_accuracy) << ','
        << csv_number(r.mean_entropy.empty() ? NAN : r.mean_entropy.back()) << ','
        << csv_number(r.mean_mi.empty() ? NAN : r.mean_mi.back()) << ',' << csv_number(r.norms.two_norm) << ','
        << csv_number(r.norms.frobenius_norm) << ',' << csv_number(r.norms.path_norm) << '\n';
  }
  return out.str();
}

}  // namespace actdiag::toy
