#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "actdiag/analysis.hpp"
#include "actdiag/error.hpp"
#include "actdiag/parallel.hpp"
#include "actdiag/toylab.hpp"

namespace actdiag::toy {

namespace {

constexpr std::uint64_t kProbeSalt = 0x70726f6265ULL;

double setting_of(const CirclesConfig& c) {
  if (c.variant == Variant::Spurious) return c.alpha.value_or(0.0);
  if (c.variant == Variant::Shuffled) return c.beta.value_or(0.0);
  return 0.0;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ToyRun run_toy(const RunConfig& cfg) {
  cfg.circles.validate();
  auto data = gen_circles(cfg.circles);

  // Unlabeled sample from the training distribution for activation capture.
  CirclesConfig probe_cfg = cfg.circles;
  probe_cfg.n_train = cfg.probe_samples;
  probe_cfg.n_test = 1;
  probe_cfg.seed = cfg.circles.seed ^ kProbeSalt;
  if (probe_cfg.variant == Variant::Shuffled) probe_cfg.beta = 0.0;
  const Dataset probe = gen_circles(probe_cfg).train;

  ToyRun run;
  auto trained = train_mlp(data.train, cfg.hyper, cfg.circles.seed, &data.test);
  run.model = std::move(trained.model);

  RunRecord& rec = run.record;
  rec.variant = cfg.circles.variant;
  rec.setting = setting_of(cfg.circles);
  rec.seed = cfg.circles.seed;
  rec.train_accuracy = eval_accuracy(run.model, data.train);
  rec.test_accuracy = eval_accuracy(run.model, data.test);
  rec.final_train_loss = trained.train_loss.empty() ? 0.0 : trained.train_loss.back();
  rec.norms = complexity_norms(run.model);

  EstimatorConfig est = cfg.estimator;
  est.seed = cfg.circles.seed;
  AnalyzeOptions opts;
  opts.threads = 1;
  for (std::size_t l = 0; l < run.model.hidden_layers(); ++l) {
    auto acts = capture_activations(run.model, probe, l);
    auto report = analyze(acts, est, opts);
    rec.mean_entropy.push_back(report.mean_entropy);
    rec.mean_mi.push_back(report.mean_mi);
    run.activations.push_back(std::move(acts));
  }
  return run;
}

SweepOptions default_sweep(Variant v) {
  SweepOptions o;
  o.variant = v;
  o.grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  o.seeds = {0, 1, 2, 3, 4};
  o.circles = default_circles(v);
  o.hyper = default_hyper(v);
  return o;
}

const MeasureCorrelation& SweepResult::correlation(std::string_view measure) const {
  for (const auto& c : correlations) {
    if (c.measure == measure) return c;
  }
  throw std::out_of_range("no correlation named " + std::string(measure));
}

std::vector<MeasureCorrelation> sweep_correlations(std::span<const SettingSummary> medians) {
  std::vector<double> acc, ent, mi, two, fro, path;
  for (const auto& s : medians) {
    acc.push_back(s.test_accuracy);
    ent.push_back(s.mean_entropy.back());
    mi.push_back(s.mean_mi.back());
    two.push_back(s.norms.two_norm);
    fro.push_back(s.norms.frobenius_norm);
    path.push_back(s.norms.path_norm);
  }
  std::vector<MeasureCorrelation> out;
  out.push_back(correlate_measure("mean_entropy", acc, ent, false));
  out.push_back(correlate_measure("mean_mi", acc, mi, true));
  out.push_back(correlate_measure("two_norm", acc, two, false));
  out.push_back(correlate_measure("frobenius_norm", acc, fro, false));
  out.push_back(correlate_measure("path_norm", acc, path, false));
  const std::size_t layers = medians.empty() ? 0 : medians.front().mean_entropy.size();
  for (std::size_t l = 0; l < layers; ++l) {
    std::vector<double> e, m;
    for (const auto& s : medians) {
      e.push_back(s.mean_entropy[l]);
      m.push_back(s.mean_mi[l]);
    }
    out.push_back(correlate_measure("mean_entropy@L" + std::to_string(l), acc, e, false));
    out.push_back(correlate_measure("mean_mi@L" + std::to_string(l), acc, m, true));
  }
  return out;
}

SweepResult run_sweep(const SweepOptions& opts) {
  if (opts.grid.size() < 2) throw Error(ErrorKind::InvalidConfig, "sweep grid needs at least two settings");
  if (opts.seeds.empty()) throw Error(ErrorKind::InvalidConfig, "sweep needs at least one seed");
  if (opts.variant == Variant::Base) throw Error(ErrorKind::InvalidConfig, "sweeps vary alpha or beta, not base");

  SweepResult result;
  result.options = opts;
  const std::size_t total = opts.grid.size() * opts.seeds.size();
  result.runs.resize(total);
  parallel_for(total, opts.threads, 1, [&](std::size_t idx, std::size_t) {
    const double setting = opts.grid[idx / opts.seeds.size()];
    const std::uint64_t seed = opts.seeds[idx % opts.seeds.size()];
    RunConfig rc;
    rc.circles = opts.circles;
    rc.circles.variant = opts.variant;
    rc.circles.alpha.reset();
    rc.circles.beta.reset();
    (opts.variant == Variant::Spurious ? rc.circles.alpha : rc.circles.beta) = setting;
    rc.circles.seed = seed;
    rc.hyper = opts.hyper;
    rc.estimator = opts.estimator;
    rc.probe_samples = opts.probe_samples;
    try {
      result.runs[idx] = run_toy(rc).record;
    } catch (const Error& e) {
      throw Error(e.kind(), "setting " + std::to_string(setting) + ", seed " + std::to_string(seed) + ": " + e.what());
    }
  });

  for (std::size_t g = 0; g < opts.grid.size(); ++g) {
    SettingSummary s;
    s.setting = opts.grid[g];
    std::vector<double> acc, two, fro, path;
    const std::size_t layers = result.runs[g * opts.seeds.size()].mean_entropy.size();
    std::vector<std::vector<double>> ent(layers), mi(layers);
    for (std::size_t k = 0; k < opts.seeds.size(); ++k) {
      const auto& r = result.runs[g * opts.seeds.size() + k];
      acc.push_back(r.test_accuracy);
      two.push_back(r.norms.two_norm);
      fro.push_back(r.norms.frobenius_norm);
      path.push_back(r.norms.path_norm);
      for (std::size_t l = 0; l < layers; ++l) {
        ent[l].push_back(r.mean_entropy[l]);
        mi[l].push_back(r.mean_mi[l]);
      }
    }
    s.test_accuracy = median(acc);
    s.norms = {median(two), median(fro), median(path)};
    for (std::size_t l = 0; l < layers; ++l) {
      s.mean_entropy.push_back(median(ent[l]));
      s.mean_mi.push_back(median(mi[l]));
    }
    result.medians.push_back(std::move(s));
  }
  result.correlations = sweep_correlations(result.medians);
  return result;
}

}  // namespace actdiag::toy
