#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "actdiag/estimators.hpp"
#include "actdiag/ranking.hpp"
#include "actdiag/tensor_io.hpp"

namespace actdiag::toy {

// ---------------------------------------------------------------------------
// Concentric circles

enum class Variant { Base, Spurious, Shuffled };

std::string_view to_string(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view text) noexcept;

struct CirclesConfig {
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  double inner_radius = 1.0;
  double outer_radius = 2.0;
  double noise_sigma = 0.1;
  Variant variant = Variant::Base;
  /// Fraction of training rows whose third feature agrees with the label.
  std::optional<double> alpha;
  /// Fraction of training rows whose label is redrawn uniformly.
  std::optional<double> beta;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Defaults per variant: the shuffled variant uses a small training set so the
/// network can memorize it.
CirclesConfig default_circles(Variant v);

struct Dataset {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> inputs;  // n x d, row-major
  std::vector<int> labels;
  std::string split;

  std::span<const double> row(std::size_t i) const { return {inputs.data() + i * d, d}; }
};

struct CirclesData {
  Dataset train;
  Dataset test;
};

CirclesData gen_circles(const CirclesConfig& cfg);

// ---------------------------------------------------------------------------
// Feed-forward network

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;
};

struct Hyperparameters {
  std::vector<std::size_t> hidden{16, 16};
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 500;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Test loss is recorded every this many epochs (and after the last one).
  std::size_t trace_interval = 10;
};

Hyperparameters default_hyper(Variant v);

/// Rectified hidden layers followed by a single sigmoid output unit.
struct MLPModel {
  std::vector<DenseLayer> layers;
  Hyperparameters hyper;
  std::uint64_t seed = 0;

  std::size_t input_width() const { return layers.front().in; }
  std::size_t hidden_layers() const { return layers.size() - 1; }
  /// Output logit for one input row.
  double logit(std::span<const double> x) const;
  double predict(std::span<const double> x) const;
};

/// He-initialized network with the given hidden widths.
MLPModel init_mlp(std::size_t input_width, std::span<const std::size_t> hidden, std::uint64_t seed);

/// Mean binary cross-entropy over the given rows; when grad is non-null it
/// receives d(loss)/d(parameter) with the same layout as model.layers.
double loss_and_gradient(const MLPModel& model, const Dataset& data, std::span<const std::size_t> rows,
                         std::vector<DenseLayer>* grad);

struct TrainedModel {
  MLPModel model;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> test_loss;   // every trace_interval epochs, empty without a test set
};

TrainedModel train_mlp(const Dataset& train, const Hyperparameters& hyper, std::uint64_t seed,
                       const Dataset* test = nullptr);

/// Post-ReLU activations of hidden layer `layer` (0-based) on every input row.
ActivationMatrix capture_activations(const MLPModel& model, const Dataset& inputs, std::size_t layer);

double eval_accuracy(const MLPModel& model, const Dataset& data);

struct NormRecord {
  double two_norm = 0.0;
  double frobenius_norm = 0.0;
  double path_norm = 0.0;
};

/// Largest singular value by power iteration on W^T W.
double spectral_norm(const DenseLayer& layer, std::size_t iterations = 200, double tolerance = 1e-9);

NormRecord complexity_norms(const MLPModel& model);

// ---------------------------------------------------------------------------
// Experiments

struct RunConfig {
  CirclesConfig circles;
  Hyperparameters hyper;
  EstimatorConfig estimator;
  /// Size of the unlabeled in-distribution sample used for activations.
  std::size_t probe_samples = 1000;
};

struct RunRecord {
  Variant variant = Variant::Base;
  double setting = 0.0;  // alpha or beta; 0 for base
  std::uint64_t seed = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double final_train_loss = 0.0;
  std::vector<double> mean_entropy;  // per hidden layer
  std::vector<double> mean_mi;       // per hidden layer
  NormRecord norms;
};

struct ToyRun {
  RunRecord record;
  MLPModel model;
  std::vector<ActivationMatrix> activations;  // per hidden layer, on the probe set
};

/// Generates data, trains, evaluates, and analyses every hidden layer.
ToyRun run_toy(const RunConfig& cfg);

struct SweepOptions {
  Variant variant = Variant::Spurious;
  std::vector<double> grid;
  std::vector<std::uint64_t> seeds;
  /// Geometry and sizes; alpha/beta and seed are overwritten per run.
  CirclesConfig circles;
  Hyperparameters hyper;
  EstimatorConfig estimator;
  std::size_t probe_samples = 1000;
  std::size_t threads = 0;
};

SweepOptions default_sweep(Variant v);

struct SettingSummary {
  double setting = 0.0;
  double test_accuracy = 0.0;
  std::vector<double> mean_entropy;
  std::vector<double> mean_mi;
  NormRecord norms;
};

struct SweepResult {
  SweepOptions options;
  std::vector<RunRecord> runs;          // grid-major, then seed
  std::vector<SettingSummary> medians;  // one per grid value
  /// Kendall tau of median test accuracy against each intrinsic measure.
  std::vector<MeasureCorrelation> correlations;

  const MeasureCorrelation& correlation(std::string_view measure) const;
};

SweepResult run_sweep(const SweepOptions& opts);

/// Correlations from already-aggregated settings. Final-layer measures are
/// named mean_entropy / mean_mi; per-layer ones carry an @L<index> suffix.
std::vector<MeasureCorrelation> sweep_correlations(std::span<const SettingSummary> medians);

double median(std::vector<double> values);

}  // namespace actdiag::toy
