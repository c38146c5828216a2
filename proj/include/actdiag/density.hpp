#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace actdiag {

struct GaussianComponent {
  double weight = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

struct GridPoint {
  double x = 0.0;
  double density = 0.0;
};

struct DensityFitOptions {
  std::size_t max_components = 5;
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;
  double variance_floor = 1e-8;
  std::size_t grid_points = 512;
  std::uint64_t seed = 0;
};

/// One-dimensional Gaussian mixture chosen by BIC, with its density sampled on
/// a regular grid for plotting.
struct DensityModel {
  std::vector<GaussianComponent> components;
  std::vector<GridPoint> grid;
  std::size_t chosen_k = 0;
  std::vector<double> bic;                     // one entry per candidate K
  std::vector<double> log_likelihood_trace;    // EM trace of the chosen K
  bool degenerate = false;                     // all inputs identical

  double pdf(double x) const;
};

/// Result of EM for a fixed number of components.
struct MixtureFit {
  std::vector<GaussianComponent> components;
  std::vector<double> log_likelihood_trace;
  double log_likelihood = 0.0;
};

MixtureFit fit_mixture(std::span<const double> values, std::size_t n_components, const DensityFitOptions& opts);

DensityModel fit_density(std::span<const double> values, const DensityFitOptions& opts = {});

}  // namespace actdiag
