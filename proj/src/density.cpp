#include "actdiag/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "actdiag/error.hpp"

namespace actdiag {

namespace {

double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

double log_sum_exp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

// k-means++ seeding: first centre uniform, the rest drawn with probability
// proportional to squared distance from the nearest chosen centre.
std::vector<double> seed_means(std::span<const double> values, std::size_t k, std::mt19937_64& rng) {
  std::vector<double> centres;
  std::uniform_int_distribution<std::size_t> first(0, values.size() - 1);
  centres.push_back(values[first(rng)]);
  std::vector<double> d2(values.size());
  while (centres.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (double c : centres) best = std::min(best, (values[i] - c) * (values[i] - c));
      d2[i] = best;
      total += best;
    }
    if (total == 0.0) {
      centres.push_back(values[first(rng)]);
      continue;
    }
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng), acc = 0.0;
    std::size_t pick = values.size() - 1;
    for (std::size_t i = 0; i < values.size(); ++i) {
      acc += d2[i];
      if (acc >= target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    centres.push_back(values[pick]);
  }
  return centres;
}

}  // namespace

double DensityModel::pdf(double x) const {
  double p = 0.0;
  for (const auto& c : components) p += c.weight * std::exp(log_normal_pdf(x, c.mean, c.variance));
  return p;
}

MixtureFit fit_mixture(std::span<const double> values, std::size_t k, const DensityFitOptions& opts) {
  const std::size_t n = values.size();
  std::mt19937_64 rng(opts.seed * 0x9e3779b97f4a7c15ULL + k);

  double mean_all = 0.0;
  for (double v : values) mean_all += v;
  mean_all /= static_cast<double>(n);
  double var_all = 0.0;
  for (double v : values) var_all += (v - mean_all) * (v - mean_all);
  var_all = std::max(var_all / static_cast<double>(n), opts.variance_floor);

  MixtureFit fit;
  auto means = seed_means(values, k, rng);
  for (double mu : means) fit.components.push_back({1.0 / static_cast<double>(k), mu, var_all});

  std::vector<double> resp(n * k), logp(k);
  auto e_step = [&]() {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) {
        const auto& g = fit.components[c];
        logp[c] = g.weight > 0.0 ? std::log(g.weight) + log_normal_pdf(values[i], g.mean, g.variance)
                                 : -std::numeric_limits<double>::infinity();
      }
      const double lse = log_sum_exp(logp);
      ll += lse;
      for (std::size_t c = 0; c < k; ++c) resp[i * k + c] = std::exp(logp[c] - lse);
    }
    return ll;
  };

  double ll = e_step();
  fit.log_likelihood_trace.push_back(ll);
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    for (std::size_t c = 0; c < k; ++c) {
      double nk = 0.0, sx = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nk += resp[i * k + c];
        sx += resp[i * k + c] * values[i];
      }
      auto& g = fit.components[c];
      g.weight = nk / static_cast<double>(n);
      if (nk <= 0.0) continue;
      g.mean = sx / nk;
      double sv = 0.0;
      for (std::size_t i = 0; i < n; ++i) sv += resp[i * k + c] * (values[i] - g.mean) * (values[i] - g.mean);
      g.variance = std::max(sv / nk, opts.variance_floor);
    }
    double wsum = 0.0;
    for (const auto& g : fit.components) wsum += g.weight;
    for (auto& g : fit.components) g.weight /= wsum;

    const double next = e_step();
    fit.log_likelihood_trace.push_back(next);
    const bool converged = std::fabs(next - ll) <= opts.tolerance * std::max(1.0, std::fabs(ll));
    ll = next;
    if (converged) break;
  }
  fit.log_likelihood = ll;
  return fit;
}

DensityModel fit_density(std::span<const double> values, const DensityFitOptions& opts) {
  if (values.size() < 2) throw Error(ErrorKind::DegenerateData, "density fit needs at least two values");
  if (opts.max_components < 1) throw Error(ErrorKind::InvalidConfig, "max_components must be >= 1");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteData, "density input contains a non-finite value");
  }
  const double n = static_cast<double>(values.size());
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;

  DensityModel model;
  if (lo == hi) {
    model.degenerate = true;
    model.chosen_k = 1;
    model.components.push_back({1.0, lo, opts.variance_floor});
  } else {
    double best_bic = std::numeric_limits<double>::infinity();
    // Every component needs at least one distinct support point to be identifiable.
    std::vector<double> distinct(values.begin(), values.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const std::size_t max_k = std::min(opts.max_components, distinct.size());
    for (std::size_t k = 1; k <= max_k; ++k) {
      MixtureFit fit = fit_mixture(values, k, opts);
      const double params = 3.0 * static_cast<double>(k) - 1.0;
      const double bic = -2.0 * fit.log_likelihood + params * std::log(n);
      model.bic.push_back(bic);
      if (bic < best_bic) {
        best_bic = bic;
        model.chosen_k = k;
        model.components = std::move(fit.components);
        model.log_likelihood_trace = std::move(fit.log_likelihood_trace);
      }
    }
  }

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  double spread = std::sqrt(var / n);
  for (const auto& c : model.components) spread = std::max(spread, std::sqrt(c.variance));
  const double a = lo - 3.0 * spread, b = hi + 3.0 * spread;
  const std::size_t g = std::max<std::size_t>(opts.grid_points, 2);
  model.grid.resize(g);
  for (std::size_t i = 0; i < g; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(g - 1);
    model.grid[i] = {x, model.pdf(x)};
  }
  return model;
}

}  // namespace actdiag
