#include <cmath>
#include <random>
#include <vector>

#include "actdiag/density.hpp"
#include "actdiag/error.hpp"
#include "doctest.h"
#include "support/testing.hpp"

using namespace actdiag;

TEST_SUITE("density") {

TEST_CASE("point mass") {
  auto d = fit_density(std::vector<double>(20, 0.7));
  CHECK(d.degenerate);
  REQUIRE(d.components.size() == 1);
  CHECK(d.components[0].mean == 0.7);
  CHECK(d.components[0].weight == 1.0);
  CHECK(d.components[0].variance == 1e-8);
}

TEST_CASE("two separated clusters") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 0.1);
  std::vector<double> v;
  for (int i = 0; i < 500; ++i) v.push_back(g(rng));
  for (int i = 0; i < 500; ++i) v.push_back(10.0 + g(rng));
  auto d = fit_density(v);
  REQUIRE(d.chosen_k == 2);
  std::vector<double> means{d.components[0].mean, d.components[1].mean};
  std::sort(means.begin(), means.end());
  CHECK(std::fabs(means[0]) < 0.05);
  CHECK(std::fabs(means[1] - 10.0) < 0.05);
}

TEST_CASE("grid density integrates to one") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(1.0, 0.3);
  std::vector<double> v;
  for (int i = 0; i < 400; ++i) v.push_back(i % 3 ? g(rng) : 3.0 + 0.5 * g(rng));
  auto d = fit_density(v);
  REQUIRE(d.grid.size() == 512);
  double area = 0.0;
  for (std::size_t i = 1; i < d.grid.size(); ++i) {
    area += 0.5 * (d.grid[i].density + d.grid[i - 1].density) * (d.grid[i].x - d.grid[i - 1].x);
  }
  CHECK(std::fabs(area - 1.0) <= 0.01);
}

TEST_CASE("EM invariants: monotone likelihood and valid weights") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  DensityFitOptions opts;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> v(50 + rng() % 300);
    for (auto& x : v) x = g(rng) * (1 + rng() % 3) + static_cast<double>(rng() % 4);
    opts.seed = rng();
    for (std::size_t k = 1; k <= 5; ++k) {
      auto fit = fit_mixture(v, k, opts);
      for (std::size_t i = 1; i < fit.log_likelihood_trace.size(); ++i) {
        CHECK(fit.log_likelihood_trace[i] >= fit.log_likelihood_trace[i - 1] - 1e-9 * std::fabs(fit.log_likelihood_trace[i]));
      }
      double w = 0.0;
      for (const auto& c : fit.components) {
        CHECK(c.weight >= 0.0);
        CHECK(c.variance >= opts.variance_floor);
        w += c.weight;
      }
      CHECK(std::fabs(w - 1.0) <= 1e-9);
    }
  }
}

TEST_CASE("fits are deterministic given the seed") {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back(std::sin(i * 1.3) + (i % 2) * 4);
  DensityFitOptions o;
  o.seed = 7;
  auto a = fit_density(v, o), b = fit_density(v, o);
  CHECK(a.chosen_k == b.chosen_k);
  CHECK(a.bic == b.bic);
  for (std::size_t i = 0; i < a.grid.size(); ++i) CHECK(a.grid[i].density == b.grid[i].density);
}

TEST_CASE("fewer than two values is rejected") {
  CHECK(testing::error_kind([] { fit_density(std::vector<double>{1.0}); }).has_value());
}

}  // TEST_SUITE
