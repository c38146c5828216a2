#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "actdiag/error.hpp"
#include "actdiag/toy_io.hpp"
#include "actdiag/toylab.hpp"
#include "doctest.h"
#include "support/gradcheck.hpp"
#include "support/reference.hpp"
#include "support/testing.hpp"

using namespace actdiag;
using namespace actdiag::toy;

namespace {

// Classifies by distance from the origin against the midpoint radius.
double radius_oracle_accuracy(const Dataset& d, const CirclesConfig& cfg) {
  const double cut = 0.5 * (cfg.inner_radius + cfg.outer_radius);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < d.n; ++i) {
    auto x = d.row(i);
    const int guess = std::hypot(x[0], x[1]) > cut ? 1 : 0;
    hit += guess == d.labels[i];
  }
  return static_cast<double>(hit) / static_cast<double>(d.n);
}

MLPModel single_unit(double w_in, double b_in, double w_out, double b_out) {
  MLPModel m;
  m.layers.push_back({1, 1, {w_in}, {b_in}});
  m.layers.push_back({1, 1, {w_out}, {b_out}});
  return m;
}

Dataset one_column(std::vector<double> xs, std::vector<int> ys) {
  Dataset d;
  d.n = xs.size();
  d.d = 1;
  d.inputs = std::move(xs);
  d.labels = std::move(ys);
  return d;
}

}  // namespace

TEST_SUITE("toylab") {

TEST_CASE("circles generator") {
  SUBCASE("base geometry is separable by radius") {
    auto cfg = default_circles(Variant::Base);
    auto data = gen_circles(cfg);
    CHECK(data.train.d == 2);
    CHECK(radius_oracle_accuracy(data.test, cfg) >= 0.99);
  }
  SUBCASE("labels are exactly balanced") {
    for (auto v : {Variant::Base, Variant::Spurious}) {
      for (std::size_t n : {1u, 7u, 1000u}) {
        auto cfg = default_circles(v);
        cfg.n_train = n;
        auto d = gen_circles(cfg).train;
        const auto ones = static_cast<std::size_t>(std::count(d.labels.begin(), d.labels.end(), 1));
        CHECK(ones == n - n / 2);
      }
    }
  }
  SUBCASE("spurious alpha = 1 sets the shortcut on every train row, test is random") {
    auto cfg = default_circles(Variant::Spurious);
    auto data = gen_circles(cfg);
    CHECK(data.train.d == 3);
    for (std::size_t i = 0; i < data.train.n; ++i) {
      CHECK(data.train.row(i)[2] == (data.train.labels[i] == 0 ? 1.0 : -1.0));
    }
    std::size_t agree = 0;
    for (std::size_t i = 0; i < data.test.n; ++i) {
      agree += data.test.row(i)[2] == (data.test.labels[i] == 0 ? 1.0 : -1.0);
    }
    CHECK(std::fabs(static_cast<double>(agree) / static_cast<double>(data.test.n) - 0.5) < 0.06);
  }
  SUBCASE("shuffled beta = 1 destroys the radius rule on train only") {
    auto cfg = default_circles(Variant::Shuffled);
    cfg.n_train = 1000;
    auto data = gen_circles(cfg);
    CHECK(std::fabs(radius_oracle_accuracy(data.train, cfg) - 0.5) <= 0.05);
    CHECK(radius_oracle_accuracy(data.test, cfg) >= 0.99);
  }
  SUBCASE("determinism") {
    auto cfg = default_circles(Variant::Spurious);
    cfg.alpha = 0.5;
    cfg.seed = 42;
    auto a = gen_circles(cfg), b = gen_circles(cfg);
    CHECK(a.train.inputs == b.train.inputs);
    CHECK(a.train.labels == b.train.labels);
    CHECK(a.test.inputs == b.test.inputs);
  }
  SUBCASE("knobs are validated") {
    CirclesConfig cfg;
    cfg.alpha = 0.5;
    CHECK(testing::error_kind([&] { gen_circles(cfg); }) == ErrorKind::InvalidConfig);
    cfg = default_circles(Variant::Spurious);
    cfg.alpha = 1.5;
    CHECK(testing::error_kind([&] { gen_circles(cfg); }) == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("backpropagation matches central differences") {
  auto r = reference::gradient_check(100, 77);
  CHECK(r.max_relative_error <= 1e-4);
}

TEST_CASE("hand-computed forward pass") {
  auto m = single_unit(2.0, -1.0, 3.0, 0.5);
  std::vector<double> x{1.5};
  CHECK(m.logit(x) == 3.0 * 2.0 + 0.5);
  auto acts = capture_activations(m, one_column({1.5, 0.25}, {0, 1}), 0);
  CHECK(acts(0, 0) == 2.0);
  CHECK(acts(1, 0) == 0.0);
  CHECK(m.predict(x) == doctest::Approx(1.0 / (1.0 + std::exp(-6.5))));
}

TEST_CASE("activation capture") {
  auto cfg = default_circles(Variant::Base);
  cfg.n_train = 64;
  auto data = gen_circles(cfg);
  auto model = init_mlp(2, std::vector<std::size_t>{8, 5}, 3);
  auto a = capture_activations(model, data.train, 1);
  CHECK(a.samples() == 64);
  CHECK(a.neurons() == 5);
  for (double v : a.data()) CHECK(v >= 0.0);
  auto b = capture_activations(model, data.train, 1);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  CHECK(testing::error_kind([&] { capture_activations(model, data.train, 2); }) == ErrorKind::LayerOutOfRange);
  auto wide = init_mlp(3, std::vector<std::size_t>{4}, 1);
  CHECK(testing::error_kind([&] { capture_activations(wide, data.train, 0); }) == ErrorKind::WidthMismatch);
}

TEST_CASE("accuracy") {
  auto always_one = single_unit(0.0, 0.0, 0.0, 5.0);
  CHECK(eval_accuracy(always_one, one_column({1, 2, 3, 4}, {0, 1, 0, 1})) == 0.5);
  CHECK(testing::error_kind([&] { eval_accuracy(always_one, one_column({}, {})); }) == ErrorKind::EmptyDataset);
}

TEST_CASE("training is deterministic and learns the base task") {
  auto cfg = default_circles(Variant::Base);
  auto data = gen_circles(cfg);
  auto hyper = default_hyper(Variant::Base);
  auto a = train_mlp(data.train, hyper, 5, &data.test);
  auto b = train_mlp(data.train, hyper, 5, &data.test);
  CHECK(a.model.layers[0].weights == b.model.layers[0].weights);
  CHECK(a.train_loss == b.train_loss);
  CHECK(a.train_loss.size() == hyper.epochs);
  CHECK(a.test_loss.size() == hyper.epochs / hyper.trace_interval);
  CHECK(eval_accuracy(a.model, data.test) >= 0.95);
}

TEST_CASE("spurious alpha = 1 model relies on the shortcut") {
  auto cfg = default_circles(Variant::Spurious);
  auto data = gen_circles(cfg);
  auto model = train_mlp(data.train, default_hyper(Variant::Spurious), 0).model;
  CHECK(eval_accuracy(model, data.test) <= 0.6);
}

TEST_CASE("shuffled beta = 1 with memorization capacity") {
  auto cfg = default_circles(Variant::Shuffled);
  auto data = gen_circles(cfg);
  auto hyper = default_hyper(Variant::Shuffled);
  CHECK(hyper.hidden == std::vector<std::size_t>{64, 64});
  CHECK(cfg.n_train == 200);
  auto model = train_mlp(data.train, hyper, 0).model;
  CHECK(eval_accuracy(model, data.train) >= 0.9);
  const double test = eval_accuracy(model, data.test);
  CHECK(test >= 0.4);
  CHECK(test <= 0.6);
}

TEST_CASE("complexity norms") {
  SUBCASE("1x1 layer") {
    MLPModel m;
    m.layers.push_back({1, 1, {2.0}, {0.0}});
    auto n = complexity_norms(m);
    CHECK(n.two_norm == doctest::Approx(2.0));
    CHECK(n.frobenius_norm == 2.0);
    CHECK(n.path_norm == 2.0);
  }
  SUBCASE("a zero layer zeroes every norm") {
    auto m = init_mlp(3, std::vector<std::size_t>{4, 4}, 1);
    std::fill(m.layers[1].weights.begin(), m.layers[1].weights.end(), 0.0);
    auto n = complexity_norms(m);
    CHECK(n.two_norm == 0.0);
    CHECK(n.frobenius_norm == 0.0);
    CHECK(n.path_norm == 0.0);
  }
  SUBCASE("spectral norm against an eigenvalue oracle") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int t = 0; t < 20; ++t) {
      DenseLayer l{3, 4, std::vector<double>(12), std::vector<double>(4, 0.0)};
      for (double& w : l.weights) w = g(rng);
      // W^T W (3x3) for a 4x3 (out x in) matrix.
      std::vector<double> wtw(9, 0.0);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          for (std::size_t o = 0; o < 4; ++o) wtw[i * 3 + j] += l.weights[o * 3 + i] * l.weights[o * 3 + j];
      const double oracle = std::sqrt(reference::jacobi_max_eigenvalue(wtw, 3));
      CHECK(std::fabs(spectral_norm(l) - oracle) <= 1e-6);
    }
  }
  SUBCASE("path norm scales as c^L") {
    auto m = init_mlp(2, std::vector<std::size_t>{3, 3}, 9);
    const double base = complexity_norms(m).path_norm;
    for (auto& l : m.layers)
      for (double& w : l.weights) w *= 2.0;  // exact in binary floating point
    CHECK(complexity_norms(m).path_norm == doctest::Approx(base * 8.0).epsilon(1e-14));
  }
}

TEST_CASE("sweep aggregation and correlations") {
  std::vector<SettingSummary> med;
  for (int i = 0; i < 5; ++i) {
    SettingSummary s;
    s.setting = i * 0.25;
    s.test_accuracy = 1.0 - 0.1 * i;
    s.mean_entropy = {1.0, 3.0 - 0.2 * i};
    s.mean_mi = {0.5, 0.2 + 0.1 * i};
    s.norms = {1.0 + i, 2.0 + i, 3.0 + i};
    med.push_back(s);
  }
  auto c = sweep_correlations(med);
  auto find = [&](const std::string& name) {
    for (const auto& m : c)
      if (m.measure == name) return m;
    FAIL("missing measure " << name);
    return MeasureCorrelation{};
  };
  CHECK(*find("mean_entropy").tau == 1.0);
  CHECK(*find("mean_mi").tau == 1.0);
  CHECK(find("mean_mi").negated);
  CHECK(*find("frobenius_norm").tau == -1.0);
  CHECK(!find("mean_entropy@L0").tau);  // constant across settings

  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 2, 3}) == 2.5);
}

TEST_CASE("small sweep end to end") {
  auto opts = default_sweep(Variant::Spurious);
  opts.grid = {0.0, 1.0};
  opts.seeds = {0, 1};
  opts.hyper.epochs = 20;
  opts.probe_samples = 200;
  opts.threads = 2;
  auto r = run_sweep(opts);
  CHECK(r.runs.size() == 4);
  CHECK(r.medians.size() == 2);
  CHECK(r.runs[2].setting == 1.0);
  CHECK(r.runs[3].seed == 1);
  opts.threads = 1;
  CHECK(sweep_to_json(run_sweep(opts)).dump() == sweep_to_json(r).dump());
  const auto csv = sweep_to_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

}  // TEST_SUITE
