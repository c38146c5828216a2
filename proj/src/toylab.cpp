#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "actdiag/error.hpp"
#include "actdiag/toylab.hpp"

namespace actdiag::toy {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream identifiers so data, training and probes never share random draws.
enum Stream : std::uint64_t { kTrainData = 1, kTestData = 2, kInit = 3, kShuffle = 4 };

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Binary cross-entropy of a logit, computed without overflow.
double bce_with_logit(double z, int y) {
  return std::max(z, 0.0) - static_cast<double>(y) * z + std::log1p(std::exp(-std::fabs(z)));
}

Dataset sample_circles(const CirclesConfig& cfg, std::size_t n, bool train, std::mt19937_64& rng) {
  Dataset ds;
  ds.n = n;
  ds.d = cfg.variant == Variant::Spurious ? 3 : 2;
  ds.split = train ? "train" : "test";
  ds.inputs.resize(n * ds.d);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = i < n / 2 ? 0 : 1;
  std::shuffle(ds.labels.begin(), ds.labels.end(), rng);

  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (ds.labels[i] == 0 ? cfg.inner_radius : cfg.outer_radius) + cfg.noise_sigma * noise(rng);
    const double t = angle(rng);
    ds.inputs[i * ds.d] = r * std::cos(t);
    ds.inputs[i * ds.d + 1] = r * std::sin(t);
  }

  std::bernoulli_distribution coin(0.5);
  if (cfg.variant == Variant::Spurious) {
    std::vector<char> agrees(n, 0);
    if (train) {
      const auto n_agree = static_cast<std::size_t>(std::llround(*cfg.alpha * static_cast<double>(n)));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t i = 0; i < n_agree; ++i) agrees[idx[i]] = 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double shortcut = ds.labels[i] == 0 ? 1.0 : -1.0;
      ds.inputs[i * ds.d + 2] = agrees[i] ? shortcut : (coin(rng) ? 1.0 : -1.0);
    }
  }
  if (cfg.variant == Variant::Shuffled && train) {
    const auto n_shuffle = static_cast<std::size_t>(std::llround(*cfg.beta * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (std::size_t i = 0; i < n_shuffle; ++i) ds.labels[idx[i]] = coin(rng) ? 1 : 0;
  }
  return ds;
}

void require_width(const MLPModel& model, const Dataset& data) {
  if (data.d != model.input_width()) {
    throw Error(ErrorKind::WidthMismatch, "dataset has " + std::to_string(data.d) + " features, model expects " +
                                              std::to_string(model.input_width()));
  }
}

// y = W x + b
void affine(const DenseLayer& l, const double* x, double* y) {
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* w = l.weights.data() + o * l.in;
    double acc = l.bias[o];
    for (std::size_t i = 0; i < l.in; ++i) acc += w[i] * x[i];
    y[o] = acc;
  }
}

}  // namespace

std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Base: return "base";
    case Variant::Spurious: return "spurious";
    case Variant::Shuffled: return "shuffled";
  }
  return "base";
}

std::optional<Variant> parse_variant(std::string_view text) noexcept {
  if (text == "base") return Variant::Base;
  if (text == "spurious") return Variant::Spurious;
  if (text == "shuffled") return Variant::Shuffled;
  return std::nullopt;
}

void CirclesConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
  if (n_train < 1 || n_test < 1) fail("n_train and n_test must be positive");
  if (!(inner_radius > 0.0) || !(inner_radius < outer_radius)) fail("need 0 < inner_radius < outer_radius");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) fail("noise_sigma must be finite and nonnegative");
  if (alpha && (variant != Variant::Spurious || !(*alpha >= 0.0 && *alpha <= 1.0))) {
    fail("alpha must lie in [0,1] and is only valid for the spurious variant");
  }
  if (beta && (variant != Variant::Shuffled || !(*beta >= 0.0 && *beta <= 1.0))) {
    fail("beta must lie in [0,1] and is only valid for the shuffled variant");
  }
  if (variant == Variant::Spurious && !alpha) fail("spurious variant requires alpha");
  if (variant == Variant::Shuffled && !beta) fail("shuffled variant requires beta");
}

CirclesConfig default_circles(Variant v) {
  CirclesConfig c;
  c.variant = v;
  if (v == Variant::Spurious) c.alpha = 1.0;
  if (v == Variant::Shuffled) {
    c.beta = 1.0;
    c.n_train = 200;
  }
  return c;
}

CirclesData gen_circles(const CirclesConfig& cfg) {
  cfg.validate();
  std::mt19937_64 train_rng(mix(cfg.seed, kTrainData));
  std::mt19937_64 test_rng(mix(cfg.seed, kTestData));
  return {sample_circles(cfg, cfg.n_train, true, train_rng), sample_circles(cfg, cfg.n_test, false, test_rng)};
}

Hyperparameters default_hyper(Variant v) {
  Hyperparameters h;
  if (v == Variant::Shuffled) {
    // Random labels need far more optimizer steps than 500 epochs of minibatches
    // on 200 rows provide; full-batch steps at a larger rate reach >= 0.9 train
    // accuracy without the dead-unit collapse seen at 1e-2.
    h.hidden = {64, 64};
    h.learning_rate = 3e-3;
    h.batch_size = 200;
    h.epochs = 4000;
  }
  return h;
}

double MLPModel::logit(std::span<const double> x) const {
  std::vector<double> cur(x.begin(), x.end()), next;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    next.resize(layers[l].out);
    affine(layers[l], cur.data(), next.data());
    if (l + 1 < layers.size()) {
      for (double& v : next) v = std::max(v, 0.0);
    }
    cur.swap(next);
  }
  return cur[0];
}

double MLPModel::predict(std::span<const double> x) const { return sigmoid(logit(x)); }

MLPModel init_mlp(std::size_t input_width, std::span<const std::size_t> hidden, std::uint64_t seed) {
  if (input_width < 1) throw Error(ErrorKind::InvalidConfig, "input width must be positive");
  MLPModel model;
  model.seed = seed;
  model.hyper.hidden.assign(hidden.begin(), hidden.end());
  std::mt19937_64 rng(mix(seed, kInit));
  std::size_t in = input_width;
  std::vector<std::size_t> widths(hidden.begin(), hidden.end());
  widths.push_back(1);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    if (widths[l] < 1) throw Error(ErrorKind::InvalidConfig, "hidden widths must be >= 1");
    DenseLayer layer;
    layer.in = in;
    layer.out = widths[l];
    const bool output = l + 1 == widths.size();
    std::normal_distribution<double> w(0.0, std::sqrt((output ? 1.0 : 2.0) / static_cast<double>(in)));
    layer.weights.resize(layer.in * layer.out);
    for (double& v : layer.weights) v = w(rng);
    layer.bias.assign(layer.out, 0.0);
    model.layers.push_back(std::move(layer));
    in = widths[l];
  }
  return model;
}

double loss_and_gradient(const MLPModel& model, const Dataset& data, std::span<const std::size_t> rows,
                         std::vector<DenseLayer>* grad) {
  require_width(model, data);
  const std::size_t L = model.layers.size();
  if (grad) {
    grad->resize(L);
    for (std::size_t l = 0; l < L; ++l) {
      auto& g = (*grad)[l];
      g.in = model.layers[l].in;
      g.out = model.layers[l].out;
      g.weights.assign(g.in * g.out, 0.0);
      g.bias.assign(g.out, 0.0);
    }
  }
  // acts[0] is the input; acts[l + 1] the output of layer l (post-ReLU for hidden layers).
  std::vector<std::vector<double>> acts(L + 1);
  for (std::size_t l = 0; l < L; ++l) acts[l + 1].resize(model.layers[l].out);
  std::vector<double> delta, prev_delta;

  const double scale = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (std::size_t r : rows) {
    auto x = data.row(r);
    acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < L; ++l) {
      affine(model.layers[l], acts[l].data(), acts[l + 1].data());
      if (l + 1 < L) {
        for (double& v : acts[l + 1]) v = std::max(v, 0.0);
      }
    }
    const double z = acts[L][0];
    const int y = data.labels[r];
    loss += bce_with_logit(z, y);
    if (!grad) continue;

    delta.assign(1, (sigmoid(z) - static_cast<double>(y)) * scale);
    for (std::size_t l = L; l-- > 0;) {
      const auto& layer = model.layers[l];
      auto& g = (*grad)[l];
      const auto& a_in = acts[l];
      for (std::size_t o = 0; o < layer.out; ++o) {
        g.bias[o] += delta[o];
        double* gw = g.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) gw[i] += delta[o] * a_in[i];
      }
      if (l == 0) break;
      prev_delta.assign(layer.in, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        const double* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) prev_delta[i] += w[i] * delta[o];
      }
      // ReLU derivative, taken as 0 at the kink.
      for (std::size_t i = 0; i < layer.in; ++i) {
        if (!(a_in[i] > 0.0)) prev_delta[i] = 0.0;
      }
      delta.swap(prev_delta);
    }
  }
  return loss * scale;
}

TrainedModel train_mlp(const Dataset& train, const Hyperparameters& hyper, std::uint64_t seed, const Dataset* test) {
  if (train.n == 0) throw Error(ErrorKind::EmptyDataset, "training set is empty");
  if (hyper.batch_size < 1 || !(hyper.learning_rate > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "batch size and learning rate must be positive");
  }
  TrainedModel out;
  out.model = init_mlp(train.d, hyper.hidden, seed);
  out.model.hyper = hyper;
  MLPModel& model = out.model;

  std::vector<DenseLayer> m(model.layers.size()), v(model.layers.size()), grad;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    m[l].weights.assign(model.layers[l].weights.size(), 0.0);
    m[l].bias.assign(model.layers[l].bias.size(), 0.0);
    v[l] = m[l];
  }
  auto adam = [&](std::vector<double>& p, std::vector<double>& mm, std::vector<double>& vv,
                  const std::vector<double>& g, double c1, double c2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      mm[i] = hyper.beta1 * mm[i] + (1.0 - hyper.beta1) * g[i];
      vv[i] = hyper.beta2 * vv[i] + (1.0 - hyper.beta2) * g[i] * g[i];
      p[i] -= hyper.learning_rate * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + hyper.epsilon);
    }
  };

  std::mt19937_64 rng(mix(seed, kShuffle));
  std::vector<std::size_t> order(train.n), all_test;
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (test) {
    all_test.resize(test->n);
    std::iota(all_test.begin(), all_test.end(), std::size_t{0});
  }
  double b1t = 1.0, b2t = 1.0;
  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train.n; start += hyper.batch_size) {
      const std::size_t len = std::min(hyper.batch_size, train.n - start);
      std::span<const std::size_t> batch(order.data() + start, len);
      epoch_loss += loss_and_gradient(model, train, batch, &grad) * static_cast<double>(len);
      b1t *= hyper.beta1;
      b2t *= hyper.beta2;
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        adam(model.layers[l].weights, m[l].weights, v[l].weights, grad[l].weights, 1.0 - b1t, 1.0 - b2t);
        adam(model.layers[l].bias, m[l].bias, v[l].bias, grad[l].bias, 1.0 - b1t, 1.0 - b2t);
      }
    }
    epoch_loss /= static_cast<double>(train.n);
    if (!std::isfinite(epoch_loss)) {
      throw Error(ErrorKind::DivergedTraining, "non-finite training loss at epoch " + std::to_string(epoch));
    }
    out.train_loss.push_back(epoch_loss);
    const bool trace = (epoch + 1) % std::max<std::size_t>(hyper.trace_interval, 1) == 0 || epoch + 1 == hyper.epochs;
    if (test && test->n > 0 && trace) out.test_loss.push_back(loss_and_gradient(model, *test, all_test, nullptr));
  }
  return out;
}

ActivationMatrix capture_activations(const MLPModel& model, const Dataset& inputs, std::size_t layer) {
  if (layer >= model.hidden_layers()) {
    throw Error(ErrorKind::LayerOutOfRange, "layer " + std::to_string(layer) + " requested, model has " +
                                                std::to_string(model.hidden_layers()) + " hidden layers");
  }
  require_width(model, inputs);
  if (inputs.n == 0) throw Error(ErrorKind::EmptyDataset, "no inputs to capture activations on");
  const std::size_t width = model.layers[layer].out;
  std::vector<double> out(inputs.n * width);
  std::vector<double> cur, next;
  for (std::size_t r = 0; r < inputs.n; ++r) {
    auto x = inputs.row(r);
    cur.assign(x.begin(), x.end());
    for (std::size_t l = 0; l <= layer; ++l) {
      next.resize(model.layers[l].out);
      affine(model.layers[l], cur.data(), next.data());
      for (double& v : next) v = std::max(v, 0.0);
      cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), out.begin() + static_cast<std::ptrdiff_t>(r * width));
  }
  ActivationMatrix m(inputs.n, width, std::move(out));
  m.source = "hidden layer " + std::to_string(layer);
  return m;
}

double eval_accuracy(const MLPModel& model, const Dataset& data) {
  if (data.n == 0) throw Error(ErrorKind::EmptyDataset, "cannot score an empty dataset");
  require_width(model, data);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.n; ++r) {
    const int pred = model.predict(data.row(r)) >= 0.5 ? 1 : 0;
    correct += pred == data.labels[r];
  }
  return static_cast<double>(correct) / static_cast<double>(data.n);
}

double spectral_norm(const DenseLayer& layer, std::size_t iterations, double tolerance) {
  // Power iteration on W^T W starting from the all-ones direction.
  std::vector<double> v(layer.in, 1.0 / std::sqrt(static_cast<double>(layer.in))), wv(layer.out), next(layer.in);
  double sigma = 0.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t o = 0; o < layer.out; ++o) {
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in; ++i) acc += layer.weights[o * layer.in + i] * v[i];
      wv[o] = acc;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      for (std::size_t i = 0; i < layer.in; ++i) next[i] += layer.weights[o * layer.in + i] * wv[o];
    }
    double norm = 0.0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    const double estimate = std::sqrt(norm);  // ||W^T W v|| -> sigma^2 for unit v
    for (std::size_t i = 0; i < layer.in; ++i) v[i] = next[i] / norm;
    const bool converged = std::fabs(estimate - sigma) <= tolerance * std::max(1.0, estimate);
    sigma = estimate;
    if (converged) break;
  }
  return sigma;
}

NormRecord complexity_norms(const MLPModel& model) {
  NormRecord n{1.0, 1.0, 0.0};
  for (const auto& l : model.layers) {
    n.two_norm *= spectral_norm(l);
    double f = 0.0;
    for (double w : l.weights) f += w * w;
    n.frobenius_norm *= std::sqrt(f);
  }
  // Squared weights are nonnegative, so the rectifiers act as the identity and
  // the pass reduces to repeated matrix-vector products.
  std::vector<double> cur(model.input_width(), 1.0), next;
  for (const auto& l : model.layers) {
    next.assign(l.out, 0.0);
    for (std::size_t o = 0; o < l.out; ++o) {
      for (std::size_t i = 0; i < l.in; ++i) next[o] += l.weights[o * l.in + i] * l.weights[o * l.in + i] * cur[i];
    }
    cur.swap(next);
  }
  double total = 0.0;
  for (double v : cur) total += v;
  n.path_norm = std::sqrt(total);
  return n;
}

}  // namespace actdiag::toy
