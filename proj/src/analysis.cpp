#include "actdiag/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "actdiag/error.hpp"
#include "actdiag/parallel.hpp"

namespace actdiag {

std::vector<double> DiversityReport::pair_values() const {
  std::vector<double> out;
  if (!mi) return out;
  out.reserve(n_neurons * (n_neurons - 1) / 2);
  for (std::size_t i = 0; i < n_neurons; ++i) {
    for (std::size_t j = i + 1; j < n_neurons; ++j) out.push_back((*mi)(i, j));
  }
  return out;
}

std::vector<std::size_t> subsample_rows(std::size_t rows, std::size_t keep, std::uint64_t seed) {
  std::vector<std::size_t> idx(rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (keep >= rows) return idx;
  std::mt19937_64 rng(seed ^ 0x5eed5a3b1e5ULL);
  for (std::size_t i = 0; i < keep; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> unordered_pairs(std::size_t n) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(n * (n - 1) / 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

namespace {

MISummary summarize(std::span<const double> values, std::size_t bins) {
  MISummary s;
  s.pairs = values.size();
  s.counts.assign(bins, 0);
  if (values.empty()) return s;
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.variance = ss / static_cast<double>(values.size());
  const double width = s.max - s.min;
  for (double v : values) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((v - s.min) / width * static_cast<double>(bins)) : 0;
    ++s.counts[std::min(b, bins - 1)];
  }
  return s;
}

}  // namespace

DiversityReport analyze(const ActivationMatrix& input, const EstimatorConfig& cfg, const AnalyzeOptions& opts) {
  cfg.validate();

  std::optional<ActivationMatrix> reduced;
  if (cfg.max_samples && input.samples() > *cfg.max_samples) {
    reduced = input.select_rows(subsample_rows(input.samples(), *cfg.max_samples, cfg.seed));
  }
  const ActivationMatrix& m = reduced ? *reduced : input;
  const std::size_t n = m.neurons(), s = m.samples();
  if (s <= cfg.k) {
    throw Error(ErrorKind::TooFewSamples,
                "matrix has " + std::to_string(s) + " samples, k=" + std::to_string(cfg.k) + " needs more");
  }

  DiversityReport r;
  r.n_samples = s;
  r.n_samples_input = input.samples();
  r.n_neurons = n;
  r.config = cfg;
  r.diagonal = opts.diagonal;
  r.source = input.source;
  r.neuron_labels = input.neuron_labels;

  std::vector<PreparedColumn> prepared(n);
  r.entropy.n_bins = cfg.n_bins;
  r.entropy.values.resize(n);
  parallel_for(n, opts.threads, 1, [&](std::size_t i, std::size_t) {
    auto col = m.column(i);
    r.entropy.values[i] = entropy(col, cfg.n_bins);
    prepared[i] = prepare_column(col, cfg);
  });
  double hsum = 0.0;
  for (double h : r.entropy.values) hsum += h;
  r.mean_entropy = hsum / static_cast<double>(n);

  const auto pairs = unordered_pairs(n);
  std::vector<double> pair_mi(pairs.size());
  const std::size_t workers = opts.threads == 0 ? default_threads() : opts.threads;
  std::vector<KsgWorkspace> spaces(workers);
  parallel_for(pairs.size(), workers, 16, [&](std::size_t p, std::size_t w) {
    pair_mi[p] = ksg_mi_prepared(prepared[pairs[p].first], prepared[pairs[p].second], cfg, spaces[w]);
  });

  double misum = 0.0;
  for (double v : pair_mi) misum += v;
  r.mean_mi = pairs.empty() ? std::numeric_limits<double>::quiet_NaN() : misum / static_cast<double>(pairs.size());
  r.mi_summary = summarize(pair_mi, opts.summary_bins);

  if (n <= opts.full_mi_limit || opts.force_full_mi) {
    MIMatrix mat;
    mat.n = n;
    mat.diagonal = opts.diagonal;
    mat.values.assign(n * n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      auto [i, j] = pairs[p];
      mat.values[i * n + j] = pair_mi[p];
      mat.values[j * n + i] = pair_mi[p];
    }
    if (opts.diagonal == DiagonalPolicy::Included) {
      // I(A;A) only has a finite estimate with the +1 counts.
      parallel_for(n, workers, 1, [&](std::size_t i, std::size_t w) {
        mat.values[i * n + i] = ksg_mi_prepared(prepared[i], prepared[i], cfg, MiMode::KsgCanonical, spaces[w]);
      });
    }
    r.mi = std::move(mat);
  }
  return r;
}

}  // namespace actdiag
