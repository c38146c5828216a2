#pragma once

// Independent reference implementations used only by the test suites. They
// share nothing with the library beyond column preparation (z-score + jitter)
// and the digamma function, so that the neighbour search, range counting and
// accumulation paths are checked against a direct O(S^2) scan.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "actdiag/analysis.hpp"
#include "actdiag/estimators.hpp"

namespace actdiag::reference {

struct BruteCounts {
  std::vector<double> radius;
  std::vector<std::size_t> count_x;
  std::vector<std::size_t> count_y;
};

inline BruteCounts brute_counts(std::span<const double> x, std::span<const double> y, std::size_t k) {
  const std::size_t n = x.size();
  BruteCounts c;
  c.radius.resize(n);
  c.count_x.resize(n);
  c.count_y.resize(n);
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      d.push_back(std::max(std::fabs(x[j] - x[i]), std::fabs(y[j] - y[i])));
    }
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    const double eps = d[k - 1];
    c.radius[i] = eps;
    std::size_t ex = 0, ey = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      ex += std::fabs(x[j] - x[i]) < eps;
      ey += std::fabs(y[j] - y[i]) < eps;
    }
    c.count_x[i] = ex;
    c.count_y[i] = ey;
  }
  return c;
}

inline double brute_ksg(std::span<const double> x, std::span<const double> y, std::size_t k, MiMode mode,
                        bool clamp_negative = false) {
  const auto c = brute_counts(x, y, k);
  const std::size_t n = x.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (mode == MiMode::PaperLiteral) {
      acc += digamma(static_cast<double>(std::max<std::size_t>(c.count_x[i], 1))) +
             digamma(static_cast<double>(std::max<std::size_t>(c.count_y[i], 1)));
    } else {
      acc += digamma(static_cast<double>(c.count_x[i] + 1)) + digamma(static_cast<double>(c.count_y[i] + 1));
    }
  }
  const double mi = digamma(static_cast<double>(k)) + digamma(static_cast<double>(n)) - acc / static_cast<double>(n);
  return clamp_negative ? std::max(mi, 0.0) : mi;
}

/// Naive entropy: bins by direct formula, counts via a map-free scan.
inline double brute_entropy(std::span<const double> col, std::size_t bins) {
  double lo = col[0], hi = col[0];
  for (double v : col) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<std::size_t> counts(bins, 0);
  for (double v : col) {
    std::size_t b = 0;
    if (hi > lo) b = std::min(bins - 1, static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins)));
    ++counts[b];
  }
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(col.size());
    h -= p * std::log(p);
  }
  return h;
}

/// Double-loop analysis over every unordered pair with the brute-force estimator.
inline DiversityReport brute_analyze(const ActivationMatrix& m, const EstimatorConfig& cfg) {
  const std::size_t n = m.neurons();
  DiversityReport r;
  r.n_neurons = n;
  r.n_samples = m.samples();
  r.entropy.values.resize(n);
  std::vector<std::vector<double>> prepared(n);
  double hsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto col = m.column(i);
    r.entropy.values[i] = brute_entropy(col, cfg.n_bins);
    hsum += r.entropy.values[i];
    prepared[i] = prepare_column(col, cfg).values;
  }
  r.mean_entropy = hsum / static_cast<double>(n);
  MIMatrix mat;
  mat.n = n;
  mat.values.assign(n * n, std::numeric_limits<double>::quiet_NaN());
  double misum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = brute_ksg(prepared[i], prepared[j], cfg.k, cfg.mi_mode, cfg.clamp_negative);
      mat.values[i * n + j] = mat.values[j * n + i] = v;
      misum += v;
      ++pairs;
    }
  }
  r.mean_mi = pairs ? misum / static_cast<double>(pairs) : std::numeric_limits<double>::quiet_NaN();
  r.mi = std::move(mat);
  return r;
}

/// Largest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double jacobi_max_eigenvalue(std::vector<double> a, std::size_t n) {
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a[r * n + p], arq = a[r * n + q];
          a[r * n + p] = c * arp - s * arq;
          a[r * n + q] = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a[p * n + r], aqr = a[q * n + r];
          a[p * n + r] = c * apr - s * aqr;
          a[q * n + r] = s * apr + c * aqr;
        }
      }
    }
  }
  double best = a[0];
  for (std::size_t i = 1; i < n; ++i) best = std::max(best, a[i * n + i]);
  return best;
}

}  // namespace actdiag::reference
