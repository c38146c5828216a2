#include "actdiag/estimators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "actdiag/error.hpp"

namespace actdiag {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform in [-1, 1), a pure function of (seed, key, index).
double jitter_unit(std::uint64_t seed, std::uint64_t key, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(key ^ splitmix64(index)));
  return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::NonFiniteData, std::string(what) + " contains a non-finite value");
  }
}

// Index of the first entry in [first, first + n) for which pred fails, given
// that pred holds on a prefix. Branch-free so the compiler can use cmov.
template <class Pred>
std::size_t first_failing(const double* first, std::size_t n, Pred pred) {
  if (n == 0) return 0;
  const double* base = first;
  while (n > 1) {
    const std::size_t half = n / 2;
    base = pred(base[half]) ? base + half : base;
    n -= half;
  }
  return static_cast<std::size_t>(base - first) + (pred(*base) ? 1 : 0);
}

// Number of sorted entries within strict distance eps of sorted[pos], using
// the same |a - b| < eps predicate as a direct scan.
std::size_t count_within(std::span<const double> sorted, std::size_t pos, double eps) {
  const double v = sorted[pos];
  const double* data = sorted.data();
  // Right side: s - v < eps holds on a prefix of [pos, n).
  const std::size_t hi = pos + first_failing(data + pos, sorted.size() - pos, [&](double s) { return s - v < eps; });
  // Left side: v - s < eps holds on a suffix of [0, pos).
  const std::size_t lo = first_failing(data, pos, [&](double s) { return !(v - s < eps); });
  return hi - lo;
}

}  // namespace

std::string_view to_string(MiMode mode) noexcept {
  return mode == MiMode::PaperLiteral ? "paper_literal" : "ksg_canonical";
}

std::optional<MiMode> parse_mi_mode(std::string_view text) noexcept {
  if (text == "paper" || text == "paper_literal") return MiMode::PaperLiteral;
  if (text == "ksg" || text == "ksg_canonical") return MiMode::KsgCanonical;
  return std::nullopt;
}

void EstimatorConfig::validate() const {
  if (n_bins < 1) throw Error(ErrorKind::InvalidConfig, "n_bins must be >= 1");
  if (k < 1) throw Error(ErrorKind::InvalidConfig, "k must be >= 1");
  if (!(jitter_scale > 0.0) || !std::isfinite(jitter_scale)) {
    throw Error(ErrorKind::InvalidConfig, "jitter_scale must be a positive finite number");
  }
  if (max_samples && *max_samples < 1) throw Error(ErrorKind::InvalidConfig, "max_samples must be >= 1");
}

std::vector<std::size_t> bin_assignments(std::span<const double> column, std::size_t n_bins) {
  if (column.empty()) throw Error(ErrorKind::EmptyColumn, "cannot bin an empty column");
  if (n_bins < 1) throw Error(ErrorKind::InvalidConfig, "n_bins must be >= 1");
  require_finite(column, "column");
  auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
  const double lo = *lo_it, width = *hi_it - *lo_it;
  std::vector<std::size_t> bins(column.size(), 0);
  if (width == 0.0) return bins;
  const double nb = static_cast<double>(n_bins);
  for (std::size_t i = 0; i < column.size(); ++i) {
    auto b = static_cast<std::size_t>((column[i] - lo) / width * nb);
    bins[i] = std::min(b, n_bins - 1);
  }
  return bins;
}

double entropy(std::span<const double> column, std::size_t n_bins) {
  auto bins = bin_assignments(column, n_bins);
  std::vector<std::size_t> counts(n_bins, 0);
  for (auto b : bins) ++counts[b];
  const double s = static_cast<double>(column.size());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / s;
    h -= p * std::log(p);
  }
  return h;
}

double digamma(double x, DigammaMode mode) {
  if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorKind::NonPositiveArgument, "digamma needs a positive argument");
  if (mode == DigammaMode::PaperApprox) return std::log(x) - 0.5 / x;

  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // Asymptotic series in 1/x^2 with Bernoulli-number coefficients B_2n / 2n.
  const double inv2 = 1.0 / (x * x);
  const double tail =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return shift + std::log(x) - 0.5 / x - tail;
}

std::vector<double> integer_digamma_table(std::size_t n) {
  std::vector<double> t(n + 1, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 1; i <= n; ++i) t[i] = digamma(static_cast<double>(i));
  return t;
}

std::uint64_t column_key(std::span<const double> column) {
  std::uint64_t h = splitmix64(column.size());
  for (double v : column) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

PreparedColumn prepare_column(std::span<const double> column, const EstimatorConfig& cfg) {
  require_finite(column, "column");
  const std::size_t n = column.size();
  PreparedColumn out;
  out.values.assign(column.begin(), column.end());

  if (cfg.normalize && n > 0) {
    double mean = 0.0;
    for (double v : out.values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : out.values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (double& v : out.values) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  }
  if (cfg.jitter && n > 0) {
    auto [lo, hi] = std::minmax_element(out.values.begin(), out.values.end());
    const double amplitude = cfg.jitter_scale * (*hi - *lo);
    if (amplitude > 0.0) {
      const std::uint64_t key = column_key(column);
      for (std::size_t i = 0; i < n; ++i) out.values[i] += amplitude * jitter_unit(cfg.seed, key, i);
    }
  }

  out.order.resize(n);
  std::iota(out.order.begin(), out.order.end(), 0U);
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return out.values[a] < out.values[b]; });
  out.sorted.resize(n);
  out.rank.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    out.sorted[p] = out.values[out.order[p]];
    out.rank[out.order[p]] = static_cast<std::uint32_t>(p);
  }
  return out;
}

void StripIndex::build(const PreparedColumn& x, const PreparedColumn& y) {
  const std::size_t n = x.values.size();
  width_ = std::max<std::size_t>(8, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  const std::size_t strips = (n + width_ - 1) / width_;
  sx_.resize(n);
  sy_.resize(n);
  sid_.resize(n);
  slot_of_.resize(n);
  xlo_.resize(strips);
  xhi_.resize(strips);
  for (std::size_t s = 0; s < strips; ++s) {
    const std::size_t lo = s * width_, hi = std::min(n, lo + width_);
    std::copy(x.order.begin() + static_cast<std::ptrdiff_t>(lo), x.order.begin() + static_cast<std::ptrdiff_t>(hi),
              sid_.begin() + static_cast<std::ptrdiff_t>(lo));
    std::sort(sid_.begin() + static_cast<std::ptrdiff_t>(lo), sid_.begin() + static_cast<std::ptrdiff_t>(hi),
              [&](std::uint32_t a, std::uint32_t b) { return y.rank[a] < y.rank[b]; });
    for (std::size_t q = lo; q < hi; ++q) {
      sx_[q] = x.values[sid_[q]];
      sy_[q] = y.values[sid_[q]];
      slot_of_[sid_[q]] = static_cast<std::uint32_t>(q);
    }
    xlo_[s] = x.sorted[lo];
    xhi_[s] = x.sorted[hi - 1];
  }
}

void StripIndex::scan_strip(std::size_t strip, std::size_t start, std::uint32_t self, double xi, double yi,
                            std::size_t k) {
  const std::size_t lo = strip * width_, hi = std::min(sy_.size(), lo + width_);
  double& kth = best_[k - 1];
  auto offer = [&](std::size_t q) {
    if (sid_[q] == self) return;
    const double d = std::max(std::fabs(sx_[q] - xi), std::fabs(sy_[q] - yi));
    if (d >= kth) return;
    std::size_t slot = k - 1;
    while (slot > 0 && best_[slot - 1] > d) {
      best_[slot] = best_[slot - 1];
      --slot;
    }
    best_[slot] = d;
  };
  // y is sorted within the strip, so the y gap bounds every remaining entry.
  for (std::size_t q = start; q < hi; ++q) {
    if (sy_[q] - yi >= kth) break;
    offer(q);
  }
  for (std::size_t q = start; q-- > lo;) {
    if (yi - sy_[q] >= kth) break;
    offer(q);
  }
}

double StripIndex::kth_distance(std::uint32_t i, std::size_t k) {
  best_.assign(k, std::numeric_limits<double>::infinity());
  const std::size_t q = slot_of_[i];
  const std::size_t home = q / width_;
  const double xi = sx_[q], yi = sy_[q];
  scan_strip(home, q, i, xi, yi, k);

  auto start_in = [&](std::size_t strip) {
    const std::size_t lo = strip * width_, hi = std::min(sy_.size(), lo + width_);
    return lo + first_failing(sy_.data() + lo, hi - lo, [&](double s) { return s < yi; });
  };
  const std::size_t strips = xlo_.size();
  std::size_t left = home, right = home + 1;
  for (;;) {
    const double gl = left > 0 ? xi - xhi_[left - 1] : std::numeric_limits<double>::infinity();
    const double gr = right < strips ? xlo_[right] - xi : std::numeric_limits<double>::infinity();
    // Strip x ranges are ordered, so these gaps bound every point further out.
    if (gl <= gr) {
      if (gl >= best_[k - 1]) break;
      --left;
      scan_strip(left, start_in(left), i, xi, yi, k);
    } else {
      if (gr >= best_[k - 1]) break;
      scan_strip(right, start_in(right), i, xi, yi, k);
      ++right;
    }
  }
  return best_[k - 1];
}

void ksg_counts(const PreparedColumn& x, const PreparedColumn& y, std::size_t k, NeighborCounts& out,
                KsgWorkspace& ws) {
  const std::size_t n = x.values.size();
  if (y.values.size() != n) throw Error(ErrorKind::LengthMismatch, "columns differ in length");
  if (n <= k) throw Error(ErrorKind::TooFewSamples, "need more than k samples");

  out.radius.resize(n);
  out.count_x.resize(n);
  out.count_y.resize(n);
  ws.index.build(x, y);
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = ws.index.kth_distance(static_cast<std::uint32_t>(i), k);
    out.radius[i] = eps;
    const std::size_t self = eps > 0.0 ? 1 : 0;
    out.count_x[i] = count_within(x.sorted, x.rank[i], eps) - self;
    out.count_y[i] = count_within(y.sorted, y.rank[i], eps) - self;
  }
}

double ksg_from_counts(const NeighborCounts& counts, std::size_t k, MiMode mode, std::span<const double> table,
                       bool clamp_negative) {
  const std::size_t n = counts.radius.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t ex = counts.count_x[i], ey = counts.count_y[i];
    if (mode == MiMode::PaperLiteral) {
      acc += table[std::max<std::size_t>(ex, 1)] + table[std::max<std::size_t>(ey, 1)];
    } else {
      acc += table[ex + 1] + table[ey + 1];
    }
  }
  const double mi = table[k] + table[n] - acc / static_cast<double>(n);
  return clamp_negative ? std::max(mi, 0.0) : mi;
}

double ksg_mi_prepared(const PreparedColumn& x, const PreparedColumn& y, const EstimatorConfig& cfg, MiMode mode,
                       KsgWorkspace& ws) {
  const std::size_t n = x.values.size();
  if (ws.digamma_table.size() != n + 1) ws.digamma_table = integer_digamma_table(n);
  ksg_counts(x, y, cfg.k, ws.counts, ws);
  return ksg_from_counts(ws.counts, cfg.k, mode, ws.digamma_table, cfg.clamp_negative);
}

double ksg_mi_prepared(const PreparedColumn& x, const PreparedColumn& y, const EstimatorConfig& cfg,
                       KsgWorkspace& ws) {
  return ksg_mi_prepared(x, y, cfg, cfg.mi_mode, ws);
}

double ksg_mi(std::span<const double> x, std::span<const double> y, const EstimatorConfig& cfg) {
  cfg.validate();
  if (x.size() != y.size()) throw Error(ErrorKind::LengthMismatch, "columns differ in length");
  if (x.size() <= cfg.k) throw Error(ErrorKind::TooFewSamples, "need more than k samples");
  KsgWorkspace ws;
  return ksg_mi_prepared(prepare_column(x, cfg), prepare_column(y, cfg), cfg, ws);
}

}  // namespace actdiag
