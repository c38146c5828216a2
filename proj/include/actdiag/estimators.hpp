#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace actdiag {

/// Which form of the Kraskov sum to evaluate.
///  - PaperLiteral: psi(max(e, 1)) on the strict-radius marginal counts.
///  - KsgCanonical: psi(e + 1), the original estimator's form.
enum class MiMode { PaperLiteral, KsgCanonical };

enum class DigammaMode { Exact, PaperApprox };

std::string_view to_string(MiMode mode) noexcept;
std::optional<MiMode> parse_mi_mode(std::string_view text) noexcept;

struct EstimatorConfig {
  std::size_t n_bins = 100;
  std::size_t k = 3;
  MiMode mi_mode = MiMode::PaperLiteral;
  bool normalize = true;
  bool jitter = true;
  /// Jitter amplitude relative to the (post-normalization) column range.
  double jitter_scale = 1e-10;
  std::optional<std::size_t> max_samples;
  std::uint64_t seed = 0;
  bool clamp_negative = false;

  /// Throws InvalidConfig when a field is out of range.
  void validate() const;
};

/// Equal-width bin index of every value over [min, max]; the maximum lands in
/// the last bin and a constant column occupies bin 0 only.
std::vector<std::size_t> bin_assignments(std::span<const double> column, std::size_t n_bins);

/// Plug-in Shannon entropy (nats) of the binned column.
double entropy(std::span<const double> column, std::size_t n_bins);

double digamma(double x, DigammaMode mode = DigammaMode::Exact);

/// A column after z-scoring and jitter, plus its ascending sort. Sorting once
/// per neuron lets every pair that touches it reuse the order.
struct PreparedColumn {
  std::vector<double> values;
  std::vector<double> sorted;
  std::vector<std::uint32_t> order;  // sorted[p] == values[order[p]]
  std::vector<std::uint32_t> rank;   // order[rank[i]] == i
};

/// Content hash of a raw column. Jitter is keyed on it so that a column gets
/// the same noise whichever operand slot it occupies.
std::uint64_t column_key(std::span<const double> column);

PreparedColumn prepare_column(std::span<const double> column, const EstimatorConfig& cfg);

/// Per-sample quantities of the estimator: joint k-th neighbour radius under
/// the Chebyshev metric and strict-radius marginal counts (self excluded).
struct NeighborCounts {
  std::vector<double> radius;
  std::vector<std::size_t> count_x;
  std::vector<std::size_t> count_y;
};

/// Joint points cut into strips of consecutive x rank, each strip sorted by y.
/// Answers k-th nearest neighbour distance queries under the Chebyshev metric;
/// dense runs of equal x simply span several strips.
class StripIndex {
 public:
  void build(const PreparedColumn& x, const PreparedColumn& y);
  /// Distance from sample i to its k-th nearest other sample.
  double kth_distance(std::uint32_t i, std::size_t k);

 private:
  void scan_strip(std::size_t strip, std::size_t start, std::uint32_t self, double xi, double yi, std::size_t k);

  std::size_t width_ = 0;
  std::vector<double> sx_, sy_;           // strip-major, y-sorted within a strip
  std::vector<std::uint32_t> sid_;        // original sample index
  std::vector<std::uint32_t> slot_of_;    // position of each sample in sx_/sy_
  std::vector<double> xlo_, xhi_;         // x range of each strip
  std::vector<double> best_;
};

/// Reusable buffers for ksg_counts; one per worker thread.
struct KsgWorkspace {
  StripIndex index;
  NeighborCounts counts;
  std::vector<double> digamma_table;
};

void ksg_counts(const PreparedColumn& x, const PreparedColumn& y, std::size_t k, NeighborCounts& out,
                KsgWorkspace& ws);

/// Folds counts into the estimate. Terms are summed in sample order.
double ksg_from_counts(const NeighborCounts& counts, std::size_t k, MiMode mode, std::span<const double> digamma_table,
                       bool clamp_negative = false);

/// digamma(0..n) with entry 0 unused (NaN).
std::vector<double> integer_digamma_table(std::size_t n);

double ksg_mi_prepared(const PreparedColumn& x, const PreparedColumn& y, const EstimatorConfig& cfg,
                       KsgWorkspace& ws);
double ksg_mi_prepared(const PreparedColumn& x, const PreparedColumn& y, const EstimatorConfig& cfg, MiMode mode,
                       KsgWorkspace& ws);

/// Kraskov k-nearest-neighbour mutual information (nats) between two columns.
double ksg_mi(std::span<const double> x, std::span<const double> y, const EstimatorConfig& cfg);

}  // namespace actdiag
