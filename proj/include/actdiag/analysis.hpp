#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "actdiag/estimators.hpp"
#include "actdiag/tensor_io.hpp"

namespace actdiag {

enum class DiagonalPolicy { Excluded, Included };

struct EntropyVector {
  std::vector<double> values;  // nats, one per neuron
  std::size_t n_bins = 0;
};

/// Symmetric N x N pairwise MI (nats). With the diagonal excluded, diagonal
/// entries hold NaN and are never read by summaries.
struct MIMatrix {
  std::size_t n = 0;
  std::vector<double> values;
  DiagonalPolicy diagonal = DiagonalPolicy::Excluded;

  double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * n + j]; }
};

/// Stand-in for the full matrix when N is too large to store: histogram of the
/// off-diagonal values plus moments.
struct MISummary {
  std::size_t pairs = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::vector<std::size_t> counts;  // equal-width bins over [min, max]
};

struct AnalyzeOptions {
  DiagonalPolicy diagonal = DiagonalPolicy::Excluded;
  /// Above this many neurons only an MISummary is kept, unless force_full_mi.
  std::size_t full_mi_limit = 1024;
  bool force_full_mi = false;
  std::size_t summary_bins = 256;
  /// 0 means one worker per hardware thread.
  std::size_t threads = 0;
};

struct DiversityReport {
  std::size_t n_samples = 0;        // rows actually analysed
  std::size_t n_samples_input = 0;  // rows before subsampling
  std::size_t n_neurons = 0;
  EntropyVector entropy;
  std::optional<MIMatrix> mi;
  MISummary mi_summary;
  double mean_entropy = 0.0;
  /// Mean over the N(N-1)/2 unordered off-diagonal pairs; NaN when N == 1.
  double mean_mi = 0.0;
  EstimatorConfig config;
  DiagonalPolicy diagonal = DiagonalPolicy::Excluded;
  std::optional<std::string> source;
  std::optional<std::vector<std::string>> neuron_labels;

  /// Off-diagonal values i < j in row-major pair order, from whichever
  /// representation is present. Empty when only a summary exists.
  std::vector<double> pair_values() const;
};

/// Seeded uniform subsample of row indices (without replacement, ascending).
std::vector<std::size_t> subsample_rows(std::size_t rows, std::size_t keep, std::uint64_t seed);

/// Entropy of every neuron and MI of every unordered neuron pair.
DiversityReport analyze(const ActivationMatrix& m, const EstimatorConfig& cfg, const AnalyzeOptions& opts = {});

/// Pair (i, j), i < j, for the p-th unordered pair in row-major order.
std::vector<std::pair<std::uint32_t, std::uint32_t>> unordered_pairs(std::size_t n);

}  // namespace actdiag
