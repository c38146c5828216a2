#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace actdiag {

/// Dense S x N matrix of neuron activations, row-major (one row per sample,
/// one column per neuron). Construction validates shape and finiteness.
class ActivationMatrix {
 public:
  ActivationMatrix(std::size_t samples, std::size_t neurons, std::vector<double> data);

  std::size_t samples() const noexcept { return samples_; }
  std::size_t neurons() const noexcept { return neurons_; }

  double operator()(std::size_t sample, std::size_t neuron) const noexcept {
    return data_[sample * neurons_ + neuron];
  }
  std::span<const double> data() const noexcept { return data_; }
  std::span<const double> row(std::size_t sample) const noexcept {
    return {data_.data() + sample * neurons_, neurons_};
  }
  /// Copies one neuron's activations out of the row-major buffer.
  std::vector<double> column(std::size_t neuron) const;

  /// Keeps only the given rows, in the given order.
  ActivationMatrix select_rows(std::span<const std::size_t> rows) const;

  std::optional<std::vector<std::string>> neuron_labels;
  std::optional<std::string> source;

 private:
  std::size_t samples_;
  std::size_t neurons_;
  std::vector<double> data_;
};

/// Element type found in an NPY payload. Both are widened to double on load.
enum class NpyDtype { Float32, Float64 };

struct NpyHeader {
  NpyDtype dtype = NpyDtype::Float64;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
  std::size_t payload_offset = 0;
};

/// Parses and validates the NPY v1.0 preamble of an in-memory file image.
/// Rejects anything outside the accepted subset (little-endian f4/f8, C order,
/// two dimensions).
NpyHeader parse_npy_header(std::span<const unsigned char> bytes);

/// Produces the exact v1.0 preamble numpy would emit for a C-ordered <f8 array.
std::string make_npy_header(std::size_t rows, std::size_t cols);

ActivationMatrix decode_npy(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_npy(const ActivationMatrix& m);
/// Raw C-ordered <f8 image of any buffer; unlike ActivationMatrix it may hold
/// NaN (the MI matrix marks its excluded diagonal that way).
std::vector<unsigned char> encode_npy(std::size_t rows, std::size_t cols, std::span<const double> data);

ActivationMatrix read_array(const std::filesystem::path& path);
void write_array(const ActivationMatrix& m, const std::filesystem::path& path);

/// Rectangular numeric CSV; a first row made entirely of non-numeric cells is
/// taken as neuron labels.
ActivationMatrix parse_csv(std::string_view text);
ActivationMatrix read_csv(const std::filesystem::path& path);

/// Whole-file helpers shared by the readers.
std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

}  // namespace actdiag
