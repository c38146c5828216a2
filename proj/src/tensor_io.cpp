#include "actdiag/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

#include "actdiag/error.hpp"

namespace actdiag {

namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kPreambleSize = 10;  // magic(6) + version(2) + header length(2)
constexpr std::size_t kAlignment = 64;

template <typename T>
T load_le(const unsigned char* p) {
  T value;
  std::memcpy(&value, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    auto* b = reinterpret_cast<unsigned char*>(&value);
    std::reverse(b, b + sizeof(T));
  }
  return value;
}

template <typename T>
void store_le(T value, unsigned char* p) {
  std::memcpy(p, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(p, p + sizeof(T));
  }
}

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorKind::MalformedHeader, what); }
[[noreturn]] void unsupported(const std::string& what) { throw Error(ErrorKind::UnsupportedLayout, what); }

// Minimal reader for the Python dict literal in an NPY header, e.g.
// {'descr': '<f8', 'fortran_order': False, 'shape': (3, 4), }
class HeaderDictParser {
 public:
  explicit HeaderDictParser(std::string_view text) : text_(text) {}

  NpyHeader parse() {
    NpyHeader h;
    bool have_descr = false, have_order = false, have_shape = false;
    std::string descr;
    skip_ws();
    expect('{');
    for (;;) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      std::string key = parse_string();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        descr = parse_string();
        have_descr = true;
      } else if (key == "fortran_order") {
        h.fortran_order = parse_bool();
        have_order = true;
      } else if (key == "shape") {
        h.shape = parse_tuple();
        have_shape = true;
      } else {
        malformed("unexpected header key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        malformed("expected ',' or '}' in header dict");
      }
    }
    skip_ws();
    if (pos_ != text_.size()) malformed("trailing bytes after header dict");
    if (!have_descr || !have_order || !have_shape) malformed("header dict is missing a required key");

    if (descr == "<f8") {
      h.dtype = NpyDtype::Float64;
    } else if (descr == "<f4") {
      h.dtype = NpyDtype::Float32;
    } else {
      unsupported("dtype '" + descr + "' is not little-endian float32/float64");
    }
    if (h.fortran_order) unsupported("column-major (fortran_order) arrays are not supported");
    if (h.shape.size() != 2) unsupported("expected a 2-D array, got ndim=" + std::to_string(h.shape.size()));
    if (h.shape[0] == 0 || h.shape[1] == 0) unsupported("array has an empty dimension");
    return h;
  }

 private:
  char peek() const {
    if (pos_ >= text_.size()) malformed("unexpected end of header");
    return text_[pos_];
  }
  void expect(char c) {
    if (peek() != c) malformed(std::string("expected '") + c + "' in header");
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }
  std::string parse_string() {
    char quote = peek();
    if (quote != '\'' && quote != '"') malformed("expected a quoted string in header");
    ++pos_;
    auto end = text_.find(quote, pos_);
    if (end == std::string_view::npos) malformed("unterminated string in header");
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }
  bool parse_bool() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    malformed("expected True or False for fortran_order");
  }
  std::size_t parse_int() {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc{}) malformed("bad integer in shape tuple");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }
  std::vector<std::size_t> parse_tuple() {
    std::vector<std::size_t> dims;
    expect('(');
    for (;;) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      dims.push_back(parse_int());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        malformed("expected ',' or ')' in shape tuple");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void require_finite(std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::NonFiniteData, "non-finite value at flat index " + std::to_string(i));
    }
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

}  // namespace

ActivationMatrix::ActivationMatrix(std::size_t samples, std::size_t neurons, std::vector<double> data)
    : samples_(samples), neurons_(neurons), data_(std::move(data)) {
  if (samples_ == 0 || neurons_ == 0) {
    throw Error(ErrorKind::InvalidConfig, "activation matrix must be at least 1x1");
  }
  if (data_.size() != samples_ * neurons_) {
    throw Error(ErrorKind::InvalidConfig, "data length does not match shape");
  }
  require_finite(data_);
}

std::vector<double> ActivationMatrix::column(std::size_t neuron) const {
  std::vector<double> out(samples_);
  for (std::size_t s = 0; s < samples_; ++s) out[s] = data_[s * neurons_ + neuron];
  return out;
}

ActivationMatrix ActivationMatrix::select_rows(std::span<const std::size_t> rows) const {
  std::vector<double> out;
  out.reserve(rows.size() * neurons_);
  for (auto r : rows) {
    auto src = row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  ActivationMatrix m(rows.size(), neurons_, std::move(out));
  m.neuron_labels = neuron_labels;
  m.source = source;
  return m;
}

NpyHeader parse_npy_header(std::span<const unsigned char> bytes) {
  if (bytes.size() < kPreambleSize) malformed("file shorter than the NPY preamble");
  if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) malformed("bad magic bytes");
  if (bytes[6] != 1 || bytes[7] != 0) {
    malformed("unsupported NPY version " + std::to_string(bytes[6]) + "." + std::to_string(bytes[7]));
  }
  std::size_t header_len = load_le<std::uint16_t>(bytes.data() + 8);
  if (bytes.size() < kPreambleSize + header_len) malformed("header extends past end of file");
  std::string_view header(reinterpret_cast<const char*>(bytes.data()) + kPreambleSize, header_len);
  if (header.empty() || header.back() != '\n') malformed("header is not newline-terminated");
  header.remove_suffix(1);

  NpyHeader h = HeaderDictParser(header).parse();
  h.payload_offset = kPreambleSize + header_len;
  return h;
}

std::string make_npy_header(std::size_t rows, std::size_t cols) {
  std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + std::to_string(rows) + ", " +
                     std::to_string(cols) + "), }";
  std::size_t unpadded = kPreambleSize + dict.size() + 1;
  std::size_t padding = (kAlignment - unpadded % kAlignment) % kAlignment;
  dict.append(padding, ' ');
  dict.push_back('\n');

  std::string out(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  unsigned char len[2];
  store_le<std::uint16_t>(static_cast<std::uint16_t>(dict.size()), len);
  out.push_back(static_cast<char>(len[0]));
  out.push_back(static_cast<char>(len[1]));
  return out + dict;
}

ActivationMatrix decode_npy(std::span<const unsigned char> bytes) {
  NpyHeader h = parse_npy_header(bytes);
  const std::size_t rows = h.shape[0], cols = h.shape[1];
  const std::size_t item = h.dtype == NpyDtype::Float64 ? 8 : 4;
  const std::size_t expected = rows * cols * item;
  const std::size_t available = bytes.size() - h.payload_offset;
  if (available != expected) {
    malformed("payload holds " + std::to_string(available) + " bytes, shape requires " + std::to_string(expected));
  }
  std::vector<double> data(rows * cols);
  const unsigned char* p = bytes.data() + h.payload_offset;
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = h.dtype == NpyDtype::Float64 ? load_le<double>(p + 8 * i)
                                           : static_cast<double>(load_le<float>(p + 4 * i));
  }
  return ActivationMatrix(rows, cols, std::move(data));
}

std::vector<unsigned char> encode_npy(std::size_t rows, std::size_t cols, std::span<const double> data) {
  if (data.size() != rows * cols) throw Error(ErrorKind::InvalidConfig, "payload does not match shape");
  std::string header = make_npy_header(rows, cols);
  std::vector<unsigned char> out(header.begin(), header.end());
  const std::size_t offset = out.size();
  out.resize(offset + 8 * data.size());
  for (std::size_t i = 0; i < data.size(); ++i) store_le<double>(data[i], out.data() + offset + 8 * i);
  return out;
}

std::vector<unsigned char> encode_npy(const ActivationMatrix& m) {
  return encode_npy(m.samples(), m.neurons(), m.data());
}

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "short write to '" + path.string() + "'");
}

ActivationMatrix read_array(const std::filesystem::path& path) {
  auto m = decode_npy(read_file_bytes(path));
  m.source = path.string();
  return m;
}

void write_array(const ActivationMatrix& m, const std::filesystem::path& path) {
  write_file_bytes(path, encode_npy(m));
}

ActivationMatrix parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    if (!trim(line).empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  if (lines.empty()) throw Error(ErrorKind::NonNumericCell, "CSV contains no data");

  std::optional<std::vector<std::string>> labels;
  std::size_t first = 0;
  {
    auto cells = split_cells(lines[0]);
    bool all_text = std::none_of(cells.begin(), cells.end(), [](auto c) { return parse_number(c).has_value(); });
    if (all_text) {
      labels.emplace(cells.begin(), cells.end());
      first = 1;
    }
  }
  if (first == lines.size()) throw Error(ErrorKind::NonNumericCell, "CSV has a header but no data rows");

  const std::size_t cols = split_cells(lines[first]).size();
  if (labels && labels->size() != cols) throw Error(ErrorKind::RaggedRows, "header width differs from data width");

  std::vector<double> data;
  data.reserve((lines.size() - first) * cols);
  for (std::size_t r = first; r < lines.size(); ++r) {
    auto cells = split_cells(lines[r]);
    if (cells.size() != cols) {
      throw Error(ErrorKind::RaggedRows, "line " + std::to_string(r + 1) + " has " + std::to_string(cells.size()) +
                                             " cells, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      auto v = parse_number(cells[c]);
      if (!v) {
        throw Error(ErrorKind::NonNumericCell,
                    "line " + std::to_string(r + 1) + ", column " + std::to_string(c + 1) + ": '" +
                        std::string(cells[c]) + "'");
      }
      data.push_back(*v);
    }
  }
  ActivationMatrix m(lines.size() - first, cols, std::move(data));
  m.neuron_labels = std::move(labels);
  return m;
}

ActivationMatrix read_csv(const std::filesystem::path& path) {
  auto bytes = read_file_bytes(path);
  auto m = parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  m.source = path.string();
  return m;
}

}  // namespace actdiag
