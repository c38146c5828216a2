#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "actdiag/error.hpp"
#include "actdiag/tensor_io.hpp"
#include "doctest.h"
#include "support/testing.hpp"

using namespace actdiag;

namespace {

std::vector<unsigned char> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

std::vector<unsigned char> from_hex(const std::string& hex) {
  std::vector<unsigned char> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) out.push_back(static_cast<unsigned char>(std::stoi(hex.substr(i, 2), nullptr, 16)));
  return out;
}

// Builds an NPY image around an arbitrary header dict (for malformed cases).
std::vector<unsigned char> npy_with_dict(const std::string& dict, std::size_t payload_bytes, unsigned char major = 1) {
  std::string header = dict;
  std::size_t total = 10 + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');
  std::string pre = "\x93NUMPY";
  pre.push_back(static_cast<char>(major));
  pre.push_back('\0');
  pre.push_back(static_cast<char>(header.size() & 0xff));
  pre.push_back(static_cast<char>(header.size() >> 8));
  auto out = bytes_of(pre + header);
  out.resize(out.size() + payload_bytes, 0);
  return out;
}

}  // namespace

TEST_SUITE("tensor_io") {

TEST_CASE("fixture [[1,2,3],[4,5,6]] as float64 decodes to a 2x3 matrix") {
  ActivationMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
  auto img = encode_npy(m);
  auto back = decode_npy(img);
  CHECK(back.samples() == 2);
  CHECK(back.neurons() == 3);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) CHECK(back(r, c) == static_cast<double>(r * 3 + c + 1));
}

TEST_CASE("header matches the numpy writer byte for byte") {
  // numpy.save(np.zeros((2, 3))) header region.
  const std::string expected_dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 3), }";
  const std::string h = make_npy_header(2, 3);
  CHECK(h.size() == 128);
  CHECK(h.substr(0, 6) == "\x93NUMPY");
  CHECK(h[6] == 1);
  CHECK(h[7] == 0);
  CHECK(h.substr(10, expected_dict.size()) == expected_dict);
  CHECK(h.back() == '\n');
  CHECK(h.size() % 64 == 0);
  for (std::size_t i = 10 + expected_dict.size(); i + 1 < h.size(); ++i) CHECK(h[i] == ' ');
  CHECK(make_npy_header(100, 50).size() == 128);
}

TEST_CASE("float32 file written by numpy is widened on load") {
  // np.save(buf, np.array([[1,2,3],[4,5,6]], dtype='<f4'))
  const auto img = from_hex(
      "934e554d5059010076007b276465736372273a20273c6634272c2027666f727472616e5f6f72646572273a2046616c73652c20277368"
      "617065273a2028322c2033292c207d20202020202020202020202020202020202020202020202020202020202020202020202020202020"
      "2020202020202020202020202020202020200a0000803f0000004000004040000080400000a0400000c040");
  const auto h = parse_npy_header(img);
  CHECK(h.dtype == NpyDtype::Float32);
  auto m = decode_npy(img);
  CHECK(m.samples() == 2);
  CHECK(m.neurons() == 3);
  CHECK(m(1, 2) == 6.0);
  CHECK(m(0, 0) == 1.0);
}

TEST_CASE("round trips are byte-identical") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  SUBCASE("1x1 zero") {
    ActivationMatrix m(1, 1, {0.0});
    auto img = encode_npy(m);
    CHECK(encode_npy(decode_npy(img)) == img);
  }
  SUBCASE("100x50 random through files") {
    std::vector<double> v(5000);
    for (auto& x : v) x = g(rng);
    ActivationMatrix m(100, 50, v);
    testing::TempDir dir;
    const auto path = dir.path() / "m.npy";
    write_array(m, path);
    const auto first = read_file_bytes(path);
    auto back = read_array(path);
    CHECK(std::memcmp(back.data().data(), v.data(), v.size() * sizeof(double)) == 0);
    write_array(back, dir.path() / "again.npy");
    CHECK(read_file_bytes(dir.path() / "again.npy") == first);
  }
}

TEST_CASE("malformed and unsupported headers are rejected with the right kind") {
  const auto good = encode_npy(ActivationMatrix(2, 2, {1, 2, 3, 4}));
  SUBCASE("bad magic") {
    auto img = good;
    img[1] = 'X';
    CHECK(testing::error_kind([&] { decode_npy(img); }) == ErrorKind::MalformedHeader);
  }
  SUBCASE("every truncation") {
    for (std::size_t n = 0; n < good.size(); ++n) {
      std::vector<unsigned char> cut(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(n));
      CHECK(testing::error_kind([&] { decode_npy(cut); }) == ErrorKind::MalformedHeader);
    }
  }
  SUBCASE("version 2.0") {
    auto img = npy_with_dict("{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), }", 32, 2);
    CHECK(testing::error_kind([&] { decode_npy(img); }) == ErrorKind::MalformedHeader);
  }
  SUBCASE("column-major") {
    auto img = npy_with_dict("{'descr': '<f8', 'fortran_order': True, 'shape': (2, 2), }", 32);
    CHECK(testing::error_kind([&] { decode_npy(img); }) == ErrorKind::UnsupportedLayout);
  }
  SUBCASE("big-endian and integer dtypes") {
    for (const char* d : {"'>f8'", "'<i4'", "'<f2'", "'|u1'"}) {
      auto img = npy_with_dict(std::string("{'descr': ") + d + ", 'fortran_order': False, 'shape': (2, 2), }", 32);
      CHECK(testing::error_kind([&] { decode_npy(img); }) == ErrorKind::UnsupportedLayout);
    }
  }
  SUBCASE("one-dimensional and three-dimensional shapes") {
    auto one = npy_with_dict("{'descr': '<f8', 'fortran_order': False, 'shape': (4,), }", 32);
    CHECK(testing::error_kind([&] { decode_npy(one); }) == ErrorKind::UnsupportedLayout);
    auto three = npy_with_dict("{'descr': '<f8', 'fortran_order': False, 'shape': (1, 2, 2), }", 32);
    CHECK(testing::error_kind([&] { decode_npy(three); }) == ErrorKind::UnsupportedLayout);
  }
  SUBCASE("garbled dict") {
    for (const char* d : {"{'descr': '<f8', 'fortran_order': False}", "{'descr' '<f8'}", "not a dict",
                          "{'descr': '<f8', 'fortran_order': False, 'shape': (2, 2), 'extra': 1, }"}) {
      auto img = npy_with_dict(d, 32);
      CHECK(testing::error_kind([&] { decode_npy(img); }) == ErrorKind::MalformedHeader);
    }
  }
  SUBCASE("payload shorter than the shape") {
    auto img = npy_with_dict("{'descr': '<f8', 'fortran_order': False, 'shape': (3, 2), }", 32);
    CHECK(testing::error_kind([&] { decode_npy(img); }) == ErrorKind::MalformedHeader);
  }
}

TEST_CASE("non-finite payloads are rejected") {
  auto img = encode_npy(ActivationMatrix(1, 2, {1.0, 2.0}));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(img.data() + img.size() - 8, &nan, 8);
  CHECK(testing::error_kind([&] { decode_npy(img); }) == ErrorKind::NonFiniteData);
  CHECK(testing::error_kind([&] { ActivationMatrix(1, 1, {std::numeric_limits<double>::infinity()}); }) ==
        ErrorKind::NonFiniteData);
}

TEST_CASE("writing to an unwritable path fails with IoFailure") {
  ActivationMatrix m(1, 1, {0.0});
  CHECK(testing::error_kind([&] { write_array(m, "/nonexistent-dir/sub/m.npy"); }) == ErrorKind::IoFailure);
  CHECK(testing::error_kind([&] { read_array("/nonexistent-dir/m.npy"); }) == ErrorKind::IoFailure);
}

TEST_CASE("csv parsing") {
  SUBCASE("header row becomes labels") {
    auto m = parse_csv("a,b\n1,2\n3,4");
    CHECK(m.samples() == 2);
    CHECK(m.neurons() == 2);
    REQUIRE(m.neuron_labels);
    CHECK(*m.neuron_labels == std::vector<std::string>{"a", "b"});
    CHECK(m(1, 0) == 3.0);
  }
  SUBCASE("no header") {
    auto m = parse_csv("1,2.5\n-3e2,4\n");
    CHECK(!m.neuron_labels);
    CHECK(m(1, 0) == -300.0);
  }
  SUBCASE("errors") {
    CHECK(testing::error_kind([] { parse_csv("1,2\n3"); }) == ErrorKind::RaggedRows);
    CHECK(testing::error_kind([] { parse_csv("1,x"); }) == ErrorKind::NonNumericCell);
    CHECK(testing::error_kind([] { parse_csv("a,1\n2,3"); }) == ErrorKind::NonNumericCell);
    CHECK(testing::error_kind([] { parse_csv("1,nan"); }) == ErrorKind::NonFiniteData);
  }
}

}  // TEST_SUITE
