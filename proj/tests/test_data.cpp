#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kflow/container.hpp"
#include "kflow/data.hpp"
#include "kflow/error.hpp"
#include "kflow/fft.hpp"

using namespace kflow;
using namespace kflow::data;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("kflow_test_data_" + name);
}

}  // namespace

TEST_CASE("toy datasets") {
  DatasetSpec s;
  s.count = 2000;
  s.seed = 4;
  const auto g = generate(s);
  CHECK(g.size() == 2000);
  CHECK_FALSE(g.labeled());
  double mean_abs_x = 0, mean_y = 0;
  for (const Tensor& t : g.samples) {
    CHECK(t.shape() == Shape{2});
    mean_abs_x += std::abs(t[0]) / 2000;
    mean_y += t[1] / 2000;
  }
  CHECK(mean_abs_x == doctest::Approx(toy_radius).epsilon(0.02));
  CHECK(std::abs(mean_y) < 0.05);

  s.kind = DatasetKind::labeled_mixture;
  s.classes = 3;
  const auto m = generate(s);
  REQUIRE(m.labeled());
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.labels[i] < 3);
    const double a = 2 * 3.141592653589793 * static_cast<double>(m.labels[i]) / 3;
    const double dx = m.samples[i][0] - toy_radius * std::cos(a), dy = m.samples[i][1] - toy_radius * std::sin(a);
    CHECK(std::hypot(dx, dy) < 8 * toy_sigma);
  }
  CHECK(generate(s).samples == m.samples);

  s.kind = DatasetKind::two_moons;
  const auto moons = generate(s);
  CHECK(moons.labeled());
}

TEST_CASE("spectral textures are real, centred and unit variance") {
  SeededRng rng(3, 0);
  const Tensor t = gen_spectral_texture({16, 16}, 1.0, rng);
  double mean = 0, var = 0;
  for (double v : t.data()) mean += v / 256;
  for (double v : t.data()) var += (v - mean) * (v - mean) / 256;
  CHECK(std::abs(mean) < 1e-12);
  CHECK(var == doctest::Approx(1.0).epsilon(1e-10));
  // Amplitude ratio between two frequencies follows max(r,1)^-beta.
  const ComplexTensor X = dft_forward(t);
  const double a1 = std::abs(X[1]), a4 = std::abs(X[4]);
  CHECK(a1 / a4 == doctest::Approx(4.0).epsilon(1e-9));
  CHECK_THROWS_AS(gen_spectral_texture({12}, 1.0, rng), ShapeError);
}

TEST_CASE("stack and unstack") {
  const std::vector<Tensor> xs{Tensor::from({1, 2}), Tensor::from({3, 4}), Tensor::from({5, 6})};
  const Tensor s = stack(xs);
  CHECK(s.shape() == Shape{3, 2});
  CHECK(unstack(s) == xs);
  CHECK_THROWS_AS(stack(std::vector<Tensor>{Tensor::from({1}), Tensor::from({1, 2})}), ShapeError);
}

TEST_CASE("tensor files") {
  const auto p = temp_path("t.kft");
  const Tensor t({2, 3}, {1, 2.5, -3, 4, 5, 6});
  tensor_write(p, t);
  CHECK(tensor_read(p) == t);
  const std::string bytes = io::read_file(p);
  CHECK(bytes.substr(0, 4) == "KFT1");
  io::write_file_atomic(p, bytes.substr(0, bytes.size() - 2));
  CHECK_THROWS_AS(tensor_read(p), FormatError);
  io::write_file_atomic(p, "XXXX" + bytes.substr(4));
  CHECK_THROWS_AS(tensor_read(p), FormatError);
  const std::vector<std::size_t> labels{0, 3, 1};
  labels_write(p, labels);
  CHECK(labels_read(p) == labels);
  std::filesystem::remove(p);
}

TEST_CASE("container round trip and checks") {
  const auto p = temp_path("c.kfc");
  io::Container c;
  c.meta = {{"kind", "test"}};
  c.entries["a"] = io::Entry{io::Dtype::f64, {2}, {0.1, -7.25}};
  c.entries["b"] = io::Entry{io::Dtype::u32, {3}, {1, 2, 3}};
  c.entries["c"] = io::Entry{io::Dtype::f32, {1}, {0.5}};
  io::write_container(p, c);
  const io::Container back = io::read_container(p);
  CHECK(back.meta == c.meta);
  CHECK(back.at("a").values == c.entries["a"].values);
  CHECK(back.at("b").values == c.entries["b"].values);
  CHECK(back.at("c").values == c.entries["c"].values);
  CHECK_THROWS_AS(back.at("zz"), FormatError);

  std::string bytes = io::read_file(p);
  std::string bad = bytes;
  bad[bad.size() - 6] ^= 1;
  io::write_file_atomic(p, bad);
  CHECK_THROWS_AS(io::read_container(p), FormatError);
  std::filesystem::remove(p);
}

TEST_CASE("dataset names") {
  CHECK(parse_dataset("two-moons") == DatasetKind::two_moons);
  CHECK(dataset_name(DatasetKind::spectral_texture) == "spectral-texture");
  CHECK_THROWS_AS(parse_dataset("mnist"), ValueError);
}

TEST_CASE("container version mismatch names the expected version") {
  const auto p = temp_path("v.kfc");
  const std::string manifest = R"({"format":"KFC1","version":2,"meta":{},"entries":{}})";
  std::string bytes = "KFC1";
  const auto len = static_cast<std::uint32_t>(manifest.size());
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  bytes += manifest;
  bytes += std::string(4, '\0');  // CRC32 of the empty payload region
  io::write_file_atomic(p, bytes);
  try {
    io::read_container(p);
    FAIL("expected a FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("version 1") != std::string::npos);
  }
  std::filesystem::remove(p);
}
