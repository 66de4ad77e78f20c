#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "kflow/container.hpp"
#include "kflow/data.hpp"
#include "kflow/error.hpp"
#include "kflow/training.hpp"

using namespace kflow;
using namespace kflow::training;

namespace {

TrainConfig tiny_config() {
  TrainConfig c;
  c.model.hidden = 16;
  c.model.depth = 2;
  c.batch_size = 32;
  c.steps = 40;
  c.log_every = 10;
  c.seed = 3;
  return c;
}

data::LabeledBatch toy(data::DatasetKind kind, std::size_t n) {
  data::DatasetSpec s;
  s.kind = kind;
  s.count = n;
  s.seed = 1;
  return data::generate(s);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("kflow_test_training_" + name);
}

}  // namespace

TEST_CASE("raw scale-time draws are uniform") {
  SeededRng rng(5, 1);
  const std::size_t bins = 10, n = 20000;
  std::vector<double> counts(bins, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = sample_scale_time(rng);
    REQUIRE(k >= 0.0);
    REQUIRE(k < 1.0);
    counts[static_cast<std::size_t>(k * bins)] += 1;
  }
  double chi2 = 0;
  for (double c : counts) chi2 += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  // 0.1% upper critical value of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 27.877);
}

TEST_CASE("cfm batches carry the path state and velocity") {
  const auto t = kamp::Transform::fourier({8});
  const kamp::ScalePartition p = kamp::make_partition(t, 2, kamp::PartitionStrategy::uniform_radius);
  const interpolant::Path path(p, interpolant::BumpKind::cubic, interpolant::Direction::low_to_high);
  std::vector<std::vector<double>> coeffs;
  SeededRng g(1, 0);
  for (int i = 0; i < 5; ++i) coeffs.push_back(randn(g, {8}).values());
  SeededRng rng(2, 1);
  const model::TrainingBatch b = build_cfm_batch(path, coeffs, {}, rng);
  REQUIRE(b.batch_size() == 5);
  CHECK(b.labels.empty());
  for (std::size_t i = 0; i < 5; ++i) {
    const auto c = path.coordinate(b.k[i]);
    CHECK(c.t > 0.01);
    CHECK(c.t < 0.99);
  }
  // The batch is reproducible from the same stream.
  SeededRng again(2, 1);
  const model::TrainingBatch b2 = build_cfm_batch(path, coeffs, {}, again);
  CHECK(b.psi == b2.psi);
  CHECK(b.target == b2.target);
}

TEST_CASE("training is deterministic and lowers the loss") {
  const auto d = toy(data::DatasetKind::two_gaussians, 256);
  TrainConfig c = tiny_config();
  c.steps = 300;
  c.adam.lr = 3e-3;
  std::vector<LossRecord> log;
  TrainHooks hooks;
  hooks.on_log = [&](const LossRecord& r) { log.push_back(r); };
  const Checkpoint a = train(d.samples, {}, c, hooks);
  const Checkpoint b = train(d.samples, {}, c);
  CHECK(a.model == b.model);
  CHECK(a.step == 300);
  REQUIRE(log.size() == 30);
  CHECK(log.back().loss < log.front().loss);
  CHECK(a.decomposition.transform().kind() == kamp::TransformKind::pca);
}

TEST_CASE("label conditioning sets the vocabulary") {
  const auto d = toy(data::DatasetKind::labeled_mixture, 128);
  TrainConfig c = tiny_config();
  c.label_conditioning = true;
  const Checkpoint ck = train(d.samples, d.labels, c);
  CHECK(ck.model.config().label_vocab == 2);
  c.label_conditioning = true;
  CHECK_THROWS_AS(train(d.samples, {}, c), ShapeError);
}

TEST_CASE("checkpoint round trip is exact") {
  const auto d = toy(data::DatasetKind::two_moons, 128);
  TrainConfig c = tiny_config();
  c.direction = interpolant::Direction::high_to_low;
  const Checkpoint ck = train(d.samples, {}, c);
  const auto path = temp_path("rt.kfc");
  save_checkpoint(ck, path);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.model == ck.model);
  CHECK(back.decomposition.partition() == ck.decomposition.partition());
  CHECK(to_json(back.config) == to_json(ck.config));
  CHECK(back.step == ck.step);
  const auto* pa = back.decomposition.transform().pca_basis();
  const auto* pb = ck.decomposition.transform().pca_basis();
  REQUIRE(pa != nullptr);
  CHECK(pa->components == pb->components);
  CHECK(pa->mean == pb->mean);

  // Truncation and corruption are detected.
  std::string bytes = io::read_file(path);
  io::write_file_atomic(path, bytes.substr(0, bytes.size() - 9));
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  bytes[bytes.size() - 20] ^= 0x5a;
  io::write_file_atomic(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("decomposition files round trip") {
  TrainConfig c = tiny_config();
  c.transform = kamp::TransformKind::wavelet;
  c.wavelet_family = wavelet::Family::haar;
  c.bands = 3;
  std::vector<Tensor> dummy{Tensor({8, 8})};
  const kamp::Decomposition d = fit_decomposition(c, dummy);
  const auto path = temp_path("decomp.kfc");
  save_decomposition(d, path);
  const kamp::Decomposition back = load_decomposition(path);
  CHECK(back.transform().id() == d.transform().id());
  CHECK(back.partition() == d.partition());
  std::filesystem::remove(path);
}

TEST_CASE("config validation and json") {
  TrainConfig c = tiny_config();
  CHECK_NOTHROW(c.validate());
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ValueError);
  c = tiny_config();
  c.label_drop = 1.5;
  CHECK_THROWS_AS(c.validate(), ValueError);
  c = tiny_config();
  c.bump = interpolant::BumpKind::quintic;
  c.adam.lr = 0.25;
  const TrainConfig back = train_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
  CHECK(back.bump == interpolant::BumpKind::quintic);
  CHECK(back.adam.lr == 0.25);
}

TEST_CASE("a diverging run stops with the step") {
  const auto d = toy(data::DatasetKind::two_gaussians, 64);
  TrainConfig c = tiny_config();
  c.adam.lr = 1e200;
  CHECK_THROWS_AS(train(d.samples, {}, c), NumericError);
}
