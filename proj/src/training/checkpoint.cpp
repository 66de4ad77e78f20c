#include <algorithm>

#include "kflow/container.hpp"
#include "kflow/error.hpp"
#include "kflow/training.hpp"

namespace kflow::training {

namespace {

constexpr std::size_t log_tail = 1000;

void put_decomposition(io::Container& c, const kamp::Decomposition& d) {
  const kamp::Transform& t = d.transform();
  nlohmann::json tj = {{"kind", kamp::kind_name(t.kind())}, {"shape", t.signal_shape()}, {"id", t.id()}};
  if (t.kind() == kamp::TransformKind::wavelet) {
    tj["wavelet"] = wavelet::family_name(t.wavelet_family());
    tj["levels"] = t.wavelet_levels();
  }
  c.meta["transform"] = tj;
  if (const kamp::PcaBasis* b = t.pca_basis()) {
    c.entries["pca.mean"] = {io::Dtype::f64, b->mean.shape(), b->mean.values()};
    c.entries["pca.components"] = {io::Dtype::f64, b->components.shape(), b->components.values()};
    c.entries["pca.variances"] = {io::Dtype::f64, {b->variances.size()}, b->variances};
  }
  const auto bands = d.partition().bands();
  c.entries["partition.bands"] = {io::Dtype::u32, {bands.size()}, std::vector<double>(bands.begin(), bands.end())};
  const auto edges = d.partition().boundaries();
  c.entries["partition.boundaries"] = {io::Dtype::f64, {edges.size()}, std::vector<double>(edges.begin(), edges.end())};
}

kamp::Decomposition get_decomposition(const io::Container& c) {
  try {
    const auto& tj = c.meta.at("transform");
    const Shape shape = tj.at("shape").get<Shape>();
    const auto kind = kamp::parse_kind(tj.at("kind").get<std::string>());
    auto make = [&]() {
      switch (kind) {
        case kamp::TransformKind::fourier: return kamp::Transform::fourier(shape);
        case kamp::TransformKind::wavelet:
          return kamp::Transform::wavelet(shape, wavelet::parse_family(tj.at("wavelet").get<std::string>()),
                                          tj.at("levels").get<std::size_t>());
        case kamp::TransformKind::pca: break;
      }
      const io::Entry& mean = c.at("pca.mean");
      const io::Entry& comps = c.at("pca.components");
      const io::Entry& vars = c.at("pca.variances");
      kamp::PcaBasis basis{Tensor(mean.shape, mean.values), Tensor(comps.shape, comps.values), vars.values};
      return kamp::Transform::pca(std::move(basis), shape);
    };
    kamp::Transform transform = make();
    const io::Entry& bands = c.at("partition.bands");
    const io::Entry& edges = c.at("partition.boundaries");
    std::vector<std::uint32_t> band_of(bands.values.begin(), bands.values.end());
    return kamp::Decomposition(std::move(transform), kamp::ScalePartition(std::move(band_of), edges.values));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed transform description: ") + e.what());
  }
}

}  // namespace

void save_decomposition(const kamp::Decomposition& decomposition, const std::filesystem::path& path) {
  io::Container c;
  c.meta["kind"] = "decomposition";
  put_decomposition(c, decomposition);
  io::write_container(path, c);
}

kamp::Decomposition load_decomposition(const std::filesystem::path& path) {
  return get_decomposition(io::read_container(path));
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  io::Container c;
  c.meta["kind"] = "checkpoint";
  c.meta["config"] = to_json(ck.config);
  c.meta["step"] = ck.step;
  nlohmann::json log = nlohmann::json::array();
  const std::size_t first = ck.log.size() > log_tail ? ck.log.size() - log_tail : 0;
  for (std::size_t i = first; i < ck.log.size(); ++i) log.push_back({ck.log[i].step, ck.log[i].loss});
  c.meta["log"] = log;
  put_decomposition(c, ck.decomposition);
  const auto params = ck.model.parameters();
  c.entries["model.parameters"] = {io::Dtype::f64, {params.size()}, std::vector<double>(params.begin(), params.end())};
  io::write_container(path, c);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const io::Container c = io::read_container(path);
  if (c.meta.value("kind", std::string()) != "checkpoint")
    throw FormatError("'" + path.string() + "' is a KFC1 container but not a model checkpoint");
  if (!c.meta.contains("config")) throw FormatError("checkpoint '" + path.string() + "' has no config");
  TrainConfig config = train_config_from_json(c.meta["config"]);
  const io::Entry& params = c.at("model.parameters");
  Checkpoint ck{model::VectorFieldModel(config.model, params.values), get_decomposition(c), config,
                c.meta.value("step", std::size_t{0}), {}};
  if (ck.model.config().coeff_size != ck.decomposition.size())
    throw FormatError("checkpoint model width does not match its transform");
  try {
    for (const auto& r : c.meta.at("log")) ck.log.push_back({r.at(0).get<std::size_t>(), r.at(1).get<double>(), 0.0});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed loss log in checkpoint: ") + e.what());
  }
  return ck;
}

}  // namespace kflow::training
