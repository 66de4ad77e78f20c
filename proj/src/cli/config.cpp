#include "kflow/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "kflow/error.hpp"
#include "toml.hpp"

namespace kflow::cli {

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.train.model.hidden = 64;
  c.train.adam.lr = 2e-3;
  c.sample.steps = 100;
  return c;
}

namespace {

class Reader {
 public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {}

  void check_keys(const std::map<std::string, std::set<std::string>>& schema) const {
    for (auto&& [key, node] : root_) {
      const std::string k(key.str());
      if (k == "seed") continue;
      auto it = schema.find(k);
      if (it == schema.end() || !node.is_table()) fail("unknown table [" + k + "]");
      for (auto&& [sub, _] : *node.as_table())
        if (!it->second.count(std::string(sub.str()))) fail("unknown key '" + std::string(sub.str()) + "' in [" + k + "]");
    }
  }

  template <class T>
  void get(const char* table, const char* key, T& out) const {
    const toml::node* node = table ? root_.at_path(std::string(table) + "." + key).node() : root_.get(key);
    if (!node) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node->value<bool>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node->value<std::string>()) {
        out = *v;
        return;
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (auto v = node->value<double>()) {
        out = *v;
        return;
      }
    } else {
      if (auto v = node->value<std::int64_t>()) {
        if (*v < 0) fail(std::string(key) + " must be nonnegative");
        out = static_cast<T>(*v);
        return;
      }
    }
    fail(std::string("wrong type for ") + (table ? std::string(table) + "." : "") + key);
  }

  template <class E, class Parse>
  void get_enum(const char* table, const char* key, E& out, Parse parse) const {
    std::string s;
    get(table, key, s);
    if (s.empty()) return;
    try {
      out = parse(s);
    } catch (const ValueError& e) {
      fail(e.what());
    }
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ValueError("config " + source_ + ": " + msg); }

 private:
  const toml::table& root_;
  std::string source_;
};

}  // namespace

void apply_toml(std::string_view text, ExperimentConfig& c, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ValueError("config " + source + ": " + std::string(e.description()));
  }
  const Reader r(root, source);
  r.check_keys({
      {"data", {"kind", "count", "classes", "size", "beta"}},
      {"transform", {"kind", "wavelet", "levels", "bands", "strategy"}},
      {"model", {"hidden", "depth", "scale_embed_dim", "max_frequency", "label_embed_dim", "activation"}},
      {"train",
       {"steps", "batch_size", "lr", "beta1", "beta2", "eps", "bump", "direction", "label_conditioning", "label_drop",
        "checkpoint_every", "log_every"}},
      {"sample", {"steps", "integrator", "guidance", "rho"}},
      {"metrics", {"feature", "feature_dim", "knn"}},
  });
  if (root.contains("seed")) {
    std::uint64_t seed = 0;
    r.get(nullptr, "seed", seed);
    c.seed = seed;
  }
  r.get_enum("data", "kind", c.data.kind, data::parse_dataset);
  r.get("data", "count", c.data.count);
  r.get("data", "classes", c.data.classes);
  r.get("data", "size", c.data.size);
  r.get("data", "beta", c.data.beta);

  auto& t = c.train;
  r.get_enum("transform", "kind", t.transform, kamp::parse_kind);
  r.get_enum("transform", "wavelet", t.wavelet_family, wavelet::parse_family);
  r.get("transform", "levels", t.wavelet_levels);
  r.get("transform", "bands", t.bands);
  r.get_enum("transform", "strategy", t.strategy, kamp::parse_strategy);

  r.get("model", "hidden", t.model.hidden);
  r.get("model", "depth", t.model.depth);
  r.get("model", "scale_embed_dim", t.model.scale_embed_dim);
  r.get("model", "max_frequency", t.model.max_frequency);
  r.get("model", "label_embed_dim", t.model.label_embed_dim);
  r.get_enum("model", "activation", t.model.activation, model::parse_activation);

  r.get("train", "steps", t.steps);
  r.get("train", "batch_size", t.batch_size);
  r.get("train", "lr", t.adam.lr);
  r.get("train", "beta1", t.adam.beta1);
  r.get("train", "beta2", t.adam.beta2);
  r.get("train", "eps", t.adam.eps);
  r.get_enum("train", "bump", t.bump, interpolant::parse_bump);
  r.get_enum("train", "direction", t.direction, interpolant::parse_direction);
  r.get("train", "label_conditioning", t.label_conditioning);
  r.get("train", "label_drop", t.label_drop);
  r.get("train", "checkpoint_every", t.checkpoint_every);
  r.get("train", "log_every", t.log_every);

  r.get("sample", "steps", c.sample.steps);
  r.get_enum("sample", "integrator", c.sample.integrator, sampling::parse_integrator);
  r.get("sample", "guidance", c.sample.guidance);
  r.get("sample", "rho", c.sample.rho);

  r.get_enum("metrics", "feature", c.metrics.feature, metrics::parse_feature);
  r.get("metrics", "feature_dim", c.metrics.feature_dim);
  r.get("metrics", "knn", c.metrics.knn);
}

void load_config(const std::filesystem::path& path, ExperimentConfig& config) {
  std::ifstream f(path);
  if (!f) throw ValueError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  apply_toml(ss.str(), config, path.string());
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  if (c.seed) j["seed"] = *c.seed;
  j["data"] = {{"kind", data::dataset_name(c.data.kind)},
               {"count", c.data.count},
               {"classes", c.data.classes},
               {"size", c.data.size},
               {"beta", c.data.beta}};
  j["train"] = training::to_json(c.train);
  j["sample"] = {{"steps", c.sample.steps},
                 {"integrator", sampling::integrator_name(c.sample.integrator)},
                 {"guidance", c.sample.guidance},
                 {"rho", c.sample.rho}};
  j["metrics"] = {{"feature", metrics::feature_name(c.metrics.feature)},
                  {"feature_dim", c.metrics.feature_dim},
                  {"knn", c.metrics.knn}};
  return j;
}

}  // namespace kflow::cli
