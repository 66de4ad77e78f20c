#include "kflow/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>

#include <openssl/evp.h>

#include "CLI11.hpp"
#include "kflow/config.hpp"
#include "kflow/container.hpp"
#include "kflow/error.hpp"
#include "kflow/image.hpp"
#include "kflow/metrics.hpp"

namespace fs = std::filesystem;

namespace kflow::cli {

std::string sha256_file(const fs::path& path) {
  const std::string bytes = io::read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed for '" + path.string() + "'");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

// Everything a subcommand can be told on the command line besides the
// experiment config itself.
struct Options {
  fs::path config, manifest, out, out_dir, data, labels, labels_out, transform_file, checkpoint, real, gen,
      real_labels, gen_labels, csv;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::size_t count = 16;
  std::size_t num = 4;
  std::size_t label = 0;
  std::size_t classes = 5;
  std::size_t per_class = 200;
  double rho_cdr = 0.3;
  bool images = false;
  std::string shared_bands = "high";
  std::string kind, transform, wavelet, strategy, activation, bump, direction, integrator, feature;

  std::map<const CLI::App*, CLI::Option*> seed_opt, label_opt, direction_opt;
};

struct Run {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config;
  nlohmann::json seeds = nlohmann::json::object();
  std::vector<std::pair<std::string, fs::path>> inputs, outputs;

  void input(std::string name, const fs::path& p) { inputs.emplace_back(std::move(name), p); }
  void output(std::string name, const fs::path& p) { outputs.emplace_back(std::move(name), p); }

  void write(const fs::path& path, double wall_ms) const {
    auto files = [](const std::vector<std::pair<std::string, fs::path>>& list) {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& [name, p] : list) j[name] = {{"path", p.string()}, {"sha256", sha256_file(p)}};
      return j;
    };
    const nlohmann::json m = {{"command", command}, {"argv", argv},           {"config", config},
                              {"seeds", seeds},     {"inputs", files(inputs)}, {"outputs", files(outputs)},
                              {"wall_ms", wall_ms}};
    io::write_file_atomic(path, m.dump(2) + "\n");
  }
};

void write_json(const fs::path& path, const nlohmann::json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

fs::path with_suffix(const fs::path& p, const std::string& suffix) {
  fs::path out = p;
  out.replace_extension();
  out += suffix;
  return out;
}

std::vector<Tensor> read_samples(const fs::path& p) { return data::unstack(data::tensor_read(p)); }

std::string sample_name(const std::string& stem, std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%04zu", i);
  return stem + buf + ext;
}

metrics::FeatureMap feature_map(const ExperimentConfig& cfg, std::span<const Tensor> real, std::uint64_t seed) {
  switch (cfg.metrics.feature) {
    case metrics::FeatureKind::identity: return metrics::FeatureMap::identity();
    case metrics::FeatureKind::pca: return metrics::FeatureMap::pca(real, cfg.metrics.feature_dim);
    case metrics::FeatureKind::random_projection:
      return metrics::FeatureMap::random_projection(real.front().size(), cfg.metrics.feature_dim, seed);
  }
  throw ValueError("unknown feature map");
}

metrics::ClassSamples by_class(std::span<const Tensor> samples, std::span<const std::size_t> labels) {
  if (labels.size() != samples.size()) throw ShapeError("need one label per sample");
  metrics::ClassSamples out;
  for (std::size_t i = 0; i < samples.size(); ++i) out[labels[i]].push_back(samples[i]);
  return out;
}

// Writes samples as per-sample KFT1 files (and images when asked).
void write_samples(Run& run, const fs::path& dir, const std::string& stem, const std::vector<Tensor>& samples,
                   bool images) {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const fs::path p = dir / sample_name(stem, i, ".kft");
    data::tensor_write(p, samples[i]);
    run.output(p.filename().string(), p);
    if (images) {
      const fs::path ip = dir / sample_name(stem, i, samples[i].rank() == 2 ? ".pgm" : ".ppm");
      image::render_image(samples[i], ip);
      run.output(ip.filename().string(), ip);
    }
  }
}

training::Checkpoint load_ck(Run& run, const Options& o) {
  run.input("checkpoint", o.checkpoint);
  return training::load_checkpoint(o.checkpoint);
}

sampling::SamplerConfig sampler_for(const ExperimentConfig& cfg, const training::Checkpoint& ck, const Options& o,
                                    const CLI::App* sub, std::uint64_t seed) {
  sampling::SamplerConfig sc = cfg.sample;
  sc.seed = seed;
  sc.direction = ck.config.direction;
  if (o.direction_opt.at(sub)->count() > 0) sc.direction = interpolant::parse_direction(o.direction);
  return sc;
}

std::optional<std::size_t> label_of(const Options& o, const CLI::App* sub) {
  return o.label_opt.at(sub)->count() > 0 ? std::optional<std::size_t>(o.label) : std::nullopt;
}

nlohmann::json band_report(const kamp::BandSpectrum& s) {
  return {{"band_norm", s.band_norm}, {"per_coefficient", s.per_coefficient}, {"band_sizes", s.band_sizes}};
}

}  // namespace

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, const char* const* argv) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = default_config();
  Options o;

  // The config file is read before the options are declared so that its
  // values become the defaults the flags override.
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) o.config = argv[i + 1];
    if (a.rfind("--config=", 0) == 0) o.config = a.substr(9);
  }
  try {
    if (!o.config.empty()) load_config(o.config, cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  o.kind = std::string(data::dataset_name(cfg.data.kind));
  o.transform = std::string(kamp::kind_name(cfg.train.transform));
  o.wavelet = std::string(wavelet::family_name(cfg.train.wavelet_family));
  o.strategy = std::string(kamp::strategy_name(cfg.train.strategy));
  o.activation = std::string(model::activation_name(cfg.train.model.activation));
  o.bump = std::string(interpolant::bump_name(cfg.train.bump));
  o.direction = std::string(interpolant::direction_name(cfg.train.direction));
  o.integrator = std::string(sampling::integrator_name(cfg.sample.integrator));
  o.feature = std::string(metrics::feature_name(cfg.metrics.feature));

  CLI::App app("K-Flow: scale-banded flow matching on K-amplitude decompositions", "kflow");
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "TOML experiment config; flags override its values")->check(CLI::ExistingFile);
    o.seed_opt[s] = s->add_option("--seed", o.seed, "Random seed (falls back to the config, then KFLOW_SEED, then 0)");
    s->add_option("--manifest", o.manifest, "Run manifest path (default derived from the output)");
  };
  auto transform_opts = [&](CLI::App* s) {
    s->add_option("--transform", o.transform, "fourier, wavelet or pca");
    s->add_option("--wavelet", o.wavelet, "Wavelet family: haar or db6");
    s->add_option("--levels", cfg.train.wavelet_levels, "Wavelet levels (0 = automatic)");
    s->add_option("--bands", cfg.train.bands, "Number of scale bands");
    s->add_option("--strategy", o.strategy, "Partition: uniform-radius, uniform-level or energy");
  };
  auto sampler_opts = [&](CLI::App* s) {
    s->add_option("--checkpoint", o.checkpoint, "Trained checkpoint")->required()->check(CLI::ExistingFile);
    s->add_option("--steps", cfg.sample.steps, "Integration steps");
    s->add_option("--integrator", o.integrator, "euler or heun");
    s->add_option("--guidance", cfg.sample.guidance, "Classifier-free guidance scale");
    s->add_option("--rho", cfg.sample.rho, "Labels are dropped for scale time above rho");
    o.direction_opt[s] = s->add_option("--direction", o.direction, "Flow direction (must match the checkpoint)");
    o.label_opt[s] = s->add_option("--label", o.label, "Class label to condition on");
    s->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto feature_opts = [&](CLI::App* s) {
    s->add_option("--feature", o.feature, "Feature map: identity, pca or random-projection");
    s->add_option("--feature-dim", cfg.metrics.feature_dim, "Feature dimension for pca and random-projection");
  };

  CLI::App* gen = app.add_subcommand("gen-data", "Generate a toy or texture dataset");
  common(gen);
  gen->add_option("--kind", o.kind, "two-gaussians, two-moons, labeled-mixture or spectral-texture");
  gen->add_option("--count", cfg.data.count, "Number of samples");
  gen->add_option("--classes", cfg.data.classes, "Components of the labeled mixture");
  gen->add_option("--size", cfg.data.size, "Texture side length");
  gen->add_option("--beta", cfg.data.beta, "Texture spectral exponent");
  gen->add_option("--out", o.out, "Stacked samples (KFT1)")->required();
  gen->add_option("--labels-out", o.labels_out, "Label file (default: <out> with extension .labels.kft, when labeled)");

  CLI::App* fit = app.add_subcommand("fit-transform", "Fit a K-amplitude transform and band partition");
  common(fit);
  fit->add_option("--data", o.data, "Stacked samples (KFT1)")->required()->check(CLI::ExistingFile);
  transform_opts(fit);
  fit->add_option("--out", o.out, "Decomposition container (KFC1)")->required();

  CLI::App* tr = app.add_subcommand("train", "Train a vector-field model by conditional flow matching");
  common(tr);
  tr->add_option("--data", o.data, "Stacked samples (KFT1)")->required()->check(CLI::ExistingFile);
  tr->add_option("--labels", o.labels, "Label file for conditional training")->check(CLI::ExistingFile);
  tr->add_option("--transform-file", o.transform_file, "Use a decomposition from fit-transform")
      ->check(CLI::ExistingFile);
  transform_opts(tr);
  tr->add_option("--hidden", cfg.train.model.hidden, "Hidden width");
  tr->add_option("--depth", cfg.train.model.depth, "Hidden layers");
  tr->add_option("--activation", o.activation, "silu or tanh");
  tr->add_option("--steps", cfg.train.steps, "Optimizer steps");
  tr->add_option("--batch-size", cfg.train.batch_size, "Batch size");
  tr->add_option("--lr", cfg.train.adam.lr, "Adam learning rate");
  tr->add_option("--bump", o.bump, "cubic, quintic or linear");
  tr->add_option("--direction", o.direction, "low-to-high or high-to-low");
  tr->add_flag("--label-conditioning,!--no-label-conditioning", cfg.train.label_conditioning,
               "Condition on labels (requires --labels)");
  tr->add_option("--label-drop", cfg.train.label_drop, "Probability of replacing a label by the null label");
  tr->add_option("--checkpoint-every", cfg.train.checkpoint_every, "Intermediate checkpoint cadence (0 = off)");
  tr->add_option("--log-every", cfg.train.log_every, "Loss log cadence");
  tr->add_option("--out", o.out, "Checkpoint (KFC1)")->required();
  tr->add_option("--loss-csv", o.csv, "Loss log (default: <out> with extension .loss.csv)");

  CLI::App* smp = app.add_subcommand("sample", "Draw samples from a checkpoint");
  common(smp);
  sampler_opts(smp);
  smp->add_option("--count", o.count, "Number of samples");
  smp->add_option("--out-dir", o.out_dir, "Output directory")->required();
  smp->add_flag("--images", o.images, "Also write PGM/PPM images");

  CLI::App* ed = app.add_subcommand("edit", "Scale-controlled editing: share noise on some bands");
  common(ed);
  sampler_opts(ed);
  ed->add_option("--shared-bands", o.shared_bands, "Bands with shared noise: low, high, all, none or ids");
  ed->add_option("--num", o.num, "Samples in the edit group");
  ed->add_option("--out-dir", o.out_dir, "Output directory")->required();
  ed->add_flag("--images", o.images, "Also write PGM/PPM images");

  CLI::App* spec = app.add_subcommand("analyze-spectrum", "Per-band amplitude statistics of a dataset");
  common(spec);
  spec->add_option("--data", o.data, "Stacked samples (KFT1)")->required()->check(CLI::ExistingFile);
  spec->add_option("--transform-file", o.transform_file, "Decomposition from fit-transform")
      ->check(CLI::ExistingFile);
  transform_opts(spec);
  spec->add_option("--out", o.out, "JSON report")->required();
  spec->add_option("--csv", o.csv, "Per-band CSV (default: <out> with extension .csv)");

  CLI::App* traj = app.add_subcommand("analyze-trajectory", "2-component projection ratio along sampling paths");
  common(traj);
  sampler_opts(traj);
  traj->add_option("--count", o.count, "Number of trajectories averaged");
  traj->add_option("--out", o.out, "JSON report")->required();
  traj->add_option("--csv", o.csv, "Curve CSV k,ratio (default: <out> with extension .csv)");

  CLI::App* efid = app.add_subcommand("eval-fid", "FID between real and generated samples");
  common(efid);
  efid->add_option("--real", o.real, "Real samples")->required()->check(CLI::ExistingFile);
  efid->add_option("--gen", o.gen, "Generated samples")->required()->check(CLI::ExistingFile);
  efid->add_option("--real-labels", o.real_labels, "Real labels (enables class-conditional FID)")
      ->check(CLI::ExistingFile);
  efid->add_option("--gen-labels", o.gen_labels, "Generated labels")->check(CLI::ExistingFile);
  feature_opts(efid);
  efid->add_option("--out", o.out, "JSON report")->required();

  CLI::App* ecdr = app.add_subcommand("eval-cdr", "Class-dropping ratio of a conditional checkpoint");
  common(ecdr);
  sampler_opts(ecdr);
  ecdr->add_option("--real", o.real, "Real samples")->required()->check(CLI::ExistingFile);
  ecdr->add_option("--real-labels", o.real_labels, "Real labels")->required()->check(CLI::ExistingFile);
  ecdr->add_option("--drop-rho", o.rho_cdr, "Condition-keep fraction of the dropped run");
  ecdr->add_option("--classes", o.classes, "Number of classes evaluated (drawn uniformly)");
  ecdr->add_option("--per-class", o.per_class, "Generated samples per class and run");
  feature_opts(ecdr);
  ecdr->add_option("--out", o.out, "JSON report")->required();

  CLI::App* erec = app.add_subcommand("eval-recall", "k-NN recall of generated samples");
  common(erec);
  erec->add_option("--real", o.real, "Real samples")->required()->check(CLI::ExistingFile);
  erec->add_option("--gen", o.gen, "Generated samples")->required()->check(CLI::ExistingFile);
  erec->add_option("--knn", cfg.metrics.knn, "Neighbourhood size");
  feature_opts(erec);
  erec->add_option("--out", o.out, "JSON report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run;
  run.command = sub->get_name();
  for (int i = 0; i < argc; ++i) run.argv.emplace_back(argv[i]);

  try {
    cfg.data.kind = data::parse_dataset(o.kind);
    cfg.train.transform = kamp::parse_kind(o.transform);
    cfg.train.wavelet_family = wavelet::parse_family(o.wavelet);
    cfg.train.strategy = kamp::parse_strategy(o.strategy);
    cfg.train.model.activation = model::parse_activation(o.activation);
    cfg.train.bump = interpolant::parse_bump(o.bump);
    cfg.train.direction = interpolant::parse_direction(o.direction);
    cfg.sample.integrator = sampling::parse_integrator(o.integrator);
    cfg.metrics.feature = metrics::parse_feature(o.feature);
  } catch (const ValueError& e) {
    std::cerr << "error: " << e.what() << "\n" << sub->help();
    return 2;
  }

  std::uint64_t seed = 0;
  if (o.seed_opt.at(sub)->count() > 0) {
    seed = o.seed;
  } else if (cfg.seed) {
    seed = *cfg.seed;
  } else if (const char* env = std::getenv("KFLOW_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "error: KFLOW_SEED='" << env << "' is not an unsigned integer\n";
      return 2;
    }
  }
  cfg.seed = seed;
  run.seeds["seed"] = seed;

  try {
    fs::path manifest = o.manifest;
    const std::string name = run.command;

    if (name == "gen-data") {
      data::DatasetSpec ds = cfg.data;
      ds.seed = seed;
      const data::LabeledBatch batch = data::generate(ds);
      data::tensor_write(o.out, data::stack(batch.samples));
      run.output("samples", o.out);
      if (batch.labeled()) {
        const fs::path lp = o.labels_out.empty() ? with_suffix(o.out, ".labels.kft") : o.labels_out;
        data::labels_write(lp, batch.labels);
        run.output("labels", lp);
      }
      std::cout << "wrote " << batch.size() << " samples to " << o.out.string() << "\n";
    } else if (name == "fit-transform") {
      run.input("data", o.data);
      const auto samples = read_samples(o.data);
      const auto d = training::fit_decomposition(cfg.train, samples);
      training::save_decomposition(d, o.out);
      run.output("decomposition", o.out);
      std::cout << d.transform().id() << ": " << d.size() << " coefficients in " << d.band_count() << " bands\n";
    } else if (name == "train") {
      run.input("data", o.data);
      const auto samples = read_samples(o.data);
      std::vector<std::size_t> labels;
      if (!o.labels.empty()) {
        run.input("labels", o.labels);
        labels = data::labels_read(o.labels);
      }
      if (cfg.train.label_conditioning && labels.empty())
        throw ValueError("--label-conditioning needs --labels");
      cfg.train.seed = seed;
      const fs::path loss_csv = o.csv.empty() ? with_suffix(o.out, ".loss.csv") : o.csv;
      std::vector<std::vector<double>> rows;
      training::TrainHooks hooks;
      hooks.on_log = [&](const training::LossRecord& r) {
        rows.push_back({static_cast<double>(r.step), r.loss, r.wall_ms});
        std::cout << "step " << r.step << " loss " << metrics::format_number(r.loss) << "\n";
      };
      hooks.on_checkpoint = [&](const training::Checkpoint& ck) {
        const fs::path p = with_suffix(o.out, ".step" + std::to_string(ck.step) + ".kfc");
        training::save_checkpoint(ck, p);
        run.output("checkpoint_step" + std::to_string(ck.step), p);
      };
      const training::Checkpoint ck = [&] {
        if (o.transform_file.empty()) return training::train(samples, labels, cfg.train, hooks);
        run.input("transform", o.transform_file);
        return training::train(samples, labels, cfg.train, training::load_decomposition(o.transform_file), hooks);
      }();
      training::save_checkpoint(ck, o.out);
      run.output("checkpoint", o.out);
      io::write_file_atomic(loss_csv, metrics::csv({"step", "loss", "wall_ms"}, rows));
      run.output("loss_csv", loss_csv);
    } else if (name == "sample" || name == "edit") {
      const auto ck = load_ck(run, o);
      const auto sc = sampler_for(cfg, ck, o, sub, seed);
      const auto label = label_of(o, sub);
      fs::create_directories(o.out_dir);
      if (manifest.empty()) manifest = o.out_dir / "manifest.json";
      if (name == "sample") {
        const std::vector<std::optional<std::size_t>> labels(label ? o.count : 0, label);
        const auto out = sampling::sample_batch(ck, o.count, sc, labels, o.threads);
        write_samples(run, o.out_dir, "sample", out, o.images);
        const fs::path stacked = o.out_dir / "samples.kft";
        data::tensor_write(stacked, data::stack(out));
        run.output("samples", stacked);
      } else {
        const std::size_t S = ck.decomposition.band_count();
        const auto spec = sampling::make_edit_spec(sampling::parse_band_set(o.shared_bands, S), S, o.num, seed);
        const auto out = sampling::edit_generate(ck, spec, sc, label, o.threads);
        write_samples(run, o.out_dir, "edit", out, o.images);
        run.config["edit"] = {{"shared_bands", spec.shared_bands}, {"resampled_bands", spec.resampled_bands}};
      }
      run.config["sampler"] = {{"direction", interpolant::direction_name(sc.direction)}};
      if (label) run.config["label"] = *label;
    } else if (name == "analyze-spectrum") {
      run.input("data", o.data);
      const auto samples = read_samples(o.data);
      const kamp::Decomposition d = [&] {
        if (o.transform_file.empty()) return training::fit_decomposition(cfg.train, samples);
        run.input("transform", o.transform_file);
        return training::load_decomposition(o.transform_file);
      }();
      const auto s = d.amplitude_spectrum(samples);
      metrics::MetricReport rep;
      for (std::size_t b = 0; b < s.band_norm.size(); ++b) {
        rep.set("band" + std::to_string(b) + "_norm", s.band_norm[b]);
        rep.set("band" + std::to_string(b) + "_per_coefficient", s.per_coefficient[b]);
      }
      if (s.per_coefficient.back() > 0) rep.set("low_high_ratio", s.per_coefficient.front() / s.per_coefficient.back());
      rep.provenance = {{"transform", d.transform().id()}, {"samples", samples.size()}, {"spectrum", band_report(s)}};
      write_json(o.out, rep.to_json());
      run.output("report", o.out);
      std::vector<std::vector<double>> rows;
      for (std::size_t b = 0; b < s.band_norm.size(); ++b)
        rows.push_back({static_cast<double>(b), static_cast<double>(s.band_sizes[b]), s.band_norm[b], s.per_coefficient[b]});
      const fs::path csv = o.csv.empty() ? with_suffix(o.out, ".csv") : o.csv;
      io::write_file_atomic(csv, metrics::csv({"band", "size", "mean_norm", "per_coefficient"}, rows));
      run.output("csv", csv);
    } else if (name == "analyze-trajectory") {
      const auto ck = load_ck(run, o);
      const auto sc = sampler_for(cfg, ck, o, sub, seed);
      const auto label = label_of(o, sub);
      if (o.count < 1) throw ValueError("--count must be at least 1");
      std::vector<double> ks(sc.steps + 1), mean(sc.steps + 1, 0.0);
      for (std::size_t i = 0; i <= sc.steps; ++i) ks[i] = static_cast<double>(i) / static_cast<double>(sc.steps);
      std::size_t flagged = 0;
      for (std::size_t t = 0; t < o.count; ++t) {
        sampling::Trajectory traj;
        const auto noise = interpolant::draw_noise(ck.decomposition.size(), seed, t);
        sampling::integrate_coefficients(ck, noise.coefficients.data(), sc, label, &traj);
        const auto pts = metrics::trajectory_projection_ratio(traj, ks);
        for (std::size_t i = 0; i < pts.size(); ++i) {
          mean[i] += pts[i].ratio / static_cast<double>(o.count);
          flagged += pts[i].zero_norm;
        }
      }
      double low = 0, high = 0;
      std::size_t nl = 0, nh = 0;
      std::vector<std::vector<double>> rows;
      for (std::size_t i = 0; i <= sc.steps; ++i) {
        rows.push_back({ks[i], mean[i]});
        (ks[i] < 0.5 ? low : high) += mean[i];
        ++(ks[i] < 0.5 ? nl : nh);
      }
      metrics::MetricReport rep;
      rep.set("mean_ratio_first_half", low / static_cast<double>(nl));
      rep.set("mean_ratio_second_half", high / static_cast<double>(nh));
      rep.provenance = {{"trajectories", o.count}, {"steps", sc.steps}, {"seed", seed}};
      if (flagged) rep.notes.push_back(std::to_string(flagged) + " zero-norm states reported with ratio 1");
      write_json(o.out, rep.to_json());
      run.output("report", o.out);
      const fs::path csv = o.csv.empty() ? with_suffix(o.out, ".csv") : o.csv;
      io::write_file_atomic(csv, metrics::csv({"k", "ratio"}, rows));
      run.output("csv", csv);
    } else if (name == "eval-fid" || name == "eval-recall") {
      run.input("real", o.real);
      run.input("gen", o.gen);
      const auto real = read_samples(o.real);
      const auto gen = read_samples(o.gen);
      const auto fm = feature_map(cfg, real, seed);
      metrics::MetricReport rep;
      rep.provenance = {{"feature_map", fm.id()}, {"real", real.size()}, {"generated", gen.size()}};
      if (name == "eval-fid") {
        rep.set("fid", metrics::fid(real, gen, fm, &rep.notes));
        if (!o.real_labels.empty() && !o.gen_labels.empty()) {
          run.input("real_labels", o.real_labels);
          run.input("gen_labels", o.gen_labels);
          const auto rc = by_class(real, data::labels_read(o.real_labels));
          const auto gc = by_class(gen, data::labels_read(o.gen_labels));
          rep.set("class_conditional_fid", metrics::class_conditional_fid(rc, gc, fm, {}, &rep.notes));
        }
      } else {
        rep.set("recall", metrics::recall(real, gen, fm, cfg.metrics.knn));
        rep.provenance["k_nn"] = cfg.metrics.knn;
      }
      write_json(o.out, rep.to_json());
      run.output("report", o.out);
    } else if (name == "eval-cdr") {
      const auto ck = load_ck(run, o);
      const auto sc = sampler_for(cfg, ck, o, sub, seed);
      run.input("real", o.real);
      run.input("real_labels", o.real_labels);
      const auto real = read_samples(o.real);
      const auto rc = by_class(real, data::labels_read(o.real_labels));
      std::vector<std::size_t> available;
      for (const auto& [c, _] : rc) available.push_back(c);
      const auto classes = metrics::choose_classes(available, std::min(o.classes, available.size()), seed);
      const auto fm = feature_map(cfg, real, seed);
      const auto res = metrics::cdr(ck, classes, o.rho_cdr, sc, fm, rc, o.per_class, o.threads);
      metrics::MetricReport rep;
      rep.set("cdr", res.value);
      for (const auto& [c, v] : res.fid_before) rep.per_class["fid_before"][std::to_string(c)] = v;
      for (const auto& [c, v] : res.fid_after) rep.per_class["fid_after"][std::to_string(c)] = v;
      rep.notes = res.notes;
      rep.provenance = {{"feature_map", fm.id()},   {"classes", classes},    {"rho", o.rho_cdr},
                        {"guidance", sc.guidance}, {"per_class", o.per_class}, {"seed", seed}};
      write_json(o.out, rep.to_json());
      run.output("report", o.out);
    }

    run.config["experiment"] = to_json(cfg);
    if (manifest.empty()) manifest = with_suffix(o.out, ".manifest.json");
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    run.write(manifest, ms);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace kflow::cli
