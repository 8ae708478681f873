#include "toolsynth/compose.hpp"
#include "toolsynth/config.hpp"
#include "toolsynth/errors.hpp"
#include "toolsynth/evaluate.hpp"
#include "toolsynth/manifest.hpp"
#include "toolsynth/parallel.hpp"
#include "toolsynth/stream.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toolsynth;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 0;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "engine config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", c.seed, "master seed; overrides the config");
  cmd->add_option("--jobs", c.jobs, "worker threads (default: TOOLSYNTH_JOBS, then all cores)");
}

void print_effective(const std::string& command, const json& settings) {
  std::cerr << "effective config (" << command << "):\n" << settings.dump(2) << '\n';
}

EngineConfig engine_config(const Common& c) {
  EngineConfig cfg = load_config(c.config);
  resolve_seed(cfg, c.seed);
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_pools(const Common& c, const std::string& out) {
  EngineConfig cfg = engine_config(c);
  if (!out.empty()) cfg.pools.dir = out;
  const int jobs = resolve_jobs(c.jobs);
  json eff = to_json(cfg);
  eff["jobs"] = jobs;
  print_effective("pools", eff);

  const auto t0 = std::chrono::steady_clock::now();
  const SeedSet seeds = load_seeds(cfg.seeds_dir, cfg.classes, cfg.dataset.seeds_per_instrument);
  const auto fingerprint = pool_fingerprint(seeds, cfg);
  const PoolSet pools = build_pools(seeds, cfg, jobs);
  save_pool_cache(pools, cfg, fingerprint, cfg.pools.dir, jobs);
  std::size_t sprites = 0;
  for (const auto& cls : pools.foregrounds) sprites += cls.size();
  std::cout << "pools: " << pools.backgrounds.size() << " backgrounds, " << sprites << " sprites in "
            << cfg.classes.size() << " classes -> " << cfg.pools.dir.string() << " (" << seconds_since(t0)
            << " s)\n";
  return 0;
}

int run_synth(const Common& c, const std::string& out, std::optional<std::size_t> count) {
  EngineConfig cfg = engine_config(c);
  if (!out.empty()) cfg.output_dir = out;
  if (count) cfg.dataset.count = *count;
  validate(cfg.dataset);
  const int jobs = resolve_jobs(c.jobs);
  json eff = to_json(cfg);
  eff["jobs"] = jobs;
  print_effective("synth", eff);

  const auto t0 = std::chrono::steady_clock::now();
  const SeedSet seeds = load_seeds(cfg.seeds_dir, cfg.classes, cfg.dataset.seeds_per_instrument);
  const PoolSet pools = load_pool_cache(cfg.pools.dir, cfg, pool_fingerprint(seeds, cfg), jobs);
  const Manifest m = generate_dataset(cfg.dataset, pools, cfg.output_dir, jobs);
  std::size_t singles = 0;
  for (const auto& s : m.samples) singles += s.sprites.size() == 1;
  std::cout << "synth: " << m.samples.size() << " samples (" << singles << " single, "
            << m.samples.size() - singles << " two-instrument), blend " << to_string(cfg.dataset.blend)
            << ", seed " << m.master_seed << " -> " << cfg.output_dir.string() << " (" << seconds_since(t0)
            << " s)\n";
  return 0;
}

struct AugmentArgs {
  std::string manifest;
  std::string out;
  std::optional<std::string> stream;
  std::optional<std::size_t> batch_size;
  std::optional<int> epochs;
};

int run_augment(const Common& c, const AugmentArgs& a) {
  EngineConfig cfg = engine_config(c);
  if (a.batch_size) cfg.trainaug.batch_size = *a.batch_size;
  if (a.epochs) cfg.trainaug.epochs = *a.epochs;
  if (a.stream && !a.stream->empty()) cfg.trainaug.stream = *a.stream;
  if (!a.out.empty()) cfg.output_dir = a.out;
  const int jobs = resolve_jobs(c.jobs);
  json eff = to_json(cfg);
  eff["jobs"] = jobs;
  eff["manifest"] = a.manifest;
  eff["mode"] = a.stream ? "stream" : "offline";
  print_effective("augment", eff);

  const fs::path manifest_path = a.manifest;
  const Manifest manifest = read_manifest(manifest_path);
  StreamOptions opts;
  opts.batch_size = cfg.trainaug.batch_size;
  opts.epochs = cfg.trainaug.epochs;
  opts.hybrid = cfg.trainaug.hybrid;
  opts.seed = *cfg.master_seed;
  opts.jobs = jobs;

  if (!a.stream) {
    const Manifest out = write_augmented(manifest, manifest_path.parent_path(), opts, cfg.output_dir);
    std::cout << "augment: " << out.samples.size() << " samples -> " << cfg.output_dir.string() << '\n';
    return 0;
  }
  if (cfg.trainaug.stream == "stdout") {
    FdOutBuf buf(STDOUT_FILENO);
    std::ostream sink(&buf);
    const auto n = stream_batches(manifest, manifest_path.parent_path(), opts, sink);
    std::cerr << "augment: streamed " << n << " batches to stdout\n";
    return 0;
  }
  const int port = std::stoi(cfg.trainaug.stream.substr(4));
  std::cerr << "augment: waiting for a connection on port " << port << '\n';
  const int fd = accept_one_connection(port);
  std::size_t n = 0;
  {
    FdOutBuf buf(fd);
    std::ostream sink(&buf);
    try {
      n = stream_batches(manifest, manifest_path.parent_path(), opts, sink);
    } catch (...) {
      ::close(fd);
      throw;
    }
  }
  ::close(fd);
  std::cerr << "augment: streamed " << n << " batches to port " << port << '\n';
  return 0;
}

int run_eval(const Common& c, const std::string& pred, const std::string& gt, const std::string& format) {
  const int jobs = resolve_jobs(c.jobs);
  print_effective("eval", {{"pred_dir", pred}, {"gt_dir", gt}, {"format", format}, {"jobs", jobs}});
  const EvalReport r = evaluate_dir(pred, gt, jobs);
  if (format == "json")
    std::cout << to_json(r).dump(2) << '\n';
  else
    std::cout << to_text(r);
  return 0;
}

int run_stats(const Common& c, const std::string& manifest, const std::string& format) {
  const int jobs = resolve_jobs(c.jobs);
  print_effective("stats", {{"manifest", manifest}, {"format", format}, {"jobs", jobs}});
  const fs::path path = manifest;
  const DatasetStats s = dataset_stats(read_manifest(path), path.parent_path(), jobs);
  if (format == "json")
    std::cout << to_json(s).dump(2) << '\n';
  else
    std::cout << to_text(s);
  return 0;
}

struct MixArgs {
  std::string manifest;
  std::string real_dir;
  std::string recipe = "augment";
  double fraction = 0.0;
  std::string out;
  std::optional<std::string> rounding;
};

int run_mix(const Common& c, const MixArgs& a) {
  std::optional<std::uint64_t> seed = c.seed;
  Rounding rounding = Rounding::HalfAwayFromZero;
  if (!c.config.empty()) {
    EngineConfig cfg = engine_config(c);
    seed = cfg.master_seed;
    rounding = cfg.dataset.rounding;
  }
  if (!seed) throw ConfigError("no master seed: set master_seed in the config or pass --seed");
  if (a.rounding) {
    try {
      rounding = rounding_from_string(*a.rounding);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  MixRecipe recipe;
  recipe.kind = a.recipe == "replace" ? MixRecipe::Kind::Replace : MixRecipe::Kind::Augment;
  recipe.fraction = a.fraction;
  print_effective("mix", {{"manifest", a.manifest},
                          {"real_dir", a.real_dir},
                          {"recipe", a.recipe},
                          {"fraction", a.fraction},
                          {"rounding", std::string(to_string(rounding))},
                          {"seed", *seed},
                          {"out", a.out}});
  const fs::path in = a.manifest;
  const Manifest m =
      mix_datasets(read_manifest(in), in.parent_path(), a.real_dir, recipe, *seed, rounding, a.out);
  write_manifest(m, a.out);
  std::size_t real = 0;
  for (const auto& s : m.samples) real += s.source == "real";
  std::cout << "mix: " << m.samples.size() << " samples (" << m.samples.size() - real << " synthetic, " << real
            << " real) -> " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"toolsynth: synthetic surgical-instrument segmentation datasets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "toolsynth 1.0");

  Common common;
  std::string out;
  std::optional<std::size_t> count;

  auto* pools = app.add_subcommand("pools", "build the background and foreground pools");
  add_common(pools, common, true);
  pools->add_option("--out", out, "pool cache directory (overrides pools.dir)");

  auto* synth = app.add_subcommand("synth", "compose a dataset from the pool cache");
  add_common(synth, common, true);
  synth->add_option("--out", out, "dataset directory (overrides output.dir)");
  synth->add_option("--count", count, "number of samples (overrides dataset.count)");

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "hybrid training-time augmentation of a dataset");
  add_common(augment, common, true);
  augment->add_option("--manifest", aug.manifest, "input manifest.json")->required();
  augment->add_option("--out", aug.out, "output directory for offline mode (overrides output.dir)");
  augment->add_option("--stream", aug.stream, "emit the byte stream to 'stdout' or 'tcp:<port>'")
      ->expected(0, 1);
  augment->add_option("--batch-size", aug.batch_size, "batch size (overrides trainaug.batch_size)");
  augment->add_option("--epochs", aug.epochs, "epochs (overrides trainaug.epochs)");

  std::string pred_dir, gt_dir, format = "text";
  auto* eval = app.add_subcommand("eval", "Dice scores of predicted masks against ground truth");
  eval->add_option("pred_dir", pred_dir)->required();
  eval->add_option("gt_dir", gt_dir)->required();
  eval->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  eval->add_option("--jobs", common.jobs);

  std::string manifest_path;
  auto* stats = app.add_subcommand("stats", "dataset statistics from a manifest");
  stats->add_option("manifest", manifest_path)->required();
  stats->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  stats->add_option("--jobs", common.jobs);

  MixArgs mix_args;
  auto* mix = app.add_subcommand("mix", "join a synthetic manifest with real image/mask pairs");
  add_common(mix, common, false);
  mix->add_option("manifest", mix_args.manifest)->required();
  mix->add_option("real_dir", mix_args.real_dir)->required();
  mix->add_option("--recipe", mix_args.recipe)->check(CLI::IsMember({"replace", "augment"}));
  mix->add_option("--fraction", mix_args.fraction)->required();
  mix->add_option("--out", mix_args.out, "output manifest path")->required();
  mix->add_option("--rounding", mix_args.rounding)->check(CLI::IsMember({"half_away", "truncate"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*pools) return run_pools(common, out);
    if (*synth) return run_synth(common, out, count);
    if (*augment) return run_augment(common, aug);
    if (*eval) return run_eval(common, pred_dir, gt_dir, format);
    if (*stats) return run_stats(common, manifest_path, format);
    if (*mix) return run_mix(common, mix_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 2;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
