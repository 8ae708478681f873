#include "toolsynth/config.hpp"

#include "json_util.hpp"
#include "toolsynth/errors.hpp"
#include "toolsynth/manifest.hpp"
#include "toolsynth/parallel.hpp"
#include "toolsynth/png_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <thread>

namespace toolsynth {

using nlohmann::json;
namespace fs = std::filesystem;
using detail::get;
using detail::get_opt;

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TOOLSYNTH_JOBS"); env && *env) {
    int v = 0;
    const auto [end, ec] = std::from_chars(env, env + std::char_traits<char>::length(env), v);
    if (ec != std::errc() || *end != '\0' || v < 1)
      throw ConfigError(std::string("TOOLSYNTH_JOBS must be a positive integer, got '") + env + "'");
    return v;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::vector<std::string> default_class_roster() {
  return {"fenestrated_bipolar_forceps", "maryland_bipolar_forceps", "prograsp_forceps",
          "large_needle_driver",         "monopolar_curved_scissors", "ultrasound_probe",
          "suction_instrument",          "clip_applier"};
}

namespace {

std::string_view to_string(CamOpSet s) { return s == CamOpSet::Soft ? "soft" : "hard"; }

CamOpSet cam_op_set_from_string(const std::string& s) {
  if (s == "soft") return CamOpSet::Soft;
  if (s == "hard") return CamOpSet::Hard;
  throw ConfigError("trainaug.cam.op_set: expected 'soft' or 'hard', got '" + s + "'");
}

fs::path resolve_path(const fs::path& p, const fs::path& base) {
  return p.is_relative() && !base.empty() ? base / p : p;
}

template <typename Fn>
void as_config_error(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::optional<int> parse_tcp_port(const std::string& target) {
  if (target.rfind("tcp:", 0) != 0) return std::nullopt;
  int port = 0;
  const char* first = target.data() + 4;
  const char* last = target.data() + target.size();
  const auto [end, ec] = std::from_chars(first, last, port);
  if (ec != std::errc() || end != last || port < 1 || port > 65535)
    throw ConfigError("trainaug.stream: bad port in '" + target + "'");
  return port;
}

}  // namespace

json to_json(const HybridConfig& c) {
  json order = json::array();
  for (Stage s : c.order) order.push_back(std::string(to_string(s)));
  return {{"enabled", {{"epm", c.use_epm}, {"cam", c.use_cam}, {"cdo", c.use_cdo}}},
          {"order", order},
          {"cam",
           {{"severity", c.cam.severity},
            {"width", c.cam.width},
            {"depth_min", c.cam.depth_min},
            {"depth_max", c.cam.depth_max},
            {"alpha", c.cam.alpha},
            {"op_set", std::string(to_string(c.cam.op_set))}}},
          {"cdo",
           {{"num_min", c.cdo.num_min},
            {"num_max", c.cdo.num_max},
            {"size_min", c.cdo.size_min},
            {"size_max", c.cdo.size_max},
            {"apply_prob", c.cdo.apply_prob}}},
          {"epm", {{"prob", c.epm.prob}}}};
}

HybridConfig hybrid_config_from_json(const json& j, HybridConfig c) {
  if (j.contains("enabled")) {
    const auto& e = j.at("enabled");
    reject_unknown_keys(e, {"epm", "cam", "cdo"}, "trainaug.enabled");
    get_opt(e, "epm", c.use_epm, "trainaug.enabled");
    get_opt(e, "cam", c.use_cam, "trainaug.enabled");
    get_opt(e, "cdo", c.use_cdo, "trainaug.enabled");
  }
  if (j.contains("order")) {
    const auto names = get<std::vector<std::string>>(j, "order", "trainaug");
    if (names.size() != 3) throw ConfigError("trainaug.order: expected the three stages epm, cam, cdo");
    std::set<Stage> seen;
    for (std::size_t i = 0; i < 3; ++i) {
      as_config_error([&] { c.order[i] = stage_from_string(names[i]); });
      seen.insert(c.order[i]);
    }
    if (seen.size() != 3) throw ConfigError("trainaug.order: each stage must appear exactly once");
  }
  if (j.contains("cam")) {
    const auto& m = j.at("cam");
    constexpr const char* where = "trainaug.cam";
    reject_unknown_keys(m, {"severity", "width", "depth_min", "depth_max", "alpha", "op_set"}, where);
    get_opt(m, "severity", c.cam.severity, where);
    get_opt(m, "width", c.cam.width, where);
    get_opt(m, "depth_min", c.cam.depth_min, where);
    get_opt(m, "depth_max", c.cam.depth_max, where);
    get_opt(m, "alpha", c.cam.alpha, where);
    if (m.contains("op_set")) c.cam.op_set = cam_op_set_from_string(get<std::string>(m, "op_set", where));
  }
  if (j.contains("cdo")) {
    const auto& d = j.at("cdo");
    constexpr const char* where = "trainaug.cdo";
    reject_unknown_keys(d, {"num_min", "num_max", "size_min", "size_max", "apply_prob"}, where);
    get_opt(d, "num_min", c.cdo.num_min, where);
    get_opt(d, "num_max", c.cdo.num_max, where);
    get_opt(d, "size_min", c.cdo.size_min, where);
    get_opt(d, "size_max", c.cdo.size_max, where);
    get_opt(d, "apply_prob", c.cdo.apply_prob, where);
  }
  if (j.contains("epm")) {
    const auto& p = j.at("epm");
    reject_unknown_keys(p, {"prob"}, "trainaug.epm");
    get_opt(p, "prob", c.epm.prob, "trainaug.epm");
  }
  as_config_error([&] {
    validate(c.cam);
    validate(c.cdo);
  });
  if (!(c.epm.prob >= 0.0 && c.epm.prob <= 1.0)) throw ConfigError("trainaug.epm.prob must lie in [0,1]");
  return c;
}

EngineConfig config_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown_keys(j,
                      {"version", "master_seed", "seeds_dir", "classes", "pools", "augment", "dataset",
                       "trainaug", "output"},
                      "config");
  EngineConfig c;
  get_opt(j, "version", c.version, "config");
  if (c.version != kConfigVersion)
    throw ConfigError("config.version: unsupported version " + std::to_string(c.version));
  if (j.contains("master_seed") && !j.at("master_seed").is_null())
    c.master_seed = get<std::uint64_t>(j, "master_seed", "config");
  if (j.contains("seeds_dir")) c.seeds_dir = get<std::string>(j, "seeds_dir", "config");
  c.seeds_dir = resolve_path(c.seeds_dir, base_dir);
  get_opt(j, "classes", c.classes, "config");
  if (c.classes.empty()) throw ConfigError("config.classes: roster is empty");
  for (const auto& name : c.classes)
    if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..")
      throw ConfigError("config.classes: invalid class name '" + name + "'");
  if (std::set<std::string>(c.classes.begin(), c.classes.end()).size() != c.classes.size())
    throw ConfigError("config.classes: duplicate class name");

  if (j.contains("pools")) {
    const auto& p = j.at("pools");
    reject_unknown_keys(p, {"dir", "m", "n"}, "pools");
    if (p.contains("dir")) c.pools.dir = get<std::string>(p, "dir", "pools");
    get_opt(p, "m", c.pools.m, "pools");
    get_opt(p, "n", c.pools.n, "pools");
  }
  c.pools.dir = resolve_path(c.pools.dir, base_dir);
  if (c.pools.m < 1) throw ConfigError("pools.m must be >= 1");
  if (c.pools.n < 1) throw ConfigError("pools.n must be >= 1");

  if (j.contains("augment")) {
    const auto& a = j.at("augment");
    reject_unknown_keys(a, {"ranges"}, "augment");
    if (a.contains("ranges")) c.augment = ranges_from_json(a.at("ranges"), c.augment);
  }
  as_config_error([&] { validate(c.augment); });

  if (j.contains("dataset")) {
    if (j.at("dataset").contains("master_seed"))
      throw ConfigError("dataset.master_seed: set master_seed at the top level");
    c.dataset = dataset_spec_from_json(j.at("dataset"), c.dataset);
  }
  validate(c.dataset);

  if (j.contains("trainaug")) {
    const auto& t = j.at("trainaug");
    reject_unknown_keys(t, {"enabled", "order", "cam", "cdo", "epm", "batch_size", "epochs", "stream"},
                        "trainaug");
    c.trainaug.hybrid = hybrid_config_from_json(t, c.trainaug.hybrid);
    get_opt(t, "batch_size", c.trainaug.batch_size, "trainaug");
    get_opt(t, "epochs", c.trainaug.epochs, "trainaug");
    get_opt(t, "stream", c.trainaug.stream, "trainaug");
  }
  if (c.trainaug.batch_size < 1 || c.trainaug.batch_size > 0xFFFF)
    throw ConfigError("trainaug.batch_size must lie in [1, 65535]");
  if (c.trainaug.epochs < 0) throw ConfigError("trainaug.epochs must be >= 0");
  if (c.trainaug.stream != "stdout" && !parse_tcp_port(c.trainaug.stream))
    throw ConfigError("trainaug.stream: expected 'stdout' or 'tcp:<port>'");

  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown_keys(o, {"dir"}, "output");
    if (o.contains("dir")) c.output_dir = get<std::string>(o, "dir", "output");
  }
  c.output_dir = resolve_path(c.output_dir, base_dir);
  return c;
}

json to_json(const EngineConfig& c) {
  json dataset = to_json(c.dataset);
  dataset.erase("master_seed");
  json trainaug = to_json(c.trainaug.hybrid);
  trainaug["batch_size"] = c.trainaug.batch_size;
  trainaug["epochs"] = c.trainaug.epochs;
  trainaug["stream"] = c.trainaug.stream;
  json j = {{"version", c.version},
            {"seeds_dir", c.seeds_dir.string()},
            {"classes", c.classes},
            {"pools", {{"dir", c.pools.dir.string()}, {"m", c.pools.m}, {"n", c.pools.n}}},
            {"augment", {{"ranges", to_json(c.augment)}}},
            {"dataset", dataset},
            {"trainaug", trainaug},
            {"output", {{"dir", c.output_dir.string()}}}};
  j["master_seed"] = c.master_seed ? json(*c.master_seed) : json(nullptr);
  return j;
}

EngineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path, fs::exists(path) ? "cannot open" : "no such file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void resolve_seed(EngineConfig& cfg, std::optional<std::uint64_t> override_seed) {
  if (override_seed) cfg.master_seed = override_seed;
  if (!cfg.master_seed) throw ConfigError("no master seed: set master_seed in the config or pass --seed");
  cfg.dataset.master_seed = *cfg.master_seed;
}

SeedSet load_seeds(const fs::path& seeds_dir, const std::vector<std::string>& classes, int per_class) {
  if (!fs::is_directory(seeds_dir)) throw IoError(seeds_dir, "seeds directory not found");
  SeedSet set{load_image_png(seeds_dir / "background.png"), {}};
  for (const auto& name : classes) {
    const fs::path dir = seeds_dir / name;
    std::vector<fs::path> files;
    if (fs::is_directory(dir))
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
    if (static_cast<int>(files.size()) < per_class)
      throw ConfigError("class '" + name + "' has " + std::to_string(files.size()) + " seed image(s), needs " +
                        std::to_string(per_class));
    std::sort(files.begin(), files.end());
    files.resize(per_class);
    auto& sources = set.foregrounds.emplace_back();
    for (const auto& f : files) {
      const auto img = load_image_png(f);
      if (!img.has_alpha()) throw ConfigError(f.string() + ": seed cut-out needs an alpha channel");
      auto src = sprite_source_from_rgba(img);
      if (mask_area(src.mask) == 0) throw ConfigError(f.string() + ": seed cut-out is fully transparent");
      sources.push_back(std::move(src));
    }
  }
  return set;
}

namespace {

struct Fnv {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 0x100000001b3ULL;
  }
  void text(std::string_view s) {
    const std::uint64_t n = s.size();
    bytes(&n, sizeof n);
    bytes(s.data(), s.size());
  }
  void image(const RasterImage& img) {
    text(std::to_string(img.width()) + "x" + std::to_string(img.height()) + "x" +
         std::to_string(img.channel_count()));
    bytes(img.data().data(), img.data().size());
  }
};

std::string numbered(int n) {
  std::string s = std::to_string(n);
  if (s.size() < 6) s.insert(0, 6 - s.size(), '0');
  return s + ".png";
}

}  // namespace

std::uint64_t pool_fingerprint(const SeedSet& seeds, const EngineConfig& cfg) {
  Fnv f;
  const json params = {{"classes", cfg.classes},
                       {"m", cfg.pools.m},
                       {"n", cfg.pools.n},
                       {"master_seed", cfg.master_seed.value_or(0)},
                       {"seeds_per_instrument", cfg.dataset.seeds_per_instrument},
                       {"augment", to_json(cfg.augment)}};
  f.text(params.dump());
  f.image(seeds.background);
  for (const auto& cls : seeds.foregrounds)
    for (const auto& s : cls) f.image(s.image);
  return f.h;
}

PoolSet build_pools(const SeedSet& seeds, const EngineConfig& cfg, int jobs) {
  if (!cfg.master_seed) throw ConfigError("no master seed");
  PoolOptions opts;
  opts.ranges = cfg.augment;
  opts.jobs = jobs;
  PoolSet pools;
  pools.master_seed = *cfg.master_seed;
  pools.seeds_per_instrument = cfg.dataset.seeds_per_instrument;
  pools.backgrounds = build_background_pool(seeds.background, cfg.pools.m, pools.master_seed, opts);
  pools.foregrounds = build_foreground_pools(seeds.foregrounds, cfg.pools.n, pools.master_seed, opts);
  return pools;
}

void save_pool_cache(const PoolSet& pools, const EngineConfig& cfg, std::uint64_t fingerprint,
                     const fs::path& dir, int jobs) {
  if (pools.foregrounds.size() != cfg.classes.size())
    throw std::invalid_argument("pool cache: class count differs from the roster");
  const fs::path target = dir.lexically_normal();
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  try {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp);

    json backgrounds = json::array();
    for (const auto& b : pools.backgrounds) backgrounds.push_back(to_json(b.chain));
    json foregrounds = json::object();
    for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
      json list = json::array();
      for (const auto& s : pools.foregrounds[c]) list.push_back(to_json(s.chain));
      foregrounds[cfg.classes[c]] = list;
    }

    parallel_for(pools.backgrounds.size(), jobs, [&](std::size_t i) {
      save_png(pools.backgrounds[i].image, tmp / "backgrounds" / numbered(static_cast<int>(i)));
    });
    for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
      const auto& cls = pools.foregrounds[c];
      parallel_for(cls.size(), jobs, [&](std::size_t j) {
        save_png(cls[j].image, tmp / "foregrounds" / cfg.classes[c] / numbered(static_cast<int>(j)));
      });
    }

    const json doc = {{"version", kManifestVersion},
                      {"fingerprint", fingerprint},
                      {"master_seed", pools.master_seed},
                      {"seeds_per_instrument", pools.seeds_per_instrument},
                      {"classes", cfg.classes},
                      {"backgrounds", backgrounds},
                      {"foregrounds", foregrounds}};
    {
      std::ofstream out(tmp / "pools.json");
      out << doc.dump(2) << '\n';
      if (!out) throw IoError(tmp / "pools.json", "write failed");
    }
    fs::remove_all(target);
    fs::rename(tmp, target);
  } catch (const fs::filesystem_error& e) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw IoError(e.path1().empty() ? target : e.path1(), e.code().message());
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
}

PoolSet load_pool_cache(const fs::path& dir, const EngineConfig& cfg, std::optional<std::uint64_t> expected,
                        int jobs) {
  const fs::path index = dir / "pools.json";
  std::ifstream in(index);
  if (!in) throw IoError(index, "pool cache not found; run the pools command first");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(index.string() + ": " + e.what());
  }
  constexpr const char* where = "pools.json";
  reject_unknown_keys(doc,
                      {"version", "fingerprint", "master_seed", "seeds_per_instrument", "classes", "backgrounds",
                       "foregrounds"},
                      where);
  if (expected && get<std::uint64_t>(doc, "fingerprint", where) != *expected)
    throw ConfigError(dir.string() + ": pool cache was built from different seeds or settings; rerun pools");
  if (get<std::vector<std::string>>(doc, "classes", where) != cfg.classes)
    throw ConfigError(dir.string() + ": pool cache class roster differs from the config");

  PoolSet pools;
  pools.master_seed = get<std::uint64_t>(doc, "master_seed", where);
  pools.seeds_per_instrument = get<int>(doc, "seeds_per_instrument", where);

  const auto bg_chains = get<json>(doc, "backgrounds", where);
  pools.backgrounds.resize(bg_chains.size());
  parallel_for(bg_chains.size(), jobs, [&](std::size_t i) {
    auto img = load_image_png(dir / "backgrounds" / numbered(static_cast<int>(i)));
    pools.backgrounds[i] = BackgroundEntry{with_channels(img, Channels::RGB), chain_from_json(bg_chains[i])};
  });

  const auto fg = get<json>(doc, "foregrounds", where);
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    const auto chains = get<json>(fg, cfg.classes[c].c_str(), "pools.json.foregrounds");
    auto& cls = pools.foregrounds.emplace_back(chains.size());
    parallel_for(chains.size(), jobs, [&](std::size_t j) {
      const auto path = dir / "foregrounds" / cfg.classes[c] / numbered(static_cast<int>(j));
      const auto img = load_image_png(path);
      if (!img.has_alpha()) throw ConfigError(path.string() + ": stored sprite has no alpha channel");
      cls[j] = sprite_from_stored(img, static_cast<int>(c), chain_from_json(chains[j]));
    });
  }
  return pools;
}

}  // namespace toolsynth
