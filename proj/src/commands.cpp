#include "lrising/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "lrising/exact.hpp"
#include "lrising/sampler.hpp"
#include "lrising/util.hpp"
#include "lrising/verify.hpp"
#include "nlohmann/json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace lrising {

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json parse_with_position(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    size_t line = 1, col = 1;
    for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                      ": " + e.what());
  }
}

const json& need_block(const json& root, const char* key) {
  auto it = root.find(key);
  if (it == root.end() || !it->is_object()) throw ConfigError(std::string("missing object block \"") + key + "\"");
  return *it;
}

double need_number(const json& block, const char* path, const char* key) {
  auto it = block.find(key);
  if (it == block.end() || !it->is_number())
    throw ConfigError(std::string(path) + "." + key + " must be a number");
  return it->get<double>();
}

double number_or(const json& block, const char* path, const char* key, double fallback) {
  auto it = block.find(key);
  if (it == block.end()) return fallback;
  if (!it->is_number()) throw ConfigError(std::string(path) + "." + key + " must be a number");
  return it->get<double>();
}

uint64_t unsigned_or(const json& block, const char* path, const char* key, uint64_t fallback) {
  auto it = block.find(key);
  if (it == block.end()) return fallback;
  if (!it->is_number_unsigned()) throw ConfigError(std::string(path) + "." + key + " must be a non-negative integer");
  return it->get<uint64_t>();
}

std::string string_or(const json& block, const char* path, const char* key, const std::string& fallback) {
  auto it = block.find(key);
  if (it == block.end()) return fallback;
  if (!it->is_string()) throw ConfigError(std::string(path) + "." + key + " must be a string");
  return it->get<std::string>();
}

std::vector<double> need_number_grid(const json& block, const char* path, const char* key) {
  auto it = block.find(key);
  if (it == block.end() || !it->is_array() || it->empty())
    throw ConfigError(std::string(path) + "." + key + " must be a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) throw ConfigError(std::string(path) + "." + key + " must hold numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<size_t> unsigned_grid_or(const json& block, const char* path, const char* key,
                                     std::vector<size_t> fallback) {
  auto it = block.find(key);
  if (it == block.end()) return fallback;
  if (!it->is_array() || it->empty())
    throw ConfigError(std::string(path) + "." + key + " must be a nonempty array of non-negative integers");
  std::vector<size_t> out;
  for (const auto& v : *it) {
    if (!v.is_number_unsigned()) throw ConfigError(std::string(path) + "." + key + " must hold non-negative integers");
    out.push_back(v.get<size_t>());
  }
  return out;
}

std::vector<Site> site_list(const json& arr, const char* what, int dim) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(std::string(what) + " must be a nonempty array of sites");
  std::vector<Site> out;
  for (const auto& entry : arr) {
    if (!entry.is_array() || static_cast<int>(entry.size()) != dim)
      throw ConfigError(std::string(what) + " sites must be integer arrays of length d");
    std::vector<int> coords;
    for (int i = 0; i < dim; ++i) {
      if (!entry[i].is_number_integer()) throw ConfigError(std::string(what) + " coordinates must be integers");
      coords.push_back(entry[i].get<int>());
    }
    out.push_back(Site(coords));
  }
  return out;
}

/// Everything a command body needs, validated before any compute starts.
struct Resolved {
  json raw;
  CouplingSpec spec;
  std::vector<int> sides;
  std::shared_ptr<const Volume> volume;
  std::string bc_name = "plus";
  std::vector<double> betas;
  std::vector<double> epsilons;
  size_t replicas = 1;
  uint64_t seed = 1;
  ChainConfig chain;  // beta filled per grid point
  MarParams params;
  std::vector<size_t> n_grid;
  std::vector<int> l_grid;

  BoundaryCondition bc() const { return bc_name == "minus" ? BoundaryCondition::minus() : BoundaryCondition::plus(); }
};

Resolved resolve(const std::string& text, const RunOptions& opts) {
  Resolved r;
  r.raw = parse_with_position(text);
  if (!r.raw.is_object()) throw ConfigError("config root must be an object");

  const json& model = need_block(r.raw, "model");
  int d = static_cast<int>(need_number(model, "model", "d"));
  r.spec.dim = d;
  r.spec.alpha = need_number(model, "model", "alpha");
  r.spec.J = number_or(model, "model", "J", 1.0);
  r.spec.r_cut = need_number(model, "model", "r_cut");
  r.spec.norm = norm_from_name(string_or(model, "model", "norm", "euclidean"));
  try {
    r.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }

  const json& vol = need_block(r.raw, "volume");
  auto sides_it = vol.find("sides");
  if (sides_it == vol.end() || !sides_it->is_array() || sides_it->empty())
    throw ConfigError("volume.sides must be a nonempty array");
  for (const auto& s : *sides_it) {
    if (!s.is_number_integer() || s.get<int>() < 1) throw ConfigError("volume.sides entries must be positive integers");
    r.sides.push_back(s.get<int>());
  }
  if (static_cast<int>(r.sides.size()) != d) throw ConfigError("volume.sides length must equal model.d");
  r.volume = std::make_shared<const Volume>(Volume::box(r.sides));

  const json& run = need_block(r.raw, "run");
  r.betas = need_number_grid(run, "run", "beta_grid");
  for (double b : r.betas)
    if (!(b >= 0.0)) throw ConfigError("run.beta_grid entries must be >= 0");
  r.bc_name = string_or(run, "run", "bc", "plus");
  if (r.bc_name != "plus" && r.bc_name != "minus") throw ConfigError("run.bc must be \"plus\" or \"minus\"");
  r.seed = unsigned_or(run, "run", "seed", 1);
  if (opts.has_seed) {
    r.seed = opts.seed;
    r.raw["run"]["seed"] = opts.seed;  // the manifest echoes the effective seed
  }
  r.chain.seed = r.seed;
  r.chain.sweeps = unsigned_or(run, "run", "sweeps", 11000);
  r.chain.burn_in = unsigned_or(run, "run", "burn_in", 1000);
  r.chain.thinning = unsigned_or(run, "run", "thinning", 10);
  std::string scan = string_or(run, "run", "scan", "lexicographic");
  if (scan != "lexicographic" && scan != "random") throw ConfigError("run.scan must be \"lexicographic\" or \"random\"");
  r.chain.scan = scan == "random" ? ScanOrder::Random : ScanOrder::Lexicographic;
  r.chain.beta = r.betas.front();
  try {
    r.chain.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("run: ") + e.what());
  }

  const json& field = need_block(r.raw, "field");
  r.epsilons = need_number_grid(field, "field", "epsilon_grid");
  for (double e : r.epsilons)
    if (!(e >= 0.0)) throw ConfigError("field.epsilon_grid entries must be >= 0");
  r.replicas = unsigned_or(field, "field", "replicas", 1);
  if (r.replicas < 1) throw ConfigError("field.replicas must be >= 1");

  if (auto it = r.raw.find("contours"); it != r.raw.end()) {
    const json& c = *it;
    r.params.m_sep = number_or(c, "contours", "m", r.params.m_sep);
    r.params.a_exp = number_or(c, "contours", "a", r.params.a_exp);
    r.params.r_comp = unsigned_or(c, "contours", "r", r.params.r_comp);
    r.n_grid = unsigned_grid_or(c, "contours", "n_grid", {4, 6});
    for (size_t l : unsigned_grid_or(c, "contours", "l_grid", {0, 1, 2})) r.l_grid.push_back(static_cast<int>(l));
  } else {
    r.n_grid = {4, 6};
    r.l_grid = {0, 1, 2};
  }
  return r;
}

json verify_block(const Resolved& r, const std::string& bound) {
  auto it = r.raw.find("verify");
  if (it == r.raw.end()) return json::object();
  if (!it->is_object()) throw ConfigError("verify must be an object");
  auto sub = it->find(bound);
  if (sub == it->end()) return json::object();
  if (!sub->is_object()) throw ConfigError("verify." + bound + " must be an object");
  return *sub;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f.good()) throw std::runtime_error("short write on " + p.string());
}

std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream s;
  s << join_csv_row(header);
  for (const auto& row : rows) s << join_csv_row(row);
  return s.str();
}

struct Emitter {
  fs::path dir;
  std::vector<std::string> artifacts;

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<std::string>>& rows) {
    write_text(dir / name, csv_text(header, rows));
    artifacts.push_back(name);
  }
  void text(const std::string& name, const std::string& body) {
    write_text(dir / name, body);
    artifacts.push_back(name);
  }
};

int run_enumerate(const Resolved& r, const RunOptions& opts, Emitter& em, std::ostream& out) {
  CouplingTable table(r.spec, r.volume, r.bc());
  ExactOptions ex;
  ex.override_scale_guard = opts.override_scale_guard;
  Site origin = r.volume->sites().front();
  if (r.volume->contains(Site::zero(r.spec.dim))) origin = Site::zero(r.spec.dim);

  std::vector<std::vector<std::string>> rows;
  for (double beta : r.betas) {
    for (double eps : r.epsilons) {
      size_t reps = eps > 0.0 ? r.replicas : 1;
      FieldSpec fsp = eps > 0.0 ? FieldSpec::gaussian(eps, r.seed) : FieldSpec::none();
      for (size_t rep = 0; rep < reps; ++rep) {
        FieldRealization h;
        const FieldRealization* hp = nullptr;
        uint64_t fseed = 0;
        if (eps > 0.0) {
          fseed = derive_seed(r.seed, "field", rep);
          h = sample_field(fsp, *r.volume, fseed);
          hp = &h;
        }
        LogPartition lp = log_partition(table, fsp, hp, beta, ex);
        double p = site_minus_probability(origin, table, fsp, hp, beta, ex);
        double m = site_magnetization(origin, table, fsp, hp, beta, ex);
        rows.push_back({format_double(beta), format_double(eps), std::to_string(rep), std::to_string(fseed),
                        format_double(lp.log_z), format_double(p), format_double(m)});
      }
    }
  }
  em.csv("enumerate.csv",
         {"beta", "epsilon", "replica", "field_seed", "log_z", "p_origin_minus", "origin_magnetization"}, rows);
  out << "enumerate: " << rows.size() << " rows over " << r.volume->size() << " sites\n";
  return kExitOk;
}

CountingConfig counting_config(const Resolved& r) {
  json v = verify_block(r, "counting");
  CountingConfig cfg;
  cfg.dim = r.spec.dim;
  cfg.n_grid = r.n_grid;
  cfg.l_grid = r.l_grid;
  cfg.r_param = static_cast<int>(unsigned_or(v, "verify.counting", "r", 2));
  cfg.a_param = number_or(v, "verify.counting", "a", 1.0);
  cfg.k_param = static_cast<int>(unsigned_or(v, "verify.counting", "k", 1));
  cfg.params = r.params;
  return cfg;
}

int run_contours(const Resolved& r, Emitter& em, std::ostream& out) {
  BoundReport rep = verify_counting(counting_config(r));
  em.csv("census.csv", rep.columns, rep.rows);
  out << "contours: " << rep.rows.size() << " census/cover rows\n";
  return kExitOk;
}

int run_sample(const Resolved& r, const RunOptions& opts, Emitter& em, std::ostream& out) {
  CouplingTable table(r.spec, r.volume, r.bc());
  std::vector<std::vector<std::string>> rows;
  for (double beta : r.betas) {
    for (double eps : r.epsilons) {
      ChainConfig cfg = r.chain;
      cfg.beta = beta;
      if (eps > 0.0) {
        EnsembleResult ens = disorder_ensemble(cfg, table, eps, r.replicas, opts.workers);
        for (size_t rep = 0; rep < ens.replicas.size(); ++rep) {
          const ObservableRecord& rec = ens.replicas[rep];
          rows.push_back({format_double(beta), format_double(eps), r.bc_name, std::to_string(rep),
                          format_double(rec.estimate), format_double(rec.std_error),
                          std::to_string(rec.effective_samples), std::to_string(rec.seed),
                          std::to_string(ens.field_seeds[rep])});
        }
        rows.push_back({format_double(beta), format_double(eps), r.bc_name, "aggregate",
                        format_double(ens.aggregate.estimate), format_double(ens.aggregate.std_error),
                        std::to_string(ens.aggregate.effective_samples), std::to_string(ens.aggregate.seed), "0"});
      } else {
        for (size_t rep = 0; rep < r.replicas; ++rep) {
          ChainConfig one = cfg;
          one.seed = derive_seed(cfg.seed, "chain", rep);
          ObservableRecord rec = estimate_origin_minus(one, table, FieldSpec::none(), nullptr);
          rows.push_back({format_double(beta), format_double(eps), r.bc_name, std::to_string(rep),
                          format_double(rec.estimate), format_double(rec.std_error),
                          std::to_string(rec.effective_samples), std::to_string(rec.seed), "0"});
        }
      }
    }
  }
  em.csv("samples.csv",
         {"beta", "epsilon", "bc", "replica", "estimate", "std_error", "effective_samples", "chain_seed",
          "field_seed"},
         rows);
  out << "sample: " << rows.size() << " rows\n";
  return kExitOk;
}

int run_sweep(const Resolved& r, const RunOptions& opts, Emitter& em, std::ostream& out) {
  auto rows = beta_sweep(r.chain, r.spec, r.volume, r.betas, r.epsilons, r.replicas, opts.workers);
  std::vector<std::vector<std::string>> cells;
  for (const SweepRow& s : rows)
    cells.push_back({format_double(s.beta), format_double(s.epsilon), s.bc, format_double(s.estimate),
                     format_double(s.std_error), std::to_string(s.replicas), std::to_string(s.seed)});
  em.csv("sweep.csv", {"beta", "epsilon", "bc", "estimate", "std_error", "replicas", "seed"}, cells);
  out << "sweep: " << cells.size() << " grid rows\n";
  return kExitOk;
}

BoundReport run_bound(const Resolved& r, const std::string& bound, const RunOptions& opts) {
  if (bound == "flip-energy") {
    CouplingTable table(r.spec, r.volume, r.bc());
    auto instances = exhaustive_flip_instances(table, r.params, opts.override_scale_guard);
    return verify_flip_energy_bound(instances, table, uint64_t{1} << r.volume->size());
  }
  if (bound == "concentration") {
    json v = verify_block(r, "concentration");
    CouplingTable table(r.spec, r.volume, r.bc());
    ConcentrationConfig cfg;
    cfg.lambdas = v.contains("lambdas") ? need_number_grid(v, "verify.concentration", "lambdas")
                                        : std::vector<double>{0.5, 1.0, 1.5, 2.0};
    cfg.replicas = unsigned_or(v, "verify.concentration", "replicas", 400);
    cfg.beta = number_or(v, "verify.concentration", "beta", r.betas.front() > 0.0 ? r.betas.front() : 1.0);
    cfg.epsilon = number_or(v, "verify.concentration", "epsilon", 0.5);
    cfg.seed = r.seed;
    cfg.exact.override_scale_guard = opts.override_scale_guard;
    std::vector<Site> a_sites = v.contains("region")
                                    ? site_list(v["region"], "verify.concentration.region", r.spec.dim)
                                    : std::vector<Site>{Site::zero(r.spec.dim)};
    std::vector<Site> ap_sites = v.contains("region_prime")
                                     ? site_list(v["region_prime"], "verify.concentration.region_prime", r.spec.dim)
                                     : a_sites;
    return verify_concentration(Volume(r.spec.dim, a_sites), Volume(r.spec.dim, ap_sites), table, cfg);
  }
  if (bound == "counting") return verify_counting(counting_config(r));
  if (bound == "dudley") {
    json v = verify_block(r, "dudley");
    CouplingTable table(r.spec, r.volume, r.bc());
    size_t n_faces = unsigned_or(v, "verify.dudley", "n_faces", 6);
    size_t max_interior = unsigned_or(v, "verify.dudley", "max_interior", 2);
    auto family = enumerate_contours_origin_subsets(n_faces, max_interior, *r.volume, r.params,
                                                    OriginRule::Interior, r.bc());
    DudleyConfig cfg;
    cfg.eps_grid = v.contains("eps_grid") ? need_number_grid(v, "verify.dudley", "eps_grid")
                                          : std::vector<double>{0.01, 0.05, 0.1, 0.5};
    cfg.replicas = unsigned_or(v, "verify.dudley", "replicas", 200);
    cfg.beta = number_or(v, "verify.dudley", "beta", r.betas.front() > 0.0 ? r.betas.front() : 1.0);
    cfg.epsilon = number_or(v, "verify.dudley", "epsilon", 0.5);
    cfg.seed = r.seed;
    cfg.exact.override_scale_guard = opts.override_scale_guard;
    return dudley_entropy_estimate(family, table, cfg);
  }
  if (bound == "peierls") {
    json v = verify_block(r, "peierls");
    PeierlsConfig cfg;
    cfg.spec = r.spec;
    cfg.betas = r.betas;
    cfg.epsilons = r.epsilons;
    cfg.volumes = {r.sides};
    cfg.replicas = r.replicas;
    cfg.seed = r.seed;
    cfg.exact_site_cap = unsigned_or(v, "verify.peierls", "exact_site_cap", 16);
    cfg.chain = r.chain;
    cfg.exact.override_scale_guard = opts.override_scale_guard;
    return verify_peierls(cfg);
  }
  throw ConfigError("unknown bound \"" + bound + "\"");
}

int run_verify(const Resolved& r, const std::string& bound, const RunOptions& opts, Emitter& em,
               std::ostream& out) {
  BoundReport rep = run_bound(r, bound, opts);
  em.text("verify_" + bound + ".json", rep.to_json() + "\n");
  em.csv("verify_" + bound + ".csv", rep.columns, rep.rows);
  out << rep.to_table();
  if (opts.strict && rep.verdict == Verdict::Violated) return kExitViolated;
  return kExitOk;
}

}  // namespace

std::string default_config_json() {
  return R"({
  "model": {"d": 2, "alpha": 3.0, "J": 1.0, "r_cut": 1.5, "norm": "euclidean"},
  "volume": {"sides": [3, 3]},
  "field": {"epsilon_grid": [0.0, 0.5], "replicas": 8},
  "run": {"beta_grid": [0.25, 0.5, 1.0], "bc": "plus", "seed": 31, "sweeps": 6000, "burn_in": 1000, "thinning": 5},
  "contours": {"m": 1.0, "a": 1.0, "r": 4, "n_grid": [4, 6], "l_grid": [0, 1, 2]},
  "verify": {
    "concentration": {"region": [[0, 0]], "region_prime": [[1, 0]], "lambdas": [0.5, 1.0, 1.5, 2.0], "replicas": 400},
    "counting": {"r": 2, "a": 1.0, "k": 1},
    "dudley": {"n_faces": 6, "max_interior": 2, "eps_grid": [0.01, 0.05, 0.1, 0.5], "replicas": 200},
    "peierls": {"exact_site_cap": 16}
  }
}
)";
}

int run_command(const std::string& command, const std::string& bound, const RunOptions& opts,
                std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> kBounds = {"flip-energy", "concentration", "counting", "dudley",
                                                   "peierls"};
  bool known = command == "enumerate" || command == "contours" || command == "sample" || command == "sweep" ||
               command == "verify";
  if (!known) {
    err << "unknown command \"" << command << "\"\n";
    return kExitUsage;
  }
  if (command == "verify" &&
      std::find(kBounds.begin(), kBounds.end(), bound) == kBounds.end()) {
    err << "unknown bound \"" << bound << "\" (expected one of: flip-energy concentration counting dudley peierls)\n";
    return kExitUsage;
  }

  std::string text;
  if (opts.config_path.empty()) {
    text = default_config_json();
  } else {
    std::ifstream f(opts.config_path, std::ios::binary);
    if (!f) {
      err << "cannot read config " << opts.config_path << "\n";
      return kExitConfig;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    text = buf.str();
  }

  Resolved r;
  try {
    r = resolve(text, opts);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::string out_root = opts.out_dir;
  if (out_root.empty()) {
    const char* env = std::getenv("LRISING_OUT");
    out_root = env && *env ? env : "out";
  }
  Emitter em;
  em.dir = out_root;
  std::error_code ec;
  fs::create_directories(em.dir, ec);
  if (ec) {
    err << "cannot create output directory " << em.dir.string() << ": " << ec.message() << "\n";
    return kExitUsage;
  }

  size_t workers = opts.workers > 0 ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  RunOptions eff = opts;
  eff.workers = workers;

  auto started = std::chrono::steady_clock::now();
  int status = kExitOk;
  try {
    if (command == "enumerate")
      status = run_enumerate(r, eff, em, out);
    else if (command == "contours")
      status = run_contours(r, em, out);
    else if (command == "sample")
      status = run_sample(r, eff, em, out);
    else if (command == "sweep")
      status = run_sweep(r, eff, em, out);
    else
      status = run_verify(r, bound, eff, em, out);
  } catch (const ScaleGuardError& e) {
    err << "scale guard: " << e.what() << "\n";
    if (!eff.override_scale_guard) err << "rerun with --override-scale-guard to push past the soft limit\n";
    status = kExitScaleGuard;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);

  ordered_json manifest;
  manifest["command"] = command;
  if (!bound.empty()) manifest["bound"] = bound;
  manifest["version"] = kVersion;
  manifest["seed"] = r.seed;
  manifest["workers"] = workers;
  manifest["strict"] = opts.strict;
  manifest["override_scale_guard"] = opts.override_scale_guard;
  manifest["exit_status"] = status;
  manifest["artifacts"] = em.artifacts;
  manifest["wall_time_ms"] = elapsed.count();
  manifest["config"] = r.raw;
  write_text(em.dir / "manifest.json", manifest.dump(2) + "\n");

  out << "artifacts under " << em.dir.string() << " (manifest.json";
  for (const auto& a : em.artifacts) out << ", " << a;
  out << ")\n";
  return status;
}

}  // namespace lrising
