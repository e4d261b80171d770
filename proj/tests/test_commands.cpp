#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lrising/commands.hpp"

using namespace lrising;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("lrising_cmd_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

size_t line_count(const std::string& text) {
  size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

const char* kSmallConfig =
    R"({"model":{"d":2,"alpha":3.0,"r_cut":1.5},"volume":{"sides":[3,3]},
        "field":{"epsilon_grid":[0.0,0.3],"replicas":2},
        "run":{"beta_grid":[0.2,0.8],"seed":5,"sweeps":1500,"burn_in":500,"thinning":2}})";

int run(const std::string& command, const std::string& bound, RunOptions opts, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::ostringstream out, err;
  int status = run_command(command, bound, opts, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return status;
}

}  // namespace

TEST_CASE("verify peierls on the built-in config holds under strict") {
  fs::path dir = fresh_dir("peierls");
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.strict = true;
  std::string out;
  CHECK(run("verify", "peierls", opts, &out) == kExitOk);
  CHECK(out.find("verdict: holds") != std::string::npos);
  CHECK(out.find("8.76034698995335") != std::string::npos);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "verify_peierls.json"));
  CHECK(fs::exists(dir / "verify_peierls.csv"));
  CHECK(slurp(dir / "verify_peierls.json").find("\"verdict\": \"holds\"") != std::string::npos);
}

TEST_CASE("malformed config exits 2 with a position diagnostic") {
  fs::path dir = fresh_dir("badjson");
  put(dir / "bad.json", "{ \"model\": { bad\n");
  RunOptions opts;
  opts.config_path = (dir / "bad.json").string();
  opts.out_dir = (dir / "out").string();
  std::string err;
  CHECK(run("enumerate", "", opts, nullptr, &err) == kExitConfig);
  CHECK(err.find("line 1, column 14") != std::string::npos);
}

TEST_CASE("missing blocks and bad values exit 2") {
  fs::path dir = fresh_dir("badcfg");
  RunOptions opts;
  opts.out_dir = (dir / "out").string();

  put(dir / "m.json", R"({"volume":{"sides":[3,3]},"field":{"epsilon_grid":[0]},"run":{"beta_grid":[1]}})");
  opts.config_path = (dir / "m.json").string();
  std::string err;
  CHECK(run("enumerate", "", opts, nullptr, &err) == kExitConfig);
  CHECK(err.find("model") != std::string::npos);

  put(dir / "alpha.json",
      R"({"model":{"d":2,"alpha":1.0,"r_cut":1.5},"volume":{"sides":[3,3]},"field":{"epsilon_grid":[0]},"run":{"beta_grid":[1]}})");
  opts.config_path = (dir / "alpha.json").string();
  CHECK(run("enumerate", "", opts) == kExitConfig);  // alpha must exceed d

  put(dir / "sides.json",
      R"({"model":{"d":2,"alpha":3.0,"r_cut":1.5},"volume":{"sides":[3]},"field":{"epsilon_grid":[0]},"run":{"beta_grid":[1]}})");
  opts.config_path = (dir / "sides.json").string();
  CHECK(run("enumerate", "", opts) == kExitConfig);
}

TEST_CASE("exact-mode guard exits 3 and still writes the manifest") {
  fs::path dir = fresh_dir("guard");
  put(dir / "big.json",
      R"({"model":{"d":2,"alpha":3.0,"r_cut":1.5},"volume":{"sides":[6,5]},"field":{"epsilon_grid":[0]},"run":{"beta_grid":[0.5]}})");
  RunOptions opts;
  opts.config_path = (dir / "big.json").string();
  opts.out_dir = (dir / "out").string();
  std::string err;
  CHECK(run("enumerate", "", opts, nullptr, &err) == kExitScaleGuard);
  CHECK(err.find("override-scale-guard") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "manifest.json"));          // manifest-only artifact set
  CHECK_FALSE(fs::exists(dir / "out" / "enumerate.csv"));
}

TEST_CASE("strict turns a violated bound into exit 4") {
  // r_cut below the lattice spacing decouples the boundary; flipping the
  // all-minus configuration then costs exactly zero and the strict positivity
  // fails, honestly.
  fs::path dir = fresh_dir("violated");
  put(dir / "free.json",
      R"({"model":{"d":2,"alpha":3.0,"r_cut":0.5},"volume":{"sides":[3,3]},"field":{"epsilon_grid":[0]},"run":{"beta_grid":[0.5]}})");
  RunOptions opts;
  opts.config_path = (dir / "free.json").string();
  opts.out_dir = (dir / "out").string();
  std::string out;
  CHECK(run("verify", "flip-energy", opts, &out) == kExitOk);
  CHECK(out.find("verdict: violated") != std::string::npos);
  opts.strict = true;
  opts.out_dir = (dir / "out2").string();
  CHECK(run("verify", "flip-energy", opts) == kExitViolated);
}

TEST_CASE("sweep emits one row per grid point and reruns byte-identically") {
  fs::path dir = fresh_dir("sweep");
  put(dir / "cfg.json", kSmallConfig);
  RunOptions opts;
  opts.config_path = (dir / "cfg.json").string();
  std::string before = slurp(dir / "cfg.json");

  opts.out_dir = (dir / "a").string();
  REQUIRE(run("sweep", "", opts) == kExitOk);
  opts.out_dir = (dir / "b").string();
  REQUIRE(run("sweep", "", opts) == kExitOk);

  std::string a = slurp(dir / "a" / "sweep.csv");
  CHECK(a == slurp(dir / "b" / "sweep.csv"));
  CHECK(line_count(a) == 1 + 2 * 2 * 2);  // header + |betas| x |epsilons| x {plus, minus}
  CHECK(slurp(dir / "cfg.json") == before);  // inputs are never mutated
}

TEST_CASE("enumerate and sample row counts follow the grid") {
  fs::path dir = fresh_dir("rows");
  put(dir / "cfg.json", kSmallConfig);
  RunOptions opts;
  opts.config_path = (dir / "cfg.json").string();

  opts.out_dir = (dir / "e").string();
  REQUIRE(run("enumerate", "", opts) == kExitOk);
  // per beta: one zero-field row plus one row per disorder replica
  CHECK(line_count(slurp(dir / "e" / "enumerate.csv")) == 1 + 2 * (1 + 2));

  opts.out_dir = (dir / "s").string();
  REQUIRE(run("sample", "", opts) == kExitOk);
  // per beta: replicas zero-field chains, then replicas + aggregate under disorder
  CHECK(line_count(slurp(dir / "s" / "samples.csv")) == 1 + 2 * (2 + 3));
}

TEST_CASE("contours command writes the census table") {
  fs::path dir = fresh_dir("census");
  put(dir / "cfg.json", kSmallConfig);
  RunOptions opts;
  opts.config_path = (dir / "cfg.json").string();
  opts.out_dir = (dir / "out").string();
  REQUIRE(run("contours", "", opts) == kExitOk);
  std::string csv = slurp(dir / "out" / "census.csv");
  CHECK(csv.find("family,n,l,census,cover,rate") == 0);
  CHECK(csv.find("gamma0,4,0,1,5,-") != std::string::npos);
}

TEST_CASE("seed flag overrides the config and is echoed in the manifest") {
  fs::path dir = fresh_dir("seed");
  put(dir / "cfg.json", kSmallConfig);
  RunOptions opts;
  opts.config_path = (dir / "cfg.json").string();
  opts.out_dir = (dir / "out").string();
  opts.has_seed = true;
  opts.seed = 99;
  REQUIRE(run("sweep", "", opts) == kExitOk);
  std::string manifest = slurp(dir / "out" / "manifest.json");
  CHECK(manifest.find("\"seed\": 99") != std::string::npos);
  CHECK(manifest.find("\"version\": \"0.1.0\"") != std::string::npos);
  CHECK(manifest.find("\"config\"") != std::string::npos);
}

TEST_CASE("output root falls back to the environment variable") {
  fs::path dir = fresh_dir("envroot");
  put(dir / "cfg.json", kSmallConfig);
  fs::path root = dir / "from_env";
  setenv("LRISING_OUT", root.string().c_str(), 1);
  RunOptions opts;
  opts.config_path = (dir / "cfg.json").string();
  int status = run("contours", "", opts);
  unsetenv("LRISING_OUT");
  REQUIRE(status == kExitOk);
  CHECK(fs::exists(root / "census.csv"));
}

TEST_CASE("unknown commands and bounds exit 1") {
  RunOptions opts;
  opts.out_dir = (fresh_dir("usage")).string();
  CHECK(run("frobnicate", "", opts) == kExitUsage);
  CHECK(run("verify", "nope", opts) == kExitUsage);
}

TEST_CASE("verify reruns produce byte-identical reports") {
  fs::path dir = fresh_dir("det");
  RunOptions opts;
  opts.out_dir = (dir / "a").string();
  REQUIRE(run("verify", "counting", opts) == kExitOk);
  opts.out_dir = (dir / "b").string();
  REQUIRE(run("verify", "counting", opts) == kExitOk);
  CHECK(slurp(dir / "a" / "verify_counting.json") == slurp(dir / "b" / "verify_counting.json"));
  CHECK(slurp(dir / "a" / "verify_counting.csv") == slurp(dir / "b" / "verify_counting.csv"));
}
