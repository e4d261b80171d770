#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "lrising/exact.hpp"
#include "lrising/sampler.hpp"
#include "lrising/util.hpp"

using namespace lrising;

namespace {

CouplingSpec spec2d(double r_cut = 8.0) { return CouplingSpec{2, 3.0, 1.0, r_cut, Norm::Euclidean}; }

struct Setup {
  std::shared_ptr<const Volume> vol;
  CouplingTable table;
  // short r_cut keeps the boundary pinning weak enough for chains to resolve
  Setup(std::vector<int> sides, BoundaryCondition bc, double r_cut = 8.0)
      : vol(std::make_shared<const Volume>(Volume::box(sides))), table(spec2d(r_cut), vol, bc) {}
};

ChainConfig quick_cfg(double beta, uint64_t seed) {
  ChainConfig cfg;
  cfg.beta = beta;
  cfg.sweeps = 6000;
  cfg.burn_in = 1000;
  cfg.thinning = 5;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("batch means statistics") {
  std::vector<double> constant(100, 0.7);
  BatchStats c = batch_means(constant);
  CHECK(c.mean == doctest::Approx(0.7));
  CHECK(c.std_error <= 1e-15);
  CHECK(c.batches == 30);
  CHECK(c.samples == 90);  // 30 batches of 3, remainder dropped

  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(2.0, 1.0);
  std::vector<double> iid(3000);
  for (auto& x : iid) x = normal(rng);
  BatchStats st = batch_means(iid);
  CHECK(st.mean == doctest::Approx(2.0).epsilon(0.05));
  // iid: batch-means error approximates sigma / sqrt(n) = 1/sqrt(3000)
  CHECK(st.std_error == doctest::Approx(1.0 / std::sqrt(3000.0)).epsilon(0.5));

  CHECK_THROWS_AS(batch_means({}), std::invalid_argument);
  BatchStats single = batch_means({1.5});
  CHECK(single.mean == 1.5);
  CHECK(single.std_error == 0.0);
}

TEST_CASE("chain config validation") {
  ChainConfig cfg;
  cfg.validate();
  cfg.burn_in = cfg.sweeps;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ChainConfig{};
  cfg.thinning = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ChainConfig{};
  cfg.beta = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("detailed balance holds in canonical log form") {
  Setup s({3, 3}, BoundaryCondition::plus());
  FieldSpec field = FieldSpec::gaussian(0.5, 13);
  FieldRealization h = sample_field(field, *s.vol, 13);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int8_t> spins(9);
    for (auto& x : spins) x = rng() & 1 ? 1 : -1;
    SpinConfig sigma(s.vol, spins);
    for (size_t i = 0; i < 9; ++i) {
      double gap = detailed_balance_gap(sigma, i, s.table, field, &h, 1.7);
      CHECK(std::fabs(gap) <= 1e-10);
    }
  }
}

TEST_CASE("uniform measure at beta zero") {
  Setup s({3, 3}, BoundaryCondition::plus());
  ObservableRecord rec = estimate_origin_minus(quick_cfg(0.0, 42), s.table, FieldSpec::none(), nullptr);
  CHECK(rec.std_error > 0.0);
  CHECK(std::fabs(rec.estimate - 0.5) <= 3.0 * rec.std_error);
  CHECK(rec.name == "origin_minus");
  CHECK(rec.seed == 42);
}

TEST_CASE("chain matches exact enumeration at moderate beta") {
  Setup s({3, 3}, BoundaryCondition::plus(), 1.5);
  double exact = site_minus_probability(Site{0, 0}, s.table, FieldSpec::none(), nullptr, 0.25);
  ObservableRecord rec = estimate_origin_minus(quick_cfg(0.25, 7), s.table, FieldSpec::none(), nullptr);
  CHECK(rec.std_error > 0.0);
  CHECK(std::fabs(rec.estimate - exact) <= 3.0 * rec.std_error);

  // rarer event at beta = 0.5 (P about 5e-3) needs a longer record
  ChainConfig long_cfg = quick_cfg(0.5, 7);
  long_cfg.sweeps = 101000;
  double exact_rare = site_minus_probability(Site{0, 0}, s.table, FieldSpec::none(), nullptr, 0.5);
  ObservableRecord rare = estimate_origin_minus(long_cfg, s.table, FieldSpec::none(), nullptr);
  CHECK(std::fabs(rare.estimate - exact_rare) <= 3.0 * rare.std_error);

  // with a frozen disorder realization as well
  FieldSpec field = FieldSpec::gaussian(0.4, 19);
  FieldRealization h = sample_field(field, *s.vol, 19);
  double exact_h = site_minus_probability(Site{0, 0}, s.table, field, &h, 0.25);
  ObservableRecord rec_h = estimate_origin_minus(quick_cfg(0.25, 8), s.table, field, &h);
  CHECK(std::fabs(rec_h.estimate - exact_h) <= 3.0 * rec_h.std_error);
}

TEST_CASE("identical seeds give bit-identical chains and records") {
  Setup s({4, 4}, BoundaryCondition::plus());
  MetropolisChain a(s.table, FieldSpec::none(), nullptr, 1.0, 77);
  MetropolisChain b(s.table, FieldSpec::none(), nullptr, 1.0, 77);
  for (int k = 0; k < 50; ++k) {
    a.sweep();
    b.sweep();
    REQUIRE(a.spins() == b.spins());
  }
  CHECK(a.accepted() == b.accepted());

  ObservableRecord r1 = estimate_origin_minus(quick_cfg(1.0, 5), s.table, FieldSpec::none(), nullptr);
  ObservableRecord r2 = estimate_origin_minus(quick_cfg(1.0, 5), s.table, FieldSpec::none(), nullptr);
  CHECK(r1.estimate == r2.estimate);
  CHECK(r1.std_error == r2.std_error);

  // different seeds diverge; random scan at beta 0 shuffles sites freely
  MetropolisChain c(s.table, FieldSpec::none(), nullptr, 0.0, 78, ScanOrder::Random);
  MetropolisChain d(s.table, FieldSpec::none(), nullptr, 0.0, 79, ScanOrder::Random);
  c.sweep();
  d.sweep();
  bool differs = c.spins() != d.spins();
  CHECK(differs);
}

TEST_CASE("random scan order also reaches equilibrium") {
  Setup s({3, 3}, BoundaryCondition::plus(), 1.5);
  ChainConfig cfg = quick_cfg(0.25, 23);
  cfg.scan = ScanOrder::Random;
  double exact = site_minus_probability(Site{0, 0}, s.table, FieldSpec::none(), nullptr, 0.25);
  ObservableRecord rec = estimate_origin_minus(cfg, s.table, FieldSpec::none(), nullptr);
  CHECK(std::fabs(rec.estimate - exact) <= 3.0 * rec.std_error);
}

TEST_CASE("minus boundary pins the origin down at large beta") {
  Setup s({3, 3}, BoundaryCondition::minus());
  ObservableRecord rec = estimate_origin_minus(quick_cfg(3.0, 31), s.table, FieldSpec::none(), nullptr);
  CHECK(rec.estimate > 0.9);
}

TEST_CASE("disorder ensemble records seeds and averages replicas") {
  Setup s({3, 3}, BoundaryCondition::plus());
  ChainConfig cfg = quick_cfg(1.0, 47);
  EnsembleResult ens = disorder_ensemble(cfg, s.table, 0.5, 8);
  REQUIRE(ens.replicas.size() == 8);
  REQUIRE(ens.field_seeds.size() == 8);
  for (size_t r = 0; r < 8; ++r) {
    CHECK(ens.field_seeds[r] == derive_seed(47, "field", r));
    CHECK(ens.replicas[r].seed == derive_seed(47, "chain", r));
  }
  double mean = 0.0;
  for (const auto& rec : ens.replicas) mean += rec.estimate;
  CHECK(ens.aggregate.estimate == doctest::Approx(mean / 8.0));
  CHECK(ens.aggregate.name == "origin_minus|disorder");

  // replay is exact
  EnsembleResult again = disorder_ensemble(cfg, s.table, 0.5, 8);
  CHECK(again.aggregate.estimate == ens.aggregate.estimate);
  CHECK(again.aggregate.std_error == ens.aggregate.std_error);

  CHECK_THROWS_AS(disorder_ensemble(cfg, s.table, 0.5, 0), std::invalid_argument);
}

TEST_CASE("constant observable collapses the ensemble error") {
  Setup s({3, 3}, BoundaryCondition::plus());
  ChainConfig cfg = quick_cfg(1.0, 53);
  EnsembleResult ens = disorder_ensemble(cfg, s.table, 0.3, 6, 1,
                                         [](const std::vector<int8_t>&) { return 1.0; }, "unit");
  CHECK(ens.aggregate.estimate == 1.0);
  CHECK(ens.aggregate.std_error == 0.0);
}

TEST_CASE("ensemble error shrinks with replica count") {
  Setup s({3, 3}, BoundaryCondition::plus(), 1.5);
  ChainConfig cfg = quick_cfg(0.3, 59);
  cfg.sweeps = 2200;
  cfg.burn_in = 200;
  double few = disorder_ensemble(cfg, s.table, 0.3, 8).aggregate.std_error;
  double many = disorder_ensemble(cfg, s.table, 0.3, 32).aggregate.std_error;
  CHECK(many < few);
}

TEST_CASE("stronger disorder lifts the minus probability under plus boundary") {
  Setup s({3, 3}, BoundaryCondition::plus(), 1.5);
  ChainConfig cfg = quick_cfg(0.4, 67);
  double weak = disorder_ensemble(cfg, s.table, 0.1, 32).aggregate.estimate;
  double strong = disorder_ensemble(cfg, s.table, 2.0, 32).aggregate.estimate;
  CHECK(strong > weak);
}

TEST_CASE("beta sweep emits symmetric grids") {
  auto vol = std::make_shared<const Volume>(Volume::box({3, 3}));
  ChainConfig tmpl = quick_cfg(1.0, 71);
  auto rows = beta_sweep(tmpl, spec2d(), vol, {0.7}, {0.0}, 1);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].bc == "plus");
  CHECK(rows[1].bc == "minus");
  CHECK(rows[0].beta == 0.7);
  // global flip symmetry: P+[minus] + P-[minus] = 1
  double joint = std::sqrt(rows[0].std_error * rows[0].std_error + rows[1].std_error * rows[1].std_error);
  CHECK(std::fabs(rows[0].estimate + rows[1].estimate - 1.0) <= 3.0 * joint);

  CHECK_THROWS_AS(beta_sweep(tmpl, spec2d(), vol, {}, {0.0}, 1), std::invalid_argument);
}

TEST_CASE("boundary gap grows with beta") {
  auto vol = std::make_shared<const Volume>(Volume::box({4, 4}));
  ChainConfig tmpl = quick_cfg(1.0, 83);
  auto rows = beta_sweep(tmpl, spec2d(1.5), vol, {0.2, 0.8}, {0.0}, 1);
  REQUIRE(rows.size() == 4);
  double gap_low = rows[1].estimate - rows[0].estimate;
  double gap_high = rows[3].estimate - rows[2].estimate;
  CHECK(gap_high > gap_low);
  CHECK(gap_high > 0.0);
}

TEST_CASE("sweep rows are reproducible across worker counts") {
  auto vol = std::make_shared<const Volume>(Volume::box({3, 3}));
  ChainConfig tmpl = quick_cfg(1.0, 91);
  tmpl.sweeps = 2200;
  tmpl.burn_in = 200;
  auto serial = beta_sweep(tmpl, spec2d(), vol, {0.5, 1.0}, {0.0, 0.3}, 3, 1);
  auto threaded = beta_sweep(tmpl, spec2d(), vol, {0.5, 1.0}, {0.0, 0.3}, 3, 4);
  REQUIRE(serial.size() == threaded.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].estimate == threaded[i].estimate);
    CHECK(serial[i].std_error == threaded[i].std_error);
    CHECK(serial[i].seed == threaded[i].seed);
  }
}
