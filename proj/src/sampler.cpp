#include "lrising/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "lrising/util.hpp"

namespace lrising {

void ChainConfig::validate() const {
  if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
  if (sweeps <= burn_in) throw std::invalid_argument("sweeps must exceed burn-in");
  if (thinning < 1) throw std::invalid_argument("thinning must be at least 1");
  if (batches < 1) throw std::invalid_argument("batches must be at least 1");
  if (recorded_samples() < 2) throw std::invalid_argument("fewer than two recorded samples");
}

BatchStats batch_means(const std::vector<double>& xs, size_t target_batches) {
  if (xs.empty()) throw std::invalid_argument("batch means needs samples");
  if (target_batches < 1) target_batches = 1;
  BatchStats st;
  size_t batches = std::min(target_batches, xs.size());
  size_t size = xs.size() / batches;
  size_t used = batches * size;
  double total = 0.0;
  std::vector<double> means(batches, 0.0);
  for (size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (size_t i = b * size; i < (b + 1) * size; ++i) s += xs[i];
    means[b] = s / static_cast<double>(size);
    total += s;
  }
  st.samples = used;
  st.batches = batches;
  st.mean = total / static_cast<double>(used);
  if (batches > 1) {
    double ss = 0.0;
    for (double m : means) ss += (m - st.mean) * (m - st.mean);
    st.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  }
  return st;
}

MetropolisChain::MetropolisChain(const CouplingTable& table, const FieldSpec& field,
                                 const FieldRealization* h, double beta, uint64_t seed, ScanOrder scan)
    : table_(&table), beta_(beta), rng_(seed), scan_(scan) {
  const Volume& vol = table.volume();
  size_t n = vol.size();
  if (n == 0) throw std::invalid_argument("chain needs a nonempty volume");
  double amp = field.amplitude();
  local_.resize(n);
  for (size_t i = 0; i < n; ++i) {
    local_[i] = table.boundary_at(i);
    if (h != nullptr && amp != 0.0) local_[i] += amp * h->values[i];
  }
  int8_t start = table.bc().mode == BcMode::Minus ? -1 : 1;
  spins_.assign(n, start);
}

double MetropolisChain::flip_delta(size_t i) const {
  double row = local_[i];
  size_t n = spins_.size();
  for (size_t j = 0; j < n; ++j) row += table_->pair(i, j) * spins_[j];
  return 2.0 * spins_[i] * row;
}

double MetropolisChain::uniform() {
  // 53 high bits -> [0, 1), fully specified arithmetic
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

void MetropolisChain::sweep() {
  size_t n = spins_.size();
  for (size_t step = 0; step < n; ++step) {
    size_t i = scan_ == ScanOrder::Lexicographic ? step : static_cast<size_t>(rng_() % n);
    double d_e = flip_delta(i);
    ++proposals_;
    bool accept = d_e <= 0.0 || uniform() < std::exp(-beta_ * d_e);
    if (accept) {
      spins_[i] = static_cast<int8_t>(-spins_[i]);
      ++accepted_;
    }
  }
}

double detailed_balance_gap(const SpinConfig& sigma, size_t i, const CouplingTable& table,
                            const FieldSpec& field, const FieldRealization* h, double beta) {
  if (i >= sigma.size()) throw std::invalid_argument("flip index outside the volume");
  double inc = delta_energy_single_flip(sigma, i, table, field, h);
  SpinConfig flipped = sigma;
  flipped.spins[i] = static_cast<int8_t>(-flipped.spins[i]);
  double before = energy(sigma, table, field, h).total;
  double after = energy(flipped, table, field, h).total;
  double forward = -beta * before + std::min(0.0, -beta * inc);
  double backward = -beta * after + std::min(0.0, beta * inc);
  return forward - backward;
}

ObservableRecord run_chain(const ChainConfig& cfg, const CouplingTable& table, const FieldSpec& field,
                           const FieldRealization* h, const std::string& name,
                           const std::function<double(const std::vector<int8_t>&)>& observable) {
  cfg.validate();
  MetropolisChain chain(table, field, h, cfg.beta, cfg.seed, cfg.scan);
  for (size_t s = 0; s < cfg.burn_in; ++s) chain.sweep();
  std::vector<double> samples;
  samples.reserve(cfg.recorded_samples());
  size_t recording = cfg.sweeps - cfg.burn_in;
  for (size_t s = 1; s <= recording; ++s) {
    chain.sweep();
    if (s % cfg.thinning == 0) samples.push_back(observable(chain.spins()));
  }
  BatchStats st = batch_means(samples, cfg.batches);
  ObservableRecord rec;
  rec.name = name;
  rec.estimate = st.mean;
  rec.std_error = st.std_error;
  rec.effective_samples = st.samples;
  rec.seed = cfg.seed;
  return rec;
}

ObservableRecord estimate_origin_minus(const ChainConfig& cfg, const CouplingTable& table,
                                       const FieldSpec& field, const FieldRealization* h) {
  auto idx = table.volume().index_of(Site::zero(table.volume().dim()));
  if (!idx) throw std::invalid_argument("origin outside the volume");
  size_t i = *idx;
  return run_chain(cfg, table, field, h, "origin_minus",
                   [i](const std::vector<int8_t>& spins) { return spins[i] < 0 ? 1.0 : 0.0; });
}

namespace {

void parallel_indices(size_t n, size_t workers, const std::function<void(size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) body(i);
    return;
  }
  size_t used = std::min(workers, n);
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (size_t w = 0; w < used; ++w)
    pool.emplace_back([&, w]() {
      for (size_t i = w; i < n; i += used) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

EnsembleResult disorder_ensemble(const ChainConfig& cfg, const CouplingTable& table, double epsilon,
                                 size_t n_replicas, size_t workers,
                                 const std::function<double(const std::vector<int8_t>&)>& observable,
                                 const std::string& name) {
  cfg.validate();
  if (n_replicas < 1) throw std::invalid_argument("ensemble needs at least one replica");
  if (epsilon < 0.0) throw std::invalid_argument("field amplitude must be nonnegative");
  EnsembleResult out;
  out.replicas.resize(n_replicas);
  out.field_seeds.resize(n_replicas);
  const Volume& vol = table.volume();
  auto origin_idx = vol.index_of(Site::zero(vol.dim()));
  std::function<double(const std::vector<int8_t>&)> f = observable;
  if (!f) {
    if (!origin_idx) throw std::invalid_argument("origin outside the volume");
    size_t i = *origin_idx;
    f = [i](const std::vector<int8_t>& spins) { return spins[i] < 0 ? 1.0 : 0.0; };
  }
  FieldSpec field = epsilon > 0.0 ? FieldSpec::gaussian(epsilon, cfg.seed) : FieldSpec::none();
  parallel_indices(n_replicas, workers, [&](size_t r) {
    uint64_t field_seed = derive_seed(cfg.seed, "field", r);
    out.field_seeds[r] = field_seed;
    ChainConfig local = cfg;
    local.seed = derive_seed(cfg.seed, "chain", r);
    if (epsilon > 0.0) {
      FieldRealization h = sample_field(field, vol, field_seed);
      out.replicas[r] = run_chain(local, table, field, &h, name, f);
    } else {
      out.replicas[r] = run_chain(local, table, field, nullptr, name, f);
    }
  });
  double mean = 0.0;
  for (const auto& rec : out.replicas) mean += rec.estimate;
  mean /= static_cast<double>(n_replicas);
  double ss = 0.0;
  for (const auto& rec : out.replicas) ss += (rec.estimate - mean) * (rec.estimate - mean);
  out.aggregate.name = name + "|disorder";
  out.aggregate.estimate = mean;
  out.aggregate.std_error =
      n_replicas > 1
          ? std::sqrt(ss / static_cast<double>(n_replicas - 1) / static_cast<double>(n_replicas))
          : out.replicas[0].std_error;
  out.aggregate.effective_samples = n_replicas;
  out.aggregate.seed = cfg.seed;
  return out;
}

std::vector<SweepRow> beta_sweep(const ChainConfig& tmpl, const CouplingSpec& spec,
                                 std::shared_ptr<const Volume> volume, const std::vector<double>& betas,
                                 const std::vector<double>& epsilons, size_t replicas, size_t workers) {
  tmpl.validate();
  if (betas.empty() || epsilons.empty()) throw std::invalid_argument("sweep grids must be nonempty");
  if (replicas < 1) throw std::invalid_argument("sweep needs at least one replica");
  CouplingTable plus(spec, volume, BoundaryCondition::plus());
  CouplingTable minus(spec, volume, BoundaryCondition::minus());

  struct Point {
    double beta, eps;
    const CouplingTable* table;
    const char* bc;
  };
  std::vector<Point> grid;
  for (double b : betas)
    for (double e : epsilons) {
      grid.push_back({b, e, &plus, "plus"});
      grid.push_back({b, e, &minus, "minus"});
    }

  std::vector<SweepRow> rows(grid.size());
  parallel_indices(grid.size(), workers, [&](size_t g) {
    const Point& pt = grid[g];
    ChainConfig cfg = tmpl;
    cfg.beta = pt.beta;
    cfg.seed = derive_seed(tmpl.seed, std::string("sweep:") + pt.bc, g);
    SweepRow row;
    row.beta = pt.beta;
    row.epsilon = pt.eps;
    row.bc = pt.bc;
    row.seed = cfg.seed;
    if (pt.eps > 0.0) {
      EnsembleResult ens = disorder_ensemble(cfg, *pt.table, pt.eps, replicas);
      row.estimate = ens.aggregate.estimate;
      row.std_error = ens.aggregate.std_error;
      row.replicas = replicas;
    } else {
      ObservableRecord rec = estimate_origin_minus(cfg, *pt.table, FieldSpec::none(), nullptr);
      row.estimate = rec.estimate;
      row.std_error = rec.std_error;
      row.replicas = 1;
    }
    rows[g] = row;
  });
  return rows;
}

}  // namespace lrising
