#include "lrising/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "lrising/util.hpp"

namespace lrising {

std::string norm_name(Norm n) {
  switch (n) {
    case Norm::Euclidean: return "euclidean";
    case Norm::Sup: return "sup";
    case Norm::Taxicab: return "taxicab";
  }
  return "euclidean";
}

Norm norm_from_name(const std::string& s) {
  if (s == "euclidean") return Norm::Euclidean;
  if (s == "sup") return Norm::Sup;
  if (s == "taxicab") return Norm::Taxicab;
  throw std::invalid_argument("unknown norm: " + s);
}

double site_distance(const Site& a, const Site& b, Norm norm) {
  switch (norm) {
    case Norm::Euclidean: return l2_distance(a, b);
    case Norm::Sup: return static_cast<double>(linf_distance(a, b));
    case Norm::Taxicab: return static_cast<double>(l1_distance(a, b));
  }
  return l2_distance(a, b);
}

void CouplingSpec::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("coupling dim must be in [1, 4]");
  if (!(alpha > dim)) throw std::invalid_argument("coupling requires alpha > d");
  if (J < 0.0) throw std::invalid_argument("coupling J must be >= 0");
  if (r_cut <= 0.0) throw std::invalid_argument("coupling r_cut must be positive");
}

double coupling(const Site& x, const Site& y, const CouplingSpec& spec) {
  if (x == y) return 0.0;
  double r = site_distance(x, y, spec.norm);
  return spec.J * std::pow(r, -spec.alpha);
}

namespace {

// crude bound on the number of lattice sites per unit shell
double shell_constant(int d) { return 2.0 * d * std::pow(3.0, d - 1); }

}  // namespace

SummabilityReport summability_diagnostic(const CouplingSpec& spec, const std::vector<double>& radius_grid) {
  spec.validate();
  if (radius_grid.empty()) throw std::invalid_argument("summability needs a radius grid");
  for (size_t k = 1; k < radius_grid.size(); ++k)
    if (radius_grid[k] <= radius_grid[k - 1]) throw std::invalid_argument("radius grid must increase");

  int d = spec.dim;
  SummabilityReport rep;
  rep.radii = radius_grid;
  rep.partial_sums.assign(static_cast<size_t>(d), std::vector<double>(radius_grid.size(), 0.0));
  Site origin = Site::zero(d);
  rep.target = spec.J;  // J_{0, e_i}, unit distance in every norm

  double r_max = radius_grid.back();
  int reach = static_cast<int>(std::floor(r_max)) + 1;
  std::vector<int> cur(static_cast<size_t>(d), -reach);
  std::vector<double> tail_sums(static_cast<size_t>(d), 0.0);
  while (true) {
    Site x(cur);
    double r = site_distance(origin, x, spec.norm);
    if (r > 1.0 && r <= r_max) {
      double j = spec.J * std::pow(r, -spec.alpha);
      for (int i = 0; i < d; ++i) {
        double term = std::abs(static_cast<double>(x[i])) * j;
        for (size_t k = 0; k < radius_grid.size(); ++k)
          if (r <= radius_grid[k]) rep.partial_sums[static_cast<size_t>(i)][k] += term;
      }
    }
    int axis = 0;
    while (axis < d) {
      size_t a = static_cast<size_t>(axis);
      if (++cur[a] <= reach) break;
      cur[a] = -reach;
      ++axis;
    }
    if (axis == d) break;
  }

  // integral comparison: sum |x_i| |x|^{-alpha} behaves like r^{d - alpha} per
  // shell, so the series converges only when alpha > d + 1
  if (spec.alpha > d + 1) {
    double tail = spec.J * shell_constant(d) * std::pow(r_max, d + 1 - spec.alpha) / (spec.alpha - d - 1);
    double worst = 0.0;
    for (int i = 0; i < d; ++i) worst = std::max(worst, rep.partial_sums[static_cast<size_t>(i)].back());
    rep.limit_estimate = worst + tail;
    rep.verdict = rep.limit_estimate < rep.target ? SummabilityVerdict::ConvergesBelow
                                                  : SummabilityVerdict::ConvergesAbove;
  } else {
    double worst = 0.0;
    for (int i = 0; i < d; ++i) worst = std::max(worst, rep.partial_sums[static_cast<size_t>(i)].back());
    rep.limit_estimate = worst;
    rep.verdict = SummabilityVerdict::Diverging;
  }
  return rep;
}

BoundaryCondition BoundaryCondition::explicit_shell(std::map<Site, int8_t> spins) {
  for (const auto& [site, v] : spins)
    if (v != 1 && v != -1) throw std::invalid_argument("explicit shell spins must be +1 or -1");
  return {BcMode::Explicit, std::move(spins)};
}

int BoundaryCondition::spin_at(const Site& y) const {
  switch (mode) {
    case BcMode::Plus: return 1;
    case BcMode::Minus: return -1;
    case BcMode::Explicit: {
      auto it = shell.find(y);
      if (it == shell.end())
        throw std::runtime_error("explicit boundary shell does not cover site " + y.str());
      return it->second;
    }
  }
  return 1;
}

std::string BoundaryCondition::name() const {
  switch (mode) {
    case BcMode::Plus: return "plus";
    case BcMode::Minus: return "minus";
    case BcMode::Explicit: return "explicit";
  }
  return "plus";
}

FieldSpec FieldSpec::none() { return {}; }

FieldSpec FieldSpec::gaussian(double epsilon, uint64_t seed) {
  FieldSpec f;
  f.mode = Mode::GaussianIid;
  f.epsilon = epsilon;
  f.seed = seed;
  f.validate();
  return f;
}

FieldSpec FieldSpec::decaying(double h_star, double delta) {
  FieldSpec f;
  f.mode = Mode::Decaying;
  f.h_star = h_star;
  f.delta = delta;
  f.validate();
  return f;
}

double FieldSpec::amplitude() const {
  switch (mode) {
    case Mode::None: return 0.0;
    case Mode::GaussianIid: return epsilon;
    case Mode::Decaying: return 1.0;
  }
  return 0.0;
}

void FieldSpec::validate() const {
  if (mode == Mode::GaussianIid && epsilon < 0.0)
    throw std::invalid_argument("gaussian field epsilon must be >= 0");
  if (mode == Mode::Decaying) {
    if (h_star <= 0.0) throw std::invalid_argument("decaying field h_star must be positive");
    if (delta <= 0.0) throw std::invalid_argument("decaying field delta must be positive");
  }
}

uint64_t FieldRealization::hash() const {
  uint64_t h = fnv1a(values.data(), values.size() * sizeof(double));
  return splitmix64(h ^ seed ^ volume_hash);
}

std::string FieldRealization::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["volume_hash"] = volume_hash;
  j["values"] = values;
  return j.dump();
}

FieldRealization FieldRealization::from_json(const std::string& text, const Volume& volume) {
  nlohmann::json j = nlohmann::json::parse(text);
  FieldRealization h;
  h.seed = j.at("seed").get<uint64_t>();
  h.volume_hash = j.at("volume_hash").get<uint64_t>();
  h.values = j.at("values").get<std::vector<double>>();
  if (h.values.size() != volume.size()) throw std::invalid_argument("field realization size mismatch");
  if (h.volume_hash != volume.hash()) throw std::invalid_argument("field realization volume mismatch");
  return h;
}

FieldRealization sample_field(const FieldSpec& spec, const Volume& volume, uint64_t seed) {
  spec.validate();
  FieldRealization h;
  h.volume_hash = volume.hash();
  h.values.assign(volume.size(), 0.0);
  switch (spec.mode) {
    case FieldSpec::Mode::None:
      break;
    case FieldSpec::Mode::GaussianIid: {
      h.seed = seed;
      std::mt19937_64 gen(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& v : h.values) v = normal(gen);
      break;
    }
    case FieldSpec::Mode::Decaying: {
      Site origin = Site::zero(volume.dim());
      for (size_t i = 0; i < volume.size(); ++i) {
        const Site& x = volume.site(i);
        h.values[i] = (x == origin) ? spec.h_star : spec.h_star * std::pow(l2_distance(origin, x), -spec.delta);
      }
      break;
    }
  }
  return h;
}

FieldRealization zero_field(const Volume& volume) {
  FieldRealization h;
  h.volume_hash = volume.hash();
  h.values.assign(volume.size(), 0.0);
  return h;
}

SpinConfig::SpinConfig(std::shared_ptr<const Volume> vol, std::vector<int8_t> values)
    : volume(std::move(vol)), spins(std::move(values)) {
  if (!volume) throw std::invalid_argument("spin config needs a volume");
  if (spins.size() != volume->size()) throw std::invalid_argument("spin count must match volume");
  for (int8_t s : spins)
    if (s != 1 && s != -1) throw std::invalid_argument("spins must be +1 or -1");
}

SpinConfig SpinConfig::constant(std::shared_ptr<const Volume> vol, int8_t value) {
  size_t n = vol->size();
  return SpinConfig(std::move(vol), std::vector<int8_t>(n, value));
}

int8_t SpinConfig::at(const Site& s) const {
  auto idx = volume->index_of(s);
  if (!idx) throw std::out_of_range("site not in volume: " + s.str());
  return spins[*idx];
}

uint64_t SpinConfig::hash() const {
  uint64_t h = fnv1a(spins.data(), spins.size());
  return splitmix64(h ^ volume->hash());
}

BoundaryFieldResult boundary_field(const Site& x, const Volume& volume, const BoundaryCondition& bc,
                                   const CouplingSpec& spec) {
  spec.validate();
  if (!volume.contains(x)) throw std::invalid_argument("boundary field site must lie in the volume");
  BoundaryFieldResult out;
  int reach = static_cast<int>(std::floor(spec.r_cut));
  int d = volume.dim();
  std::vector<int> cur(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) cur[static_cast<size_t>(i)] = x[i] - reach;
  while (true) {
    Site y(cur);
    if (!volume.contains(y)) {
      double r = site_distance(x, y, spec.norm);
      if (r >= 1.0 && r <= spec.r_cut) out.value += coupling(x, y, spec) * bc.spin_at(y);
    }
    int axis = 0;
    while (axis < d) {
      size_t a = static_cast<size_t>(axis);
      if (++cur[a] <= x[axis] + reach) break;
      cur[a] = x[axis] - reach;
      ++axis;
    }
    if (axis == d) break;
  }
  out.tail_bound = boundary_tail_bound(spec);
  return out;
}

double boundary_tail_bound(const CouplingSpec& spec) {
  return spec.J * shell_constant(spec.dim) * std::pow(spec.r_cut, spec.dim - spec.alpha) / (spec.alpha - spec.dim);
}

CouplingTable::CouplingTable(const CouplingSpec& spec, std::shared_ptr<const Volume> volume,
                             const BoundaryCondition& bc)
    : spec_(spec), volume_(std::move(volume)), bc_(bc) {
  spec_.validate();
  if (!volume_ || volume_->empty()) throw std::invalid_argument("coupling table needs a non-empty volume");
  if (volume_->dim() != spec_.dim) throw std::invalid_argument("coupling table dimension mismatch");
  n_ = volume_->size();
  pair_.assign(n_ * n_, 0.0);
  for (size_t i = 0; i < n_; ++i)
    for (size_t j = i + 1; j < n_; ++j) {
      double v = coupling(volume_->site(i), volume_->site(j), spec_);
      pair_[i * n_ + j] = v;
      pair_[j * n_ + i] = v;
    }
  boundary_.resize(n_);
  boundary_tail_.resize(n_);
  for (size_t i = 0; i < n_; ++i) {
    BoundaryFieldResult r = boundary_field(volume_->site(i), *volume_, bc_, spec_);
    boundary_[i] = r.value;
    boundary_tail_[i] = r.tail_bound;
  }
}

namespace {

struct CacheHeader {
  char magic[4];
  uint32_t version;
  uint64_t volume_hash;
  uint64_t spec_hash;
  uint64_t bc_hash;
  uint64_t count;
};

uint64_t spec_hash_of(const CouplingSpec& s) {
  std::string key = std::to_string(s.dim) + "|" + format_double(s.alpha) + "|" + format_double(s.J) + "|" +
                    format_double(s.r_cut) + "|" + norm_name(s.norm);
  return fnv1a(key);
}

uint64_t bc_hash_of(const BoundaryCondition& bc) {
  uint64_t h = fnv1a(bc.name());
  for (const auto& [site, v] : bc.shell) {
    h = splitmix64(h ^ SiteHash{}(site));
    h = splitmix64(h ^ static_cast<uint64_t>(static_cast<int64_t>(v)));
  }
  return h;
}

}  // namespace

void CouplingTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open coupling cache for write: " + path);
  CacheHeader hdr{};
  std::memcpy(hdr.magic, "LRCT", 4);
  hdr.version = 1;
  hdr.volume_hash = volume_->hash();
  hdr.spec_hash = spec_hash_of(spec_);
  hdr.bc_hash = bc_hash_of(bc_);
  hdr.count = n_;
  out.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
  out.write(reinterpret_cast<const char*>(pair_.data()), static_cast<std::streamsize>(pair_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(boundary_.data()),
            static_cast<std::streamsize>(boundary_.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(boundary_tail_.data()),
            static_cast<std::streamsize>(boundary_tail_.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing coupling cache: " + path);
}

std::unique_ptr<CouplingTable> CouplingTable::load(const std::string& path, const CouplingSpec& spec,
                                                   std::shared_ptr<const Volume> volume,
                                                   const BoundaryCondition& bc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return nullptr;
  CacheHeader hdr{};
  in.read(reinterpret_cast<char*>(&hdr), sizeof(hdr));
  if (!in || std::memcmp(hdr.magic, "LRCT", 4) != 0 || hdr.version != 1) return nullptr;
  if (hdr.volume_hash != volume->hash() || hdr.spec_hash != spec_hash_of(spec) || hdr.bc_hash != bc_hash_of(bc))
    return nullptr;
  if (hdr.count != volume->size()) return nullptr;
  std::unique_ptr<CouplingTable> t(new CouplingTable());
  t->spec_ = spec;
  t->volume_ = std::move(volume);
  t->bc_ = bc;
  t->n_ = hdr.count;
  t->pair_.resize(t->n_ * t->n_);
  t->boundary_.resize(t->n_);
  t->boundary_tail_.resize(t->n_);
  in.read(reinterpret_cast<char*>(t->pair_.data()), static_cast<std::streamsize>(t->pair_.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(t->boundary_.data()),
          static_cast<std::streamsize>(t->boundary_.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(t->boundary_tail_.data()),
          static_cast<std::streamsize>(t->boundary_tail_.size() * sizeof(double)));
  if (!in) return nullptr;
  return t;
}

EnergyBreakdown energy(const SpinConfig& sigma, const CouplingTable& table, const FieldSpec& field,
                       const FieldRealization* h) {
  size_t n = sigma.size();
  if (&table.volume() != sigma.volume.get() && !(table.volume() == *sigma.volume))
    throw std::invalid_argument("energy: configuration volume does not match table");
  EnergyBreakdown e;
  for (size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (size_t j = i + 1; j < n; ++j) row += table.pair(i, j) * sigma.spins[j];
    e.bulk_pair -= sigma.spins[i] * row;
    e.boundary -= sigma.spins[i] * table.boundary_at(i);
  }
  double amp = field.amplitude();
  if (amp != 0.0) {
    if (!h) throw std::invalid_argument("energy: field realization required");
    if (h->values.size() != n) throw std::invalid_argument("energy: field realization size mismatch");
    for (size_t i = 0; i < n; ++i) e.field -= amp * h->values[i] * sigma.spins[i];
  }
  e.total = e.bulk_pair + e.boundary + e.field;
  return e;
}

double delta_energy_single_flip(const SpinConfig& sigma, size_t i, const CouplingTable& table,
                                const FieldSpec& field, const FieldRealization* h) {
  size_t n = sigma.size();
  if (i >= n) throw std::out_of_range("flip index out of range");
  double local = 0.0;
  for (size_t j = 0; j < n; ++j) local += table.pair(i, j) * sigma.spins[j];
  local += table.boundary_at(i);
  double amp = field.amplitude();
  if (amp != 0.0) {
    if (!h || h->values.size() != n) throw std::invalid_argument("delta energy: field realization required");
    local += amp * h->values[i];
  }
  return 2.0 * sigma.spins[i] * local;
}

SpinConfig apply_tau_A_spins(const SpinConfig& sigma, const Volume& A) {
  SpinConfig out = sigma;
  for (const Site& s : A.sites()) {
    auto idx = sigma.volume->index_of(s);
    if (idx) out.spins[*idx] = static_cast<int8_t>(-out.spins[*idx]);
  }
  return out;
}

FieldRealization apply_tau_A_field(const FieldRealization& h, const Volume& volume, const Volume& A) {
  if (h.values.size() != volume.size()) throw std::invalid_argument("tau_A field: size mismatch");
  FieldRealization out = h;
  for (const Site& s : A.sites()) {
    auto idx = volume.index_of(s);
    if (idx) out.values[*idx] = -out.values[*idx];
  }
  return out;
}

FlipEnergyResult flip_energy_difference(const SpinConfig& sigma, const SpinConfig& target,
                                        const CouplingTable& table, const FieldSpec& field,
                                        const FieldRealization* h) {
  if (sigma.size() != target.size()) throw std::invalid_argument("flip difference: size mismatch");
  FlipEnergyResult r;
  r.recomputed = energy(target, table, field, h).total - energy(sigma, table, field, h).total;
  SpinConfig cur = sigma;
  for (size_t i = 0; i < sigma.size(); ++i) {
    if (cur.spins[i] != target.spins[i]) {
      r.incremental += delta_energy_single_flip(cur, i, table, field, h);
      cur.spins[i] = target.spins[i];
    }
  }
  return r;
}

}  // namespace lrising
