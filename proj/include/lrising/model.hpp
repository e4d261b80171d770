#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lrising/geometry.hpp"

namespace lrising {

enum class Norm { Euclidean, Sup, Taxicab };

std::string norm_name(Norm n);
Norm norm_from_name(const std::string& s);

double site_distance(const Site& a, const Site& b, Norm norm);

/// Pair couplings J |x-y|^{-alpha}, truncated beyond r_cut when interactions
/// with the complement of a volume are summed.
struct CouplingSpec {
  int dim = 2;
  double alpha = 3.0;
  double J = 1.0;
  double r_cut = 8.0;
  Norm norm = Norm::Euclidean;

  void validate() const;
};

/// J_xy; zero on the diagonal.
double coupling(const Site& x, const Site& y, const CouplingSpec& spec);

enum class SummabilityVerdict { ConvergesBelow, ConvergesAbove, Diverging };

struct SummabilityReport {
  std::vector<double> radii;
  // partial_sums[i][k]: sum_{1 < |x| <= R_k} |x_i| J_{0,x}
  std::vector<std::vector<double>> partial_sums;
  double target = 0.0;  // J_{0,e_i}
  double limit_estimate = 0.0;
  SummabilityVerdict verdict = SummabilityVerdict::Diverging;
};

/// Partial sums of sum_x |x_i| J_{0,x} against J_{0,e_i}, with an
/// integral-comparison verdict. The sum converges only for alpha > d + 1.
SummabilityReport summability_diagnostic(const CouplingSpec& spec, const std::vector<double>& radius_grid);

enum class BcMode { Plus, Minus, Explicit };

struct BoundaryCondition {
  BcMode mode = BcMode::Plus;
  std::map<Site, int8_t> shell;  // used only in Explicit mode

  static BoundaryCondition plus() { return {BcMode::Plus, {}}; }
  static BoundaryCondition minus() { return {BcMode::Minus, {}}; }
  static BoundaryCondition explicit_shell(std::map<Site, int8_t> spins);

  /// eta_y for a complement site. Explicit mode throws if y is not covered.
  int spin_at(const Site& y) const;
  std::string name() const;
};

struct FieldSpec {
  enum class Mode { None, GaussianIid, Decaying };
  Mode mode = Mode::None;
  double epsilon = 0.0;   // gaussian coupling strength
  uint64_t seed = 0;      // gaussian base seed
  double h_star = 0.0;    // decaying amplitude
  double delta = 1.0;     // decaying exponent

  static FieldSpec none();
  static FieldSpec gaussian(double epsilon, uint64_t seed);
  static FieldSpec decaying(double h_star, double delta);

  /// Multiplier in front of h_x sigma_x: epsilon for the gaussian mode, 1 for
  /// the deterministic decaying profile.
  double amplitude() const;
  void validate() const;
};

/// Field values aligned with the volume's site order.
struct FieldRealization {
  std::vector<double> values;
  uint64_t seed = 0;
  uint64_t volume_hash = 0;

  uint64_t hash() const;
  std::string to_json() const;
  static FieldRealization from_json(const std::string& text, const Volume& volume);
};

FieldRealization sample_field(const FieldSpec& spec, const Volume& volume, uint64_t seed);
FieldRealization zero_field(const Volume& volume);

struct SpinConfig {
  std::shared_ptr<const Volume> volume;
  std::vector<int8_t> spins;  // +1 / -1, aligned with volume order

  SpinConfig() = default;
  SpinConfig(std::shared_ptr<const Volume> vol, std::vector<int8_t> values);
  static SpinConfig constant(std::shared_ptr<const Volume> vol, int8_t value);

  size_t size() const { return spins.size(); }
  int8_t at(const Site& s) const;
  uint64_t hash() const;
};

struct BoundaryFieldResult {
  double value = 0.0;       // sum over complement sites within r_cut
  double tail_bound = 0.0;  // integral-comparison bound on the truncated tail
};

/// b_x = sum_{y not in volume, |y-x| <= r_cut} J_xy eta_y.
BoundaryFieldResult boundary_field(const Site& x, const Volume& volume, const BoundaryCondition& bc,
                                   const CouplingSpec& spec);

/// Magnitude bound c r_cut^{d-alpha} on the dropped |y-x| > r_cut tail under
/// uniform eta.
double boundary_tail_bound(const CouplingSpec& spec);

/// Precomputed pair couplings and boundary fields for one volume.
class CouplingTable {
 public:
  CouplingTable(const CouplingSpec& spec, std::shared_ptr<const Volume> volume, const BoundaryCondition& bc);

  const CouplingSpec& spec() const { return spec_; }
  const Volume& volume() const { return *volume_; }
  std::shared_ptr<const Volume> volume_ptr() const { return volume_; }
  const BoundaryCondition& bc() const { return bc_; }

  double pair(size_t i, size_t j) const { return pair_[i * n_ + j]; }
  double boundary_at(size_t i) const { return boundary_[i]; }
  double boundary_tail_at(size_t i) const { return boundary_tail_[i]; }

  void save(const std::string& path) const;
  /// Loads a cache written by save(); returns nullptr on any key mismatch.
  static std::unique_ptr<CouplingTable> load(const std::string& path, const CouplingSpec& spec,
                                             std::shared_ptr<const Volume> volume, const BoundaryCondition& bc);

 private:
  CouplingTable() = default;
  CouplingSpec spec_;
  std::shared_ptr<const Volume> volume_;
  BoundaryCondition bc_;
  size_t n_ = 0;
  std::vector<double> pair_;
  std::vector<double> boundary_;
  std::vector<double> boundary_tail_;
};

struct EnergyBreakdown {
  double bulk_pair = 0.0;
  double boundary = 0.0;
  double field = 0.0;
  double total = 0.0;
};

/// Finite-volume energy. Bulk pairs are counted once per unordered pair; the
/// random-field term enters as -amplitude * sum_x h_x sigma_x.
EnergyBreakdown energy(const SpinConfig& sigma, const CouplingTable& table, const FieldSpec& field,
                       const FieldRealization* h);

/// Energy change from flipping the spin at volume index i.
double delta_energy_single_flip(const SpinConfig& sigma, size_t i, const CouplingTable& table,
                                const FieldSpec& field, const FieldRealization* h);

SpinConfig apply_tau_A_spins(const SpinConfig& sigma, const Volume& A);
FieldRealization apply_tau_A_field(const FieldRealization& h, const Volume& volume, const Volume& A);

struct FlipEnergyResult {
  double recomputed = 0.0;   // energy(after) - energy(before)
  double incremental = 0.0;  // accumulated single-flip deltas
};

/// Energy difference for an arbitrary target configuration reached from
/// sigma, evaluated both ways.
FlipEnergyResult flip_energy_difference(const SpinConfig& sigma, const SpinConfig& target,
                                        const CouplingTable& table, const FieldSpec& field,
                                        const FieldRealization* h);

}  // namespace lrising
