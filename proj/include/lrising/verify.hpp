#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lrising/contours.hpp"
#include "lrising/exact.hpp"
#include "lrising/model.hpp"
#include "lrising/sampler.hpp"

namespace lrising {

enum class Verdict { Holds, Violated, Vacuous };

std::string verdict_name(Verdict v);

/// One checked inequality over a finite instance set. worst_margin keeps the
/// bound's own sign convention: margins >= 0 everywhere means the verdict
/// holds, and the witness constants are the extremal values that make the
/// inequality tight on the tested instances.
struct BoundReport {
  std::string name;
  size_t instances = 0;
  double worst_margin = 0.0;
  std::vector<std::string> witness_names;
  std::vector<double> witnesses;
  Verdict verdict = Verdict::Vacuous;
  std::string witness_instance;  // serialized extremal instance when violated
  std::string notes;             // margin convention and the tested-dimension gap
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_json() const;
  std::string to_table() const;
};

/// One (configuration, extracted contour) pair for the flip-energy check.
struct FlipInstance {
  SpinConfig sigma;
  Contour gamma;
  uint64_t config_index = 0;
};

/// Every contour of every configuration on the table's volume, one instance
/// per (sigma, contour) pair. Configurations without contours contribute
/// nothing. Scale-guarded like the exact engine.
std::vector<FlipInstance> exhaustive_flip_instances(const CouplingTable& table, const MarParams& params,
                                                    bool override_scale_guard = false);

/// Flipping a contour toward the boundary value must strictly lower the
/// energy, linearly in the contour size: checks
///   H(tau sigma) - H(sigma) <= -c (|gamma| + F_int + F_sp)
/// and reports the minimal witness c* over the instance set. Pass the number
/// of configurations the instances were drawn from; 0 falls back to the
/// distinct configurations present in the set.
BoundReport verify_flip_energy_bound(const std::vector<FlipInstance>& instances, const CouplingTable& table,
                                     uint64_t configurations_scanned = 0);

struct ConcentrationConfig {
  std::vector<double> lambdas;
  size_t replicas = 1000;
  double beta = 1.0;
  double epsilon = 0.5;
  uint64_t seed = 1;
  ExactOptions exact;
};

/// Gaussian-disorder tails of the flip statistic: empirical frequencies of
/// |Delta_A| >= lambda and |Delta_A - Delta_A'| > lambda against
/// 2 exp(-lambda^2 / (8 e^2 |A|)) and the |A symm-diff A'| variant, allowing
/// three binomial standard errors. A = A' makes the difference statistic
/// identically zero and that half vacuous-true.
BoundReport verify_concentration(const Volume& A, const Volume& A_prime, const CouplingTable& table,
                                 const ConcentrationConfig& cfg);

struct CountingConfig {
  std::vector<size_t> n_grid = {4, 6};
  std::vector<int> l_grid = {0, 1, 2};
  int dim = 2;
  int r_param = 2;  // scale multiplier of the second cube family; non-normative default
  double a_param = 1.0;
  int k_param = 1;
  MarParams params;
};

/// Census-backed counting bounds: box-cover counts B_l over the length-n
/// origin families, the minimal exponential-rate witnesses b4 and c4, and the
/// half-filled-cube boundary inequality with its minimal witnesses b and b'.
/// The exponential fits use the l >= 1 grid points; at l = 0 the printed rate
/// vanishes and the form only admits cover counts <= 1, so those points are
/// reported as rows but excluded from the fit.
BoundReport verify_counting(const CountingConfig& cfg);

struct DudleyConfig {
  std::vector<double> eps_grid;
  size_t replicas = 200;
  double beta = 1.0;
  double epsilon = 0.5;
  uint64_t seed = 1;
  int dyadic_levels = 16;
  ExactOptions exact;
};

/// Chaining estimate for E[sup over the family of Delta_{I_-}]: the metric is
/// the replica standard deviation of differences, covering numbers come from
/// a deterministic greedy, the entropy integral is the dyadic upper sum, and
/// the report carries the smallest L with E[sup] <= L * integral. A singleton
/// family degenerates to a mean-zero check.
BoundReport dudley_entropy_estimate(const std::vector<Contour>& family, const CouplingTable& table,
                                    const DudleyConfig& cfg);

struct PeierlsConfig {
  CouplingSpec spec;
  std::vector<double> betas = {0.5, 1.0, 2.0};
  std::vector<double> epsilons = {0.0};
  std::vector<std::vector<int>> volumes = {{3, 3}};
  size_t replicas = 16;
  uint64_t seed = 1;
  size_t exact_site_cap = 16;  // exact enumeration up to this size, chains beyond
  ChainConfig chain;
  ExactOptions exact;
};

/// Two-exponential tail of the origin minus probability under plus boundary:
/// P <= exp(-C' beta) + exp(-C' / eps^2). Estimates P per grid point (exact
/// where the volume allows, Metropolis otherwise, disorder-averaged for
/// eps > 0) and reports the largest C' honoring the bound everywhere. Exact
/// points are cross-checked against the generic Gibbs average to 1e-12.
BoundReport verify_peierls(const PeierlsConfig& cfg);

}  // namespace lrising
