#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lrising/geometry.hpp"
#include "lrising/model.hpp"

namespace lrising {

/// Thrown when a requested computation exceeds the desk-scale guards.
struct ScaleGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when no valid contour partition exists for the given parameters.
struct PartitionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dual face between nearest-neighbor sites with disagreeing spins. The
/// lexicographically smaller endpoint is stored first.
struct Face {
  Site a;
  Site b;

  Face() = default;
  Face(const Site& x, const Site& y);

  friend auto operator<=>(const Face&, const Face&) = default;
};

/// All disagreement faces of sigma, including faces crossing into the
/// boundary shell where the shell spin comes from bc.
std::vector<Face> spin_boundary(const SpinConfig& sigma, const BoundaryCondition& bc);

/// Separation parameters: clusters must satisfy
/// dist > M * min(max component diameter)^a, with at most 2^r - 1 components
/// per contour.
struct MarParams {
  double m_sep = 1.0;
  double a_exp = 1.0;
  int r_comp = 4;

  size_t component_cap() const { return (1ull << r_comp) - 1; }
  void validate() const;
};

struct Contour {
  std::vector<Face> faces;                      // sorted canonical order
  std::vector<std::vector<size_t>> components;  // face indices per connected component
  int label = 0;
  Volume support;  // face endpoints, shell sites included
  Volume interior_plus;
  Volume interior_minus;

  size_t length() const { return faces.size(); }
  Volume interior() const;
  Volume vertex_set() const;
  uint64_t key() const;
  std::string to_json() const;
};

struct ContourSet {
  std::vector<Contour> contours;
  std::string to_json() const;
};

/// Partition of the spin boundary into separation-respecting contours.
/// Components are merged bottom-up, nearest violating pair first, until the
/// separation requirement holds everywhere.
ContourSet extract_contours(const SpinConfig& sigma, const BoundaryCondition& bc, const MarParams& params);

/// Minimal l1 distance between the support sites of two contours.
double contour_metric(const Contour& a, const Contour& b);

struct DiameterReport {
  double diameter = 0.0;
  double witness_kd = 0.0;  // diameter / |V|^{1/d}
};

DiameterReport contour_diameter(const Contour& c, Norm norm = Norm::Euclidean);

/// Spin-flip transformation attached to a contour set. With target t:
/// spins keep their value on interiors labeled t and outside V(Gamma), are
/// negated on interiors labeled -t, and are set to t on the support region.
/// The printed form of the map is the t = -1 case.
SpinConfig apply_tau_gamma(const SpinConfig& sigma, const ContourSet& gamma, int target_label = -1);

/// The three disjoint site classes used by apply_tau_gamma, restricted to the
/// configuration volume.
struct TauRegions {
  Volume interior_plus;
  Volume interior_minus;
  Volume support_region;  // face-incident volume sites not in any interior
};

TauRegions tau_regions(const ContourSet& gamma, const Volume& volume);

enum class OriginRule { Interior, VertexSet };

/// Exhaustive census of distinct contours with n faces meeting the origin
/// rule, over all configurations on the box under the given boundary. The
/// box is capped at 20 sites unless the guard is overridden.
std::vector<Contour> enumerate_contours_origin(size_t n_faces, size_t max_components, const Volume& box,
                                               const MarParams& params, OriginRule rule,
                                               const BoundaryCondition& bc = BoundaryCondition::plus(),
                                               bool override_scale_guard = false);

/// Census by direct island enumeration: configurations that are minus on a
/// subset of the box (1 <= |subset| <= max_interior) and plus elsewhere
/// generate every contour whose interior fits in the box with at most
/// max_interior sites. Reaches face counts whose spin-walk census box would
/// exceed the enumeration guard.
std::vector<Contour> enumerate_contours_origin_subsets(size_t n_faces, size_t max_interior, const Volume& box,
                                                       const MarParams& params, OriginRule rule,
                                                       const BoundaryCondition& bc = BoundaryCondition::plus());

struct AdmissibleCubes {
  int scale = 0;
  std::vector<Site> centers;  // cubes at least half filled by the interior
  std::vector<std::pair<Site, Site>> boundary_pairs;  // (admissible, single-point neighbor not admissible)
};

AdmissibleCubes admissible_cubes(const Contour& c, int scale);

struct CubeCover {
  size_t family_count = 0;
  std::vector<size_t> per_contour;
};

/// Distinct scale-l cubes meeting at least one contour support in the family.
CubeCover cube_cover_count(const std::vector<Contour>& family, int scale);

/// Truncated coupling mass from a region into its complement:
/// sum_{x in A, y not in A, |x-y| <= r_cut} J_xy.
double region_surface_sum(const Volume& A, const CouplingSpec& spec);

struct SurfaceSums {
  double interior_plus = 0.0;
  double interior_minus = 0.0;
  double support = 0.0;
};

SurfaceSums surface_sums(const Contour& c, const CouplingSpec& spec);

/// Energy difference of applying tau_Gamma, recomputed and incremental.
FlipEnergyResult flip_energy_difference_tau(const SpinConfig& sigma, const ContourSet& gamma,
                                            const CouplingTable& table, const FieldSpec& field,
                                            const FieldRealization* h, int target_label);

}  // namespace lrising
