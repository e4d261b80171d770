#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lrising {

inline constexpr int kMaxDim = 4;

/// Lattice site in Z^d, d <= kMaxDim. Comparison is (dim, coords) lexicographic.
class Site {
 public:
  Site() = default;
  Site(std::initializer_list<int> coords);
  explicit Site(const std::vector<int>& coords);

  static Site zero(int dim);

  int dim() const { return dim_; }
  int operator[](int i) const { return c_[static_cast<size_t>(i)]; }
  int& operator[](int i) { return c_[static_cast<size_t>(i)]; }

  Site shifted(int axis, int delta) const;
  std::vector<int> coords() const;
  std::string str() const;

  friend auto operator<=>(const Site&, const Site&) = default;

 private:
  int dim_ = 0;
  std::array<int32_t, kMaxDim> c_{};
};

struct SiteHash {
  size_t operator()(const Site& s) const;
};

long l1_distance(const Site& a, const Site& b);
long linf_distance(const Site& a, const Site& b);
double l2_distance(const Site& a, const Site& b);

/// The 2d nearest neighbors of a site.
std::vector<Site> neighbors(const Site& s);

/// Finite sorted set of distinct sites sharing one dimension.
class Volume {
 public:
  Volume() = default;
  Volume(int dim, std::vector<Site> sites);

  /// Axis-aligned box containing the origin, roughly centered:
  /// axis i spans [-floor((L_i-1)/2), L_i - 1 - floor((L_i-1)/2)].
  static Volume box(const std::vector<int>& side_lengths);

  int dim() const { return dim_; }
  size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  const std::vector<Site>& sites() const { return sites_; }
  const Site& site(size_t i) const { return sites_[i]; }

  bool contains(const Site& s) const;
  std::optional<size_t> index_of(const Site& s) const;

  uint64_t hash() const;

  bool operator==(const Volume& other) const { return sites_ == other.sites_; }

 private:
  int dim_ = 0;
  std::vector<Site> sites_;
  std::unordered_map<Site, size_t, SiteHash> index_;
};

Volume volume_union(const Volume& a, const Volume& b);
Volume volume_difference(const Volume& a, const Volume& b);

/// C_m(x): the block prod_i [2^m x_i - 2^{m-1}, 2^m x_i + 2^{m-1}] on Z^d.
/// For m = 0 this degenerates to the single site {x}.
Volume m_cube(const Site& center, int scale);

/// Number of sites of an m-cube, (2^m + 1)^d for m >= 1 and 1 for m = 0.
size_t m_cube_size(int scale, int dim);

/// All cube centers x with s in C_l(x); up to 2^d centers when s sits on a
/// cube seam.
std::vector<Site> cubes_covering_site(const Site& s, int scale);

Volume exterior_boundary(const Volume& v);
Volume interior_boundary(const Volume& v);

struct IsoperimetricReport {
  double lhs = 0.0;  // |V|^{1-1/d}
  double rhs = 0.0;  // |interior boundary|
  bool holds = false;
};

IsoperimetricReport isoperimetric_check(const Volume& v);

/// Axis-aligned rectangle prod_i [anchor_i + 1, anchor_i + r_i].
struct Rectangle {
  Site anchor;
  std::vector<int> side_lengths;

  Rectangle(Site anchor_site, std::vector<int> lengths);
  explicit Rectangle(std::vector<int> lengths);

  int dim() const { return static_cast<int>(side_lengths.size()); }
  Volume sites() const;
  /// Face R_i = {x in R : x_i = anchor_i + 1}.
  Volume face(int axis) const;
  bool contains(const Site& s) const;
};

struct ProjectionReport {
  Volume projection;  // P_i
  Volume good;        // lines also meeting A \ R
  Volume bad;         // P_i \ good
  bool good_bound_holds = false;    // |P_good| <= |ext boundary of A within R|
  double bad_witness = 0.0;         // smallest C with |P_bad| <= C |R_d|
  double sum_witness = 0.0;         // smallest c with sum_i |P_i| <= c |...|
  bool sum_bound_holds = false;
  size_t boundary_in_rect = 0;
  size_t sum_all_axes = 0;
};

/// Axis projection of A through rectangle R along axis (0-based), with the
/// good/bad split and the three cardinality checks.
ProjectionReport projections(const Volume& A, const Rectangle& R, int axis);

std::string volume_to_json(const Volume& v);
Volume volume_from_json(const std::string& text);

}  // namespace lrising
