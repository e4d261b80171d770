#include "lrising/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lrising {

Site::Site(std::initializer_list<int> coords) {
  if (coords.size() == 0 || coords.size() > kMaxDim)
    throw std::invalid_argument("site dimension must be in [1, 4]");
  dim_ = static_cast<int>(coords.size());
  size_t i = 0;
  for (int v : coords) c_[i++] = v;
}

Site::Site(const std::vector<int>& coords) {
  if (coords.empty() || coords.size() > kMaxDim)
    throw std::invalid_argument("site dimension must be in [1, 4]");
  dim_ = static_cast<int>(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) c_[i] = coords[i];
}

Site Site::zero(int dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("bad dimension");
  Site s;
  s.dim_ = dim;
  return s;
}

Site Site::shifted(int axis, int delta) const {
  Site s = *this;
  s.c_[static_cast<size_t>(axis)] += delta;
  return s;
}

std::vector<int> Site::coords() const {
  return std::vector<int>(c_.begin(), c_.begin() + dim_);
}

std::string Site::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << c_[static_cast<size_t>(i)];
  os << ')';
  return os.str();
}

size_t SiteHash::operator()(const Site& s) const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<uint64_t>(s.dim()));
  for (int i = 0; i < s.dim(); ++i) mix(static_cast<uint64_t>(static_cast<uint32_t>(s[i])));
  return static_cast<size_t>(h);
}

long l1_distance(const Site& a, const Site& b) {
  long d = 0;
  for (int i = 0; i < a.dim(); ++i) d += std::labs(static_cast<long>(a[i]) - b[i]);
  return d;
}

long linf_distance(const Site& a, const Site& b) {
  long d = 0;
  for (int i = 0; i < a.dim(); ++i) d = std::max(d, std::labs(static_cast<long>(a[i]) - b[i]));
  return d;
}

double l2_distance(const Site& a, const Site& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    double t = static_cast<double>(a[i]) - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

std::vector<Site> neighbors(const Site& s) {
  std::vector<Site> out;
  out.reserve(static_cast<size_t>(2 * s.dim()));
  for (int i = 0; i < s.dim(); ++i) {
    out.push_back(s.shifted(i, -1));
    out.push_back(s.shifted(i, +1));
  }
  return out;
}

Volume::Volume(int dim, std::vector<Site> sites) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("bad volume dimension");
  for (const Site& s : sites)
    if (s.dim() != dim) throw std::invalid_argument("mixed dimensions in volume");
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  sites_ = std::move(sites);
  index_.reserve(sites_.size());
  for (size_t i = 0; i < sites_.size(); ++i) index_.emplace(sites_[i], i);
}

Volume Volume::box(const std::vector<int>& side_lengths) {
  int d = static_cast<int>(side_lengths.size());
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("bad box dimension");
  for (int L : side_lengths)
    if (L < 1) throw std::invalid_argument("box side must be positive");
  std::vector<Site> sites;
  std::vector<int> lo(static_cast<size_t>(d)), cur(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) lo[static_cast<size_t>(i)] = -((side_lengths[static_cast<size_t>(i)] - 1) / 2);
  cur = lo;
  while (true) {
    sites.push_back(Site(cur));
    int axis = 0;
    while (axis < d) {
      size_t a = static_cast<size_t>(axis);
      if (++cur[a] < lo[a] + side_lengths[a]) break;
      cur[a] = lo[a];
      ++axis;
    }
    if (axis == d) break;
  }
  return Volume(d, std::move(sites));
}

bool Volume::contains(const Site& s) const { return index_.count(s) > 0; }

std::optional<size_t> Volume::index_of(const Site& s) const {
  auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

uint64_t Volume::hash() const {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ull;
  };
  mix(static_cast<uint64_t>(dim_));
  for (const Site& s : sites_)
    for (int i = 0; i < dim_; ++i) mix(static_cast<uint64_t>(static_cast<uint32_t>(s[i])));
  return h;
}

Volume volume_union(const Volume& a, const Volume& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch in union");
  std::vector<Site> sites = a.sites();
  sites.insert(sites.end(), b.sites().begin(), b.sites().end());
  return Volume(a.dim(), std::move(sites));
}

Volume volume_difference(const Volume& a, const Volume& b) {
  if (a.empty() || b.empty()) return a;
  std::vector<Site> sites;
  for (const Site& s : a.sites())
    if (!b.contains(s)) sites.push_back(s);
  return Volume(a.dim(), std::move(sites));
}

Volume m_cube(const Site& center, int scale) {
  if (scale < 0) throw std::invalid_argument("cube scale must be >= 0");
  int d = center.dim();
  if (scale == 0) return Volume(d, {center});
  long step = 1L << scale;
  long half = 1L << (scale - 1);
  std::vector<int> lo(static_cast<size_t>(d)), lens(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    lo[static_cast<size_t>(i)] = static_cast<int>(step * center[i] - half);
    lens[static_cast<size_t>(i)] = static_cast<int>(2 * half + 1);
  }
  std::vector<Site> sites;
  sites.reserve(m_cube_size(scale, d));
  std::vector<int> cur = lo;
  while (true) {
    sites.push_back(Site(cur));
    int axis = 0;
    while (axis < d) {
      size_t a = static_cast<size_t>(axis);
      if (++cur[a] < lo[a] + lens[a]) break;
      cur[a] = lo[a];
      ++axis;
    }
    if (axis == d) break;
  }
  return Volume(d, std::move(sites));
}

size_t m_cube_size(int scale, int dim) {
  if (scale == 0) return 1;
  size_t side = (1ull << scale) + 1;
  size_t n = 1;
  for (int i = 0; i < dim; ++i) n *= side;
  return n;
}

std::vector<Site> cubes_covering_site(const Site& s, int scale) {
  int d = s.dim();
  if (scale == 0) return {s};
  long step = 1L << scale;
  long half = 1L << (scale - 1);
  // per axis: centers x with |s_i - step x_i| <= half
  std::vector<std::vector<int>> choices(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    long lo = static_cast<long>(std::ceil(static_cast<double>(s[i] - half) / static_cast<double>(step)));
    long hi = static_cast<long>(std::floor(static_cast<double>(s[i] + half) / static_cast<double>(step)));
    for (long x = lo; x <= hi; ++x) choices[static_cast<size_t>(i)].push_back(static_cast<int>(x));
  }
  std::vector<Site> out;
  std::vector<size_t> pick(static_cast<size_t>(d), 0);
  while (true) {
    std::vector<int> c(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) c[static_cast<size_t>(i)] = choices[static_cast<size_t>(i)][pick[static_cast<size_t>(i)]];
    out.push_back(Site(c));
    int axis = 0;
    while (axis < d) {
      size_t a = static_cast<size_t>(axis);
      if (++pick[a] < choices[a].size()) break;
      pick[a] = 0;
      ++axis;
    }
    if (axis == d) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

Volume exterior_boundary(const Volume& v) {
  if (v.empty()) return v;
  std::vector<Site> out;
  std::set<Site> seen;
  for (const Site& s : v.sites())
    for (const Site& n : neighbors(s))
      if (!v.contains(n) && seen.insert(n).second) out.push_back(n);
  return Volume(v.dim(), std::move(out));
}

Volume interior_boundary(const Volume& v) {
  if (v.empty()) return v;
  std::vector<Site> out;
  for (const Site& s : v.sites())
    for (const Site& n : neighbors(s))
      if (!v.contains(n)) {
        out.push_back(s);
        break;
      }
  return Volume(v.dim(), std::move(out));
}

IsoperimetricReport isoperimetric_check(const Volume& v) {
  IsoperimetricReport r;
  if (v.empty()) {
    r.holds = true;
    return r;
  }
  double n = static_cast<double>(v.size());
  r.lhs = std::pow(n, 1.0 - 1.0 / static_cast<double>(v.dim()));
  r.rhs = static_cast<double>(interior_boundary(v).size());
  r.holds = r.lhs <= r.rhs + 1e-12;
  return r;
}

Rectangle::Rectangle(Site anchor_site, std::vector<int> lengths)
    : anchor(anchor_site), side_lengths(std::move(lengths)) {
  if (anchor.dim() != dim()) throw std::invalid_argument("rectangle anchor dimension mismatch");
  for (int L : side_lengths)
    if (L < 1) throw std::invalid_argument("rectangle side must be positive");
}

Rectangle::Rectangle(std::vector<int> lengths) : anchor(), side_lengths(std::move(lengths)) {
  anchor = Site::zero(dim());
  for (int L : side_lengths)
    if (L < 1) throw std::invalid_argument("rectangle side must be positive");
}

Volume Rectangle::sites() const {
  int d = dim();
  std::vector<Site> out;
  std::vector<int> cur(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) cur[static_cast<size_t>(i)] = anchor[i] + 1;
  while (true) {
    out.push_back(Site(cur));
    int axis = 0;
    while (axis < d) {
      size_t a = static_cast<size_t>(axis);
      if (++cur[a] <= anchor[axis] + side_lengths[a]) break;
      cur[a] = anchor[axis] + 1;
      ++axis;
    }
    if (axis == d) break;
  }
  return Volume(d, std::move(out));
}

Volume Rectangle::face(int axis) const {
  Volume all = sites();
  std::vector<Site> out;
  for (const Site& s : all.sites())
    if (s[axis] == anchor[axis] + 1) out.push_back(s);
  return Volume(dim(), std::move(out));
}

bool Rectangle::contains(const Site& s) const {
  if (s.dim() != dim()) return false;
  for (int i = 0; i < dim(); ++i)
    if (s[i] < anchor[i] + 1 || s[i] > anchor[i] + side_lengths[static_cast<size_t>(i)]) return false;
  return true;
}

ProjectionReport projections(const Volume& A, const Rectangle& R, int axis) {
  int d = R.dim();
  if (axis < 0 || axis >= d) throw std::invalid_argument("projection axis out of range");
  if (!A.empty() && A.dim() != d) throw std::invalid_argument("projection dimension mismatch");

  // Bounding range of A along each axis, for the extended (good) lines.
  std::vector<int> alo(static_cast<size_t>(d), 0), ahi(static_cast<size_t>(d), -1);
  if (!A.empty()) {
    for (int i = 0; i < d; ++i) {
      alo[static_cast<size_t>(i)] = A.sites().front()[i];
      ahi[static_cast<size_t>(i)] = A.sites().front()[i];
    }
    for (const Site& s : A.sites())
      for (int i = 0; i < d; ++i) {
        alo[static_cast<size_t>(i)] = std::min(alo[static_cast<size_t>(i)], s[i]);
        ahi[static_cast<size_t>(i)] = std::max(ahi[static_cast<size_t>(i)], s[i]);
      }
  }

  auto line_hits = [&](const Site& base, bool restrict_to_rect) {
    // restrict_to_rect: walk the rectangle span; otherwise the full span of A.
    int from = restrict_to_rect ? R.anchor[axis] + 1 : std::min(alo[static_cast<size_t>(axis)], R.anchor[axis] + 1);
    int to = restrict_to_rect ? R.anchor[axis] + R.side_lengths[static_cast<size_t>(axis)]
                              : std::max(ahi[static_cast<size_t>(axis)], R.anchor[axis] + R.side_lengths[static_cast<size_t>(axis)]);
    std::pair<bool, bool> hits{false, false};  // (in A and R, in A \ R)
    for (int k = from; k <= to; ++k) {
      Site p = base;
      p[axis] = k;
      if (A.contains(p)) {
        if (R.contains(p))
          hits.first = true;
        else
          hits.second = true;
      }
    }
    return hits;
  };

  ProjectionReport rep;
  std::vector<Site> proj, good, bad;
  Volume face_sites = R.face(axis);
  for (const Site& x : face_sites.sites()) {
    // membership in P_i is decided by hits inside the rectangle; goodness by
    // the extended line meeting A \ R
    bool outside = line_hits(x, false).second;
    if (line_hits(x, true).first) {
      proj.push_back(x);
      if (outside)
        good.push_back(x);
      else
        bad.push_back(x);
    }
  }
  rep.projection = proj.empty() ? Volume() : Volume(d, proj);
  rep.good = good.empty() ? Volume() : Volume(d, good);
  rep.bad = bad.empty() ? Volume() : Volume(d, bad);

  // exterior boundary of A restricted to R
  size_t bnd = 0;
  if (!A.empty()) {
    Volume ext = exterior_boundary(A);
    for (const Site& s : ext.sites())
      if (R.contains(s)) ++bnd;
  }
  rep.boundary_in_rect = bnd;
  rep.good_bound_holds = rep.good.size() <= bnd;

  size_t face_last = R.face(d - 1).sites().size();
  rep.bad_witness = face_last ? static_cast<double>(rep.bad.size()) / static_cast<double>(face_last) : 0.0;

  size_t total = 0;
  for (int i = 0; i < d; ++i) {
    if (i == axis) {
      total += rep.projection.size();
      continue;
    }
    std::vector<Site> p;
    Volume face_i = R.face(i);
    for (const Site& x : face_i.sites()) {
      Site probe = x;
      bool hit = false;
      for (int k = R.anchor[i] + 1; k <= R.anchor[i] + R.side_lengths[static_cast<size_t>(i)] && !hit; ++k) {
        probe[i] = k;
        hit = A.contains(probe) && R.contains(probe);
      }
      if (hit) p.push_back(x);
    }
    total += p.size();
  }
  rep.sum_all_axes = total;
  if (bnd > 0) {
    rep.sum_witness = static_cast<double>(total) / static_cast<double>(bnd);
    rep.sum_bound_holds = true;
  } else {
    rep.sum_witness = 0.0;
    rep.sum_bound_holds = total == 0;
  }
  return rep;
}

std::string volume_to_json(const Volume& v) {
  nlohmann::json j = nlohmann::json::array();
  for (const Site& s : v.sites()) j.push_back(s.coords());
  return j.dump();
}

Volume volume_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_array() || j.empty()) throw std::invalid_argument("volume json must be a non-empty array");
  std::vector<Site> sites;
  int d = -1;
  for (const auto& e : j) {
    if (!e.is_array()) throw std::invalid_argument("volume entries must be coordinate arrays");
    std::vector<int> c;
    for (const auto& v : e) {
      if (!v.is_number_integer()) throw std::invalid_argument("volume coordinates must be integers");
      c.push_back(v.get<int>());
    }
    if (d < 0) d = static_cast<int>(c.size());
    if (static_cast<int>(c.size()) != d) throw std::invalid_argument("volume entries have mixed dimensions");
    sites.push_back(Site(c));
  }
  return Volume(d, std::move(sites));
}

}  // namespace lrising
