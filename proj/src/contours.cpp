#include "lrising/contours.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "lrising/util.hpp"

namespace lrising {

Face::Face(const Site& x, const Site& y) {
  if (l1_distance(x, y) != 1) throw std::invalid_argument("faces join nearest neighbors only");
  if (x < y) {
    a = x;
    b = y;
  } else {
    a = y;
    b = x;
  }
}

void MarParams::validate() const {
  if (m_sep <= 0.0) throw std::invalid_argument("separation factor M must be positive");
  if (a_exp <= 0.0) throw std::invalid_argument("separation exponent a must be positive");
  if (r_comp < 1 || r_comp > 20) throw std::invalid_argument("component exponent r must be in [1, 20]");
}

std::vector<Face> spin_boundary(const SpinConfig& sigma, const BoundaryCondition& bc) {
  const Volume& vol = *sigma.volume;
  std::vector<Face> faces;
  for (size_t i = 0; i < vol.size(); ++i) {
    const Site& x = vol.site(i);
    for (const Site& y : neighbors(x)) {
      auto j = vol.index_of(y);
      if (j) {
        if (x < y && sigma.spins[i] != sigma.spins[*j]) faces.emplace_back(x, y);
      } else if (static_cast<int>(sigma.spins[i]) != bc.spin_at(y)) {
        faces.emplace_back(x, y);
      }
    }
  }
  std::sort(faces.begin(), faces.end());
  return faces;
}

namespace {

struct DisjointSet {
  std::vector<size_t> parent;
  explicit DisjointSet(size_t n) : parent(n) {
    for (size_t i = 0; i < n; ++i) parent[i] = i;
  }
  size_t find(size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

std::vector<Site> face_endpoints(const std::vector<Face>& faces) {
  std::vector<Site> sites;
  sites.reserve(faces.size() * 2);
  for (const Face& f : faces) {
    sites.push_back(f.a);
    sites.push_back(f.b);
  }
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

long component_diameter_l1(const std::vector<Site>& sites) {
  long best = 0;
  for (size_t i = 0; i < sites.size(); ++i)
    for (size_t j = i + 1; j < sites.size(); ++j) best = std::max(best, l1_distance(sites[i], sites[j]));
  return best;
}

struct InteriorSplit {
  std::vector<std::pair<Volume, int>> groups;  // (sites, sign inside)
};

// flood fill from the boundary shell with this contour's faces removed;
// unreached volume sites form the interior
InteriorSplit find_interiors(const std::vector<Face>& faces, const SpinConfig& sigma) {
  const Volume& vol = *sigma.volume;
  Volume shell = exterior_boundary(vol);
  std::set<Face> cut(faces.begin(), faces.end());

  std::unordered_set<Site, SiteHash> nodes;
  for (const Site& s : vol.sites()) nodes.insert(s);
  for (const Site& s : shell.sites()) nodes.insert(s);

  std::unordered_set<Site, SiteHash> reached;
  std::queue<Site> frontier;
  for (const Site& s : shell.sites()) {
    reached.insert(s);
    frontier.push(s);
  }
  while (!frontier.empty()) {
    Site u = frontier.front();
    frontier.pop();
    for (const Site& v : neighbors(u)) {
      if (!nodes.count(v) || reached.count(v)) continue;
      if (cut.count(Face(u, v))) continue;
      reached.insert(v);
      frontier.push(v);
    }
  }

  std::vector<Site> inside;
  for (const Site& s : vol.sites())
    if (!reached.count(s)) inside.push_back(s);

  InteriorSplit out;
  if (inside.empty()) return out;

  std::set<Site> pending(inside.begin(), inside.end());
  while (!pending.empty()) {
    Site seed = *pending.begin();
    std::vector<Site> group;
    std::queue<Site> q;
    q.push(seed);
    pending.erase(seed);
    while (!q.empty()) {
      Site u = q.front();
      q.pop();
      group.push_back(u);
      for (const Site& v : neighbors(u)) {
        if (!pending.count(v)) continue;
        if (cut.count(Face(u, v))) continue;
        q.push(v);
        pending.erase(v);
      }
    }
    std::sort(group.begin(), group.end());
    // sign immediately inside: smallest group site incident to a cut face
    int sign = 0;
    for (const Site& s : group) {
      bool incident = false;
      for (const Site& n : neighbors(s))
        if (cut.count(Face(s, n))) {
          incident = true;
          break;
        }
      if (incident) {
        sign = sigma.at(s);
        break;
      }
    }
    if (sign == 0) sign = sigma.at(group.front());
    out.groups.emplace_back(Volume(vol.dim(), group), sign);
  }
  std::sort(out.groups.begin(), out.groups.end(),
            [](const auto& x, const auto& y) { return x.first.sites().front() < y.first.sites().front(); });
  return out;
}

Contour build_contour(std::vector<Face> faces, const std::vector<std::vector<size_t>>& comp_face_ids,
                      const std::vector<Face>& all_faces, const SpinConfig& sigma) {
  Contour c;
  std::sort(faces.begin(), faces.end());
  c.faces = std::move(faces);
  std::map<Face, size_t> pos;
  for (size_t i = 0; i < c.faces.size(); ++i) pos[c.faces[i]] = i;
  for (const auto& comp : comp_face_ids) {
    std::vector<size_t> ids;
    ids.reserve(comp.size());
    for (size_t fid : comp) ids.push_back(pos.at(all_faces[fid]));
    std::sort(ids.begin(), ids.end());
    c.components.push_back(std::move(ids));
  }
  std::sort(c.components.begin(), c.components.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });

  c.support = Volume(sigma.volume->dim(), face_endpoints(c.faces));

  InteriorSplit split = find_interiors(c.faces, sigma);
  std::vector<Site> plus_sites, minus_sites;
  for (const auto& [vol_group, sign] : split.groups) {
    auto& dst = sign > 0 ? plus_sites : minus_sites;
    dst.insert(dst.end(), vol_group.sites().begin(), vol_group.sites().end());
  }
  int d = sigma.volume->dim();
  if (!plus_sites.empty()) c.interior_plus = Volume(d, plus_sites);
  if (!minus_sites.empty()) c.interior_minus = Volume(d, minus_sites);

  if (!split.groups.empty()) {
    c.label = split.groups.front().second;
  } else {
    // no enclosed region: take the spin on the volume side of the first face
    const Face& f = c.faces.front();
    c.label = sigma.volume->contains(f.a) ? sigma.at(f.a) : sigma.at(f.b);
  }
  return c;
}

}  // namespace

Volume Contour::interior() const { return volume_union(interior_plus, interior_minus); }

Volume Contour::vertex_set() const { return volume_union(support, interior()); }

uint64_t Contour::key() const {
  std::ostringstream os;
  for (const Face& f : faces) os << f.a.str() << f.b.str();
  return fnv1a(os.str());
}

std::string Contour::to_json() const {
  nlohmann::json j;
  j["label"] = label;
  j["length"] = faces.size();
  nlohmann::json jf = nlohmann::json::array();
  for (const Face& f : faces) jf.push_back({f.a.coords(), f.b.coords()});
  j["faces"] = jf;
  j["components"] = components;
  j["support"] = nlohmann::json::parse(volume_to_json(support));
  j["interior_plus"] = nlohmann::json::parse(volume_to_json(interior_plus));
  j["interior_minus"] = nlohmann::json::parse(volume_to_json(interior_minus));
  return j.dump();
}

std::string ContourSet::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const Contour& c : contours) j.push_back(nlohmann::json::parse(c.to_json()));
  return j.dump();
}

ContourSet extract_contours(const SpinConfig& sigma, const BoundaryCondition& bc, const MarParams& params) {
  params.validate();
  std::vector<Face> faces = spin_boundary(sigma, bc);
  ContourSet out;
  if (faces.empty()) return out;

  // connected components: faces sharing an endpoint
  DisjointSet dsu(faces.size());
  std::unordered_map<Site, size_t, SiteHash> first_face_with;
  for (size_t i = 0; i < faces.size(); ++i) {
    for (const Site* s : {&faces[i].a, &faces[i].b}) {
      auto [it, fresh] = first_face_with.try_emplace(*s, i);
      if (!fresh) dsu.unite(i, it->second);
    }
  }
  std::map<size_t, std::vector<size_t>> by_root;
  for (size_t i = 0; i < faces.size(); ++i) by_root[dsu.find(i)].push_back(i);

  struct Component {
    std::vector<size_t> face_ids;
    std::vector<Site> sites;
    long diam = 0;
  };
  std::vector<Component> comps;
  for (auto& [root, ids] : by_root) {
    Component c;
    c.face_ids = std::move(ids);
    std::vector<Face> sub;
    for (size_t f : c.face_ids) sub.push_back(faces[f]);
    c.sites = face_endpoints(sub);
    c.diam = component_diameter_l1(c.sites);
    comps.push_back(std::move(c));
  }
  std::sort(comps.begin(), comps.end(),
            [](const Component& x, const Component& y) { return x.sites.front() < y.sites.front(); });

  // clusters of component ids; merge the closest violating pair until the
  // separation requirement holds
  std::vector<std::vector<size_t>> clusters;
  for (size_t i = 0; i < comps.size(); ++i) clusters.push_back({i});

  auto cluster_maxdiam = [&](const std::vector<size_t>& cl) {
    long m = 0;
    for (size_t c : cl) m = std::max(m, comps[c].diam);
    return m;
  };
  auto cluster_dist = [&](const std::vector<size_t>& x, const std::vector<size_t>& y) {
    long best = -1;
    for (size_t cx : x)
      for (size_t cy : y)
        for (const Site& sx : comps[cx].sites)
          for (const Site& sy : comps[cy].sites) {
            long d = l1_distance(sx, sy);
            if (best < 0 || d < best) best = d;
          }
    return best;
  };

  while (clusters.size() > 1) {
    long best_d = -1;
    size_t best_i = 0, best_j = 0;
    for (size_t i = 0; i < clusters.size(); ++i)
      for (size_t j = i + 1; j < clusters.size(); ++j) {
        long dist = cluster_dist(clusters[i], clusters[j]);
        double thr = params.m_sep *
                     std::pow(static_cast<double>(std::min(cluster_maxdiam(clusters[i]), cluster_maxdiam(clusters[j]))),
                              params.a_exp);
        if (static_cast<double>(dist) <= thr && (best_d < 0 || dist < best_d)) {
          best_d = dist;
          best_i = i;
          best_j = j;
        }
      }
    if (best_d < 0) break;
    auto& dst = clusters[best_i];
    dst.insert(dst.end(), clusters[best_j].begin(), clusters[best_j].end());
    std::sort(dst.begin(), dst.end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best_j));
  }

  for (auto& cl : clusters) {
    if (cl.size() > params.component_cap()) {
      std::ostringstream os;
      os << "no valid partition: a contour needs " << cl.size() << " components but 2^r - 1 = "
         << params.component_cap();
      throw PartitionError(os.str());
    }
    std::vector<Face> cl_faces;
    std::vector<std::vector<size_t>> cl_comp_ids;
    for (size_t c : cl) {
      cl_comp_ids.push_back(comps[c].face_ids);
      for (size_t f : comps[c].face_ids) cl_faces.push_back(faces[f]);
    }
    out.contours.push_back(build_contour(std::move(cl_faces), cl_comp_ids, faces, sigma));
  }
  std::sort(out.contours.begin(), out.contours.end(),
            [](const Contour& x, const Contour& y) { return x.support.sites().front() < y.support.sites().front(); });
  return out;
}

double contour_metric(const Contour& a, const Contour& b) {
  long best = -1;
  for (const Site& sx : a.support.sites())
    for (const Site& sy : b.support.sites()) {
      long d = l1_distance(sx, sy);
      if (best < 0 || d < best) best = d;
    }
  return best < 0 ? 0.0 : static_cast<double>(best);
}

DiameterReport contour_diameter(const Contour& c, Norm norm) {
  DiameterReport rep;
  Volume v = c.vertex_set();
  if (v.empty()) return rep;
  for (size_t i = 0; i < v.size(); ++i)
    for (size_t j = i + 1; j < v.size(); ++j)
      rep.diameter = std::max(rep.diameter, site_distance(v.site(i), v.site(j), norm));
  rep.witness_kd = rep.diameter / std::pow(static_cast<double>(v.size()), 1.0 / static_cast<double>(v.dim()));
  return rep;
}

TauRegions tau_regions(const ContourSet& gamma, const Volume& volume) {
  TauRegions out;
  std::vector<Site> plus, minus, support;
  for (const Contour& c : gamma.contours) {
    plus.insert(plus.end(), c.interior_plus.sites().begin(), c.interior_plus.sites().end());
    minus.insert(minus.end(), c.interior_minus.sites().begin(), c.interior_minus.sites().end());
    for (const Site& s : c.support.sites())
      if (volume.contains(s)) support.push_back(s);
  }
  int d = volume.dim();
  if (!plus.empty()) out.interior_plus = Volume(d, plus);
  if (!minus.empty()) out.interior_minus = Volume(d, minus);
  for (const Site& s : out.interior_plus.sites())
    if (out.interior_minus.contains(s))
      throw PartitionError("interior regions of opposite labels overlap at " + s.str());
  Volume interiors = volume_union(out.interior_plus, out.interior_minus);
  std::vector<Site> sp;
  for (const Site& s : support)
    if (!interiors.contains(s)) sp.push_back(s);
  if (!sp.empty()) out.support_region = Volume(d, sp);
  return out;
}

SpinConfig apply_tau_gamma(const SpinConfig& sigma, const ContourSet& gamma, int target_label) {
  if (target_label != 1 && target_label != -1)
    throw std::invalid_argument("tau_Gamma target label must be +1 or -1");
  if (gamma.contours.empty()) return sigma;
  TauRegions regions = tau_regions(gamma, *sigma.volume);
  const Volume& keep = target_label > 0 ? regions.interior_plus : regions.interior_minus;
  const Volume& flip = target_label > 0 ? regions.interior_minus : regions.interior_plus;
  (void)keep;
  SpinConfig out = sigma;
  for (size_t i = 0; i < out.size(); ++i) {
    const Site& s = sigma.volume->site(i);
    if (flip.contains(s))
      out.spins[i] = static_cast<int8_t>(-out.spins[i]);
    else if (regions.support_region.contains(s))
      out.spins[i] = static_cast<int8_t>(target_label);
  }
  return out;
}

std::vector<Contour> enumerate_contours_origin(size_t n_faces, size_t max_components, const Volume& box,
                                               const MarParams& params, OriginRule rule,
                                               const BoundaryCondition& bc, bool override_scale_guard) {
  params.validate();
  if (box.size() > 20 && !override_scale_guard)
    throw ScaleGuardError("contour census box has " + std::to_string(box.size()) +
                          " sites; the guard caps exhaustive enumeration at 20");
  if (box.size() > 26) throw ScaleGuardError("contour census box too large to enumerate");
  size_t cap = max_components == 0 ? params.component_cap() : max_components;
  Site origin = Site::zero(box.dim());

  auto vol = std::make_shared<const Volume>(box);
  size_t n = vol->size();
  std::map<std::string, Contour> found;
  std::vector<int8_t> spins(n, 1);
  for (uint64_t mask = 0; mask < (1ull << n); ++mask) {
    for (size_t i = 0; i < n; ++i) spins[i] = (mask >> i) & 1 ? 1 : -1;
    ContourSet set = extract_contours(SpinConfig(vol, spins), bc, params);
    for (Contour& c : set.contours) {
      if (c.length() != n_faces || c.components.size() > cap) continue;
      bool hit = rule == OriginRule::Interior ? c.interior().contains(origin) : c.vertex_set().contains(origin);
      if (!hit) continue;
      std::ostringstream os;
      for (const Face& f : c.faces) os << f.a.str() << f.b.str();
      found.emplace(os.str(), std::move(c));
    }
  }
  std::vector<Contour> out;
  out.reserve(found.size());
  for (auto& [k, c] : found) out.push_back(std::move(c));
  return out;
}

std::vector<Contour> enumerate_contours_origin_subsets(size_t n_faces, size_t max_interior, const Volume& box,
                                                       const MarParams& params, OriginRule rule,
                                                       const BoundaryCondition& bc) {
  params.validate();
  if (max_interior == 0) throw std::invalid_argument("max_interior must be positive");
  size_t n = box.size();
  if (max_interior > n) max_interior = n;
  double combos = 0.0;
  for (size_t k = 1, c = 1; k <= max_interior; ++k) {
    c = c * (n - k + 1) / k;
    combos += static_cast<double>(c);
  }
  if (combos > 5e6)
    throw ScaleGuardError("island census needs " + std::to_string(static_cast<uint64_t>(combos)) +
                          " subsets; the guard caps it at 5000000");
  Site origin = Site::zero(box.dim());
  auto vol = std::make_shared<const Volume>(box);
  std::map<std::string, Contour> found;
  std::vector<int8_t> spins(n, 1);
  std::vector<size_t> pick;
  for (size_t k = 1; k <= max_interior; ++k) {
    pick.resize(k);
    for (size_t i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::fill(spins.begin(), spins.end(), int8_t{1});
      for (size_t i : pick) spins[i] = -1;
      ContourSet set = extract_contours(SpinConfig(vol, spins), bc, params);
      for (Contour& c : set.contours) {
        if (c.length() != n_faces || c.components.size() > params.component_cap()) continue;
        bool hit = rule == OriginRule::Interior ? c.interior().contains(origin) : c.vertex_set().contains(origin);
        if (!hit) continue;
        std::ostringstream os;
        for (const Face& f : c.faces) os << f.a.str() << f.b.str();
        found.emplace(os.str(), std::move(c));
      }
      // next k-combination in lexicographic order
      size_t j = k;
      while (j > 0 && pick[j - 1] == n - k + (j - 1)) --j;
      if (j == 0) break;
      ++pick[j - 1];
      for (size_t i = j; i < k; ++i) pick[i] = pick[i - 1] + 1;
    }
  }
  std::vector<Contour> out;
  out.reserve(found.size());
  for (auto& [k, c] : found) out.push_back(std::move(c));
  return out;
}

AdmissibleCubes admissible_cubes(const Contour& c, int scale) {
  if (scale < 0) throw std::invalid_argument("cube scale must be >= 0");
  AdmissibleCubes out;
  out.scale = scale;
  Volume inter = c.interior();
  if (inter.empty()) return out;

  std::set<Site> candidates;
  for (const Site& s : inter.sites())
    for (const Site& center : cubes_covering_site(s, scale)) candidates.insert(center);

  size_t cube_n = m_cube_size(scale, inter.dim());
  std::set<Site> admissible;
  for (const Site& center : candidates) {
    Volume cube = m_cube(center, scale);
    size_t hits = 0;
    for (const Site& s : cube.sites())
      if (inter.contains(s)) ++hits;
    if (2 * hits >= cube_n) admissible.insert(center);
  }
  out.centers.assign(admissible.begin(), admissible.end());

  // neighbor cubes overlapping in exactly one site differ by 1 on every axis
  if (scale >= 1) {
    int d = inter.dim();
    std::vector<int> delta(static_cast<size_t>(d), -1);
    for (const Site& center : out.centers) {
      std::fill(delta.begin(), delta.end(), -1);
      while (true) {
        Site nb = center;
        for (int i = 0; i < d; ++i) nb[i] += delta[static_cast<size_t>(i)];
        if (!admissible.count(nb)) out.boundary_pairs.emplace_back(center, nb);
        int axis = 0;
        while (axis < d) {
          size_t a = static_cast<size_t>(axis);
          delta[a] += 2;  // values -1 and +1 only
          if (delta[a] <= 1) break;
          delta[a] = -1;
          ++axis;
        }
        if (axis == d) break;
      }
    }
  }
  return out;
}

CubeCover cube_cover_count(const std::vector<Contour>& family, int scale) {
  CubeCover out;
  std::set<Site> all;
  for (const Contour& c : family) {
    std::set<Site> mine;
    for (const Site& s : c.support.sites())
      for (const Site& center : cubes_covering_site(s, scale)) mine.insert(center);
    out.per_contour.push_back(mine.size());
    all.insert(mine.begin(), mine.end());
  }
  out.family_count = all.size();
  return out;
}

double region_surface_sum(const Volume& A, const CouplingSpec& spec) {
  spec.validate();
  if (A.empty()) return 0.0;
  if (A.dim() != spec.dim) throw std::invalid_argument("surface sum dimension mismatch");
  int reach = static_cast<int>(std::floor(spec.r_cut));
  double total = 0.0;
  int d = A.dim();
  for (const Site& x : A.sites()) {
    std::vector<int> cur(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) cur[static_cast<size_t>(i)] = x[i] - reach;
    while (true) {
      Site y(cur);
      if (!A.contains(y)) {
        double r = site_distance(x, y, spec.norm);
        if (r >= 1.0 && r <= spec.r_cut) total += coupling(x, y, spec);
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
  }
  return total;
}

SurfaceSums surface_sums(const Contour& c, const CouplingSpec& spec) {
  SurfaceSums out;
  out.interior_plus = region_surface_sum(c.interior_plus, spec);
  out.interior_minus = region_surface_sum(c.interior_minus, spec);
  out.support = region_surface_sum(c.support, spec);
  return out;
}

FlipEnergyResult flip_energy_difference_tau(const SpinConfig& sigma, const ContourSet& gamma,
                                            const CouplingTable& table, const FieldSpec& field,
                                            const FieldRealization* h, int target_label) {
  SpinConfig target = apply_tau_gamma(sigma, gamma, target_label);
  return flip_energy_difference(sigma, target, table, field, h);
}

}  // namespace lrising
