#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "lrising/commands.hpp"
#include "lrising/exact.hpp"
#include "lrising/sampler.hpp"
#include "lrising/verify.hpp"

namespace py = pybind11;
using namespace lrising;

namespace {

BoundaryCondition bc_from(const std::string& name) {
  if (name == "plus") return BoundaryCondition::plus();
  if (name == "minus") return BoundaryCondition::minus();
  throw std::invalid_argument("bc must be \"plus\" or \"minus\"");
}

std::vector<int8_t> to_spins(const std::vector<int>& raw, size_t want) {
  if (raw.size() != want) throw std::invalid_argument("spin vector length must match the volume");
  std::vector<int8_t> out;
  for (int v : raw) {
    if (v != 1 && v != -1) throw std::invalid_argument("spins must be +1 or -1");
    out.push_back(static_cast<int8_t>(v));
  }
  return out;
}

/// One volume + coupling table wrapped for python; exact quantities, contour
/// extraction and chain estimates hang off it.
struct Model {
  CouplingSpec spec;
  std::shared_ptr<const Volume> vol;
  std::string bc_name;
  std::unique_ptr<CouplingTable> table;

  Model(std::vector<int> sides, double alpha, double J, double r_cut, const std::string& bc)
      : bc_name(bc) {
    spec.dim = static_cast<int>(sides.size());
    spec.alpha = alpha;
    spec.J = J;
    spec.r_cut = r_cut;
    spec.validate();
    vol = std::make_shared<const Volume>(Volume::box(sides));
    table = std::make_unique<CouplingTable>(spec, vol, bc_from(bc));
  }

  size_t size() const { return vol->size(); }

  std::vector<std::vector<int>> sites() const {
    std::vector<std::vector<int>> out;
    for (const Site& s : vol->sites()) out.push_back(s.coords());
    return out;
  }

  Site origin() const {
    Site z = Site::zero(spec.dim);
    if (!vol->contains(z)) throw std::invalid_argument("volume does not contain the origin");
    return z;
  }

  double energy_total(const std::vector<int>& raw) const {
    SpinConfig sigma(vol, to_spins(raw, vol->size()));
    return energy(sigma, *table, FieldSpec::none(), nullptr).total;
  }

  double log_partition_at(double beta) const {
    return log_partition(*table, FieldSpec::none(), nullptr, beta).log_z;
  }

  double p_origin_minus(double beta) const {
    return site_minus_probability(origin(), *table, FieldSpec::none(), nullptr, beta);
  }

  double p_origin_minus_disordered(double beta, double epsilon, uint64_t seed) const {
    FieldSpec f = FieldSpec::gaussian(epsilon, seed);
    FieldRealization h = sample_field(f, *vol, seed);
    return site_minus_probability(origin(), *table, f, &h, beta);
  }

  double delta_region(const std::vector<std::vector<int>>& region, double beta, double epsilon,
                      uint64_t seed) const {
    std::vector<Site> sites;
    for (const auto& coords : region) sites.push_back(Site(coords));
    Volume A(spec.dim, sites);
    FieldSpec f = FieldSpec::gaussian(epsilon, seed);
    FieldRealization h = sample_field(f, *vol, seed);
    return delta_A(A, h, *table, f, beta).value;
  }

  py::list contours_of(const std::vector<int>& raw) const {
    SpinConfig sigma(vol, to_spins(raw, vol->size()));
    ContourSet set = extract_contours(sigma, bc_from(bc_name), MarParams{});
    py::list out;
    for (const Contour& g : set.contours) {
      py::dict d;
      d["faces"] = g.length();
      d["label"] = g.label;
      d["components"] = g.components.size();
      d["interior"] = g.interior().size();
      d["support"] = g.support.size();
      out.append(d);
    }
    return out;
  }

  py::dict chain_estimate(double beta, size_t sweeps, size_t burn_in, size_t thinning, uint64_t seed) const {
    ChainConfig cfg;
    cfg.beta = beta;
    cfg.sweeps = sweeps;
    cfg.burn_in = burn_in;
    cfg.thinning = thinning;
    cfg.seed = seed;
    ObservableRecord rec = estimate_origin_minus(cfg, *table, FieldSpec::none(), nullptr);
    py::dict d;
    d["estimate"] = rec.estimate;
    d["std_error"] = rec.std_error;
    d["effective_samples"] = rec.effective_samples;
    return d;
  }
};

size_t origin_census(size_t n_faces, const std::vector<int>& box_sides) {
  Volume box = Volume::box(box_sides);
  return enumerate_contours_origin(n_faces, 0, box, MarParams{}, OriginRule::Interior).size();
}

py::dict run_cli(const std::string& command, const std::string& bound, const std::string& config_path,
                 const std::string& out_dir, py::object seed, size_t workers, bool strict,
                 bool override_scale_guard) {
  RunOptions opts;
  opts.config_path = config_path;
  opts.out_dir = out_dir;
  if (!seed.is_none()) {
    opts.has_seed = true;
    opts.seed = seed.cast<uint64_t>();
  }
  opts.workers = workers;
  opts.strict = strict;
  opts.override_scale_guard = override_scale_guard;
  std::ostringstream out, err;
  int status = run_command(command, bound, opts, out, err);
  py::dict d;
  d["status"] = status;
  d["stdout"] = out.str();
  d["stderr"] = err.str();
  return d;
}

}  // namespace

PYBIND11_MODULE(lrising, m) {
  m.doc() = "long-range Ising desk-scale simulation and bound verification";

  py::class_<Model>(m, "Model")
      .def(py::init<std::vector<int>, double, double, double, const std::string&>(), py::arg("sides"),
           py::arg("alpha") = 3.0, py::arg("J") = 1.0, py::arg("r_cut") = 8.0, py::arg("bc") = "plus")
      .def("__len__", &Model::size)
      .def("sites", &Model::sites)
      .def("energy", &Model::energy_total, py::arg("spins"))
      .def("log_partition", &Model::log_partition_at, py::arg("beta"))
      .def("p_origin_minus", &Model::p_origin_minus, py::arg("beta"))
      .def("p_origin_minus_disordered", &Model::p_origin_minus_disordered, py::arg("beta"),
           py::arg("epsilon"), py::arg("seed"))
      .def("delta_region", &Model::delta_region, py::arg("region"), py::arg("beta"), py::arg("epsilon"),
           py::arg("seed"))
      .def("contours", &Model::contours_of, py::arg("spins"))
      .def("chain_estimate", &Model::chain_estimate, py::arg("beta"), py::arg("sweeps") = 11000,
           py::arg("burn_in") = 1000, py::arg("thinning") = 10, py::arg("seed") = 1);

  m.def("origin_census", &origin_census, py::arg("n_faces"), py::arg("box_sides"),
        "number of origin-interior contours with exactly n_faces faces");
  m.def("default_config", &default_config_json, "built-in desk-scale experiment config (JSON text)");
  m.def("run", &run_cli, py::arg("command"), py::arg("bound") = "", py::arg("config") = "",
        py::arg("out") = "", py::arg("seed") = py::none(), py::arg("workers") = 0,
        py::arg("strict") = false, py::arg("override_scale_guard") = false,
        "dispatch one CLI command; returns {status, stdout, stderr}");

  m.attr("EXIT_OK") = kExitOk;
  m.attr("EXIT_CONFIG") = kExitConfig;
  m.attr("EXIT_SCALE_GUARD") = kExitScaleGuard;
  m.attr("EXIT_VIOLATED") = kExitViolated;
  m.attr("__version__") = kVersion;
}
