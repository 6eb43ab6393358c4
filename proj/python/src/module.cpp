#include <fstream>
#include <optional>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "accrete/error.hpp"
#include "accrete/fitstats.hpp"
#include "accrete/ingest.hpp"
#include "accrete/mixture.hpp"
#include "accrete/process.hpp"

namespace py = pybind11;
using namespace accrete;

namespace {

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::dict simulate_final(const ProcessParams& params, double horizon, double rate_r0, double growth_g,
                        std::uint64_t seed, std::optional<std::size_t> article_count,
                        unsigned threads) {
  CorpusSpec spec;
  spec.horizon = horizon;
  spec.rate = {growth_g > 0.0 ? RateModel::Kind::Exponential : RateModel::Kind::Constant, rate_r0,
               growth_g};
  spec.seed = seed;
  spec.article_count = article_count;
  std::vector<ArticleSeries> corpus;
  {
    py::gil_scoped_release release;
    corpus = simulate_corpus(params, spec, {Trajectory::Endpoints, threads});
  }
  std::vector<double> created, latent;
  std::vector<std::int64_t> counts;
  for (const auto& a : corpus) {
    created.push_back(a.creation_time);
    latent.push_back(a.final_latent());
    counts.push_back(a.final_count());
  }
  py::dict d;
  d["creation_time"] = to_array(created);
  d["latent"] = to_array(latent);
  d["counts"] = to_array(counts);
  return d;
}

py::dict gof(const py::array_t<double, py::array::c_style | py::array::forcecast>& values,
             double min_expected, int grid_divisions) {
  const std::vector<double> v = to_vector(values);
  GofOptions opts;
  opts.min_expected = min_expected;
  opts.grid_divisions = grid_divisions;
  const SliceFit f = gof_test(v, fit_slice(v), opts);
  py::dict d;
  d["mu"] = f.mu;
  d["sigma2"] = f.sigma2;
  d["n_bins"] = f.n_bins;
  d["dof"] = f.dof;
  d["g_statistic"] = f.g_statistic;
  d["p_value"] = f.testable ? py::cast(f.p_value) : py::none();
  return d;
}

py::list rollup_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open edit log " + path);
  const ParsedLog log = parse_log(in);
  py::list out;
  for (const auto& r : rollup(log.records)) {
    py::dict d;
    d["article_id"] = r.article_id;
    d["creation_time"] = r.creation_time;
    d["edit_count"] = r.edit_count;
    d["distinct_editors"] = r.distinct_editors;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Multiplicative edit accretion: simulation and lognormal statistics";

  static py::exception<Error> error(m, "AccreteError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<ProcessParams>(m, "ProcessParams")
      .def(py::init([](double drift_a, double noise_var_s2, double rho, double step_dt, double n0) {
             ProcessParams p{drift_a, noise_var_s2, rho, step_dt, n0};
             p.validate();
             return p;
           }),
           py::arg("drift_a"), py::arg("noise_var_s2"), py::arg("noise_autocorr_rho") = 0.0,
           py::arg("step_dt") = 1.0, py::arg("initial_edits_n0") = 1.0)
      .def_readwrite("drift_a", &ProcessParams::drift_a)
      .def_readwrite("noise_var_s2", &ProcessParams::noise_var_s2)
      .def_readwrite("noise_autocorr_rho", &ProcessParams::noise_autocorr_rho)
      .def_readwrite("step_dt", &ProcessParams::step_dt)
      .def_readwrite("initial_edits_n0", &ProcessParams::initial_edits_n0)
      .def("__repr__", [](const ProcessParams& p) {
        return "ProcessParams(drift_a=" + std::to_string(p.drift_a) +
               ", noise_var_s2=" + std::to_string(p.noise_var_s2) + ")";
      });

  m.def(
      "simulate_article",
      [](const ProcessParams& params, std::size_t n_steps, std::uint64_t seed) {
        const ArticleSeries s = simulate_article(params, n_steps, seed, Trajectory::Full);
        return py::make_tuple(to_array(s.latent), to_array(s.counts));
      },
      py::arg("params"), py::arg("n_steps"), py::arg("seed"),
      "Latent levels and rounded counts at each step, n_steps + 1 entries each.");

  m.def("simulate_final", &simulate_final, py::arg("params"), py::arg("horizon"),
        py::arg("rate_r0"), py::arg("growth_g") = 0.0, py::arg("seed") = 1,
        py::arg("article_count") = py::none(), py::arg("threads") = 1,
        "Creation times, final latent levels and final counts of a simulated corpus.");

  m.def(
      "theoretical_moments",
      [](const ProcessParams& p, double age) {
        const Moments mo = theoretical_moments(p, age);
        return py::make_tuple(mo.mu, mo.sigma2);
      },
      py::arg("params"), py::arg("age"));

  m.def(
      "fit_slice",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values) {
        const SliceFit f = fit_slice(to_vector(values));
        return py::make_tuple(f.mu, f.sigma2);
      },
      py::arg("values"));
  m.def("gof_test", &gof, py::arg("values"), py::arg("min_expected") = 8.0,
        py::arg("grid_divisions") = 5);

  m.def("lognormal_pdf", &lognormal_pdf, py::arg("n"), py::arg("mu"), py::arg("sigma2"));
  m.def(
      "mixture_pdf",
      [](double n, double drift_a, double noise_var_s2, double horizon_T, double growth_g, double n0,
         double age_floor) {
        MixtureSpec s;
        s.drift_a = drift_a;
        s.noise_var_s2 = noise_var_s2;
        s.horizon_T = horizon_T;
        s.growth_g = growth_g;
        s.n0 = n0;
        s.age_floor = age_floor;
        return mixture_pdf(n, s);
      },
      py::arg("n"), py::arg("drift_a"), py::arg("noise_var_s2"), py::arg("horizon_T"),
      py::arg("growth_g") = 0.0, py::arg("n0") = 1.0, py::arg("age_floor") = 1.0);

  m.def(
      "compare_fits",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& values, double cutoff) {
        const FitComparison c = compare_fits(to_vector(values), cutoff);
        py::dict d;
        d["cutoff"] = c.cutoff;
        d["tail_size"] = c.tail_size;
        d["lognormal_mu"] = c.lognormal_mu;
        d["lognormal_sigma2"] = c.lognormal_sigma2;
        d["powerlaw_alpha"] = c.powerlaw_alpha;
        d["loglik_difference"] = c.loglik_difference;
        return d;
      },
      py::arg("values"), py::arg("cutoff") = 0.0);

  m.def("rollup_file", &rollup_file, py::arg("path"),
        "Per-article edit totals of an edit-log TSV, without cleaning.");
}
