#include <sstream>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "raglsa/analytic_loss.hpp"
#include "raglsa/moments.hpp"
#include "raglsa/montecarlo.hpp"
#include "raglsa/predictor.hpp"
#include "raglsa/sweep.hpp"

namespace py = pybind11;
using namespace raglsa;

namespace {

// Python-side configs are flat dicts using the same keys as config files.
KeyValues to_keys(const py::dict& d) {
  KeyValues kv;
  for (const auto& [k, v] : d) kv[py::str(k)] = py::str(v);
  return kv;
}

ExperimentConfig to_config(const py::dict& d) {
  const KeyValues kv = to_keys(d);
  for (const auto& [k, v] : kv)
    if (!is_config_key(k)) throw ConfigError("unknown key '" + k + "'");
  return validate(apply_config_keys({}, kv));
}

py::dict to_dict(const LossBreakdown& L) {
  py::dict out;
  out["variance"] = L.variance;
  out["bias"] = L.bias;
  out["irreducible"] = L.irreducible;
  out["total"] = L.total;
  if (L.standard_error) {
    out["variance_stderr"] = L.standard_error->variance;
    out["bias_stderr"] = L.standard_error->bias;
    out["total_stderr"] = L.standard_error->total;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = RAGLSA_VERSION;
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("fourth_moment_vec", &fourth_moment_vec, py::arg("W"));
  m.def("sixth_moment", &sixth_moment, py::arg("A"), py::arg("B"));
  m.def("isserlis_sixth_oracle", &isserlis_sixth_oracle, py::arg("A"), py::arg("B"));

  m.def(
      "optimal_pretrained_weight",
      [](std::size_t m_, std::size_t n, std::size_t d) { return optimal_pretrained_weight(m_, n, d).entries(); },
      py::arg("m"), py::arg("n"), py::arg("d"));

  m.def(
      "isotropic_loss",
      [](std::size_t m_, std::size_t n, std::size_t d, double delta2, double sigma2, double sigma2_rag,
         double beta_norm2) { return to_dict(isotropic_loss(m_, n, d, delta2, sigma2, sigma2_rag, beta_norm2)); },
      py::arg("m"), py::arg("n"), py::arg("d"), py::arg("delta2"), py::arg("sigma2"), py::arg("sigma2_rag"),
      py::arg("beta_norm2"));

  m.def(
      "regime_loss",
      [](const py::dict& config) {
        const ExperimentConfig c = to_config(config);
        return to_dict(regime_loss(optimal_pretrained_weight(c.m, c.n, c.d), c));
      },
      py::arg("config"), "Closed-form loss at W* for a config dict (config-file keys).");

  m.def(
      "estimate_loss",
      [](const py::dict& config, std::size_t workers) {
        const ExperimentConfig c = to_config(config);
        const WeightMatrix W = optimal_pretrained_weight(c.m, c.n, c.d);
        LossBreakdown L;
        {
          py::gil_scoped_release release;
          L = estimate_loss(W, c, McOptions{workers});
        }
        return to_dict(L);
      },
      py::arg("config"), py::arg("workers") = 1, "Monte Carlo loss at W* for a config dict.");

  m.def(
      "optimal_n",
      [](std::size_t m_, std::size_t d, double sigma2, double sigma2_rag, double beta_norm2, double delta2) {
        const OptimalN r = optimal_n(m_, d, sigma2, sigma2_rag, beta_norm2, delta2);
        py::dict out;
        out["n_star"] = r.n_star;
        out["stationary_point"] = r.real_root;
        out["loss_at_zero"] = r.loss_at_zero;
        out["loss_at_n_star"] = r.loss_at_star;
        out["improvement"] = r.improvement;
        out["grid_fallback"] = r.grid_fallback;
        return out;
      },
      py::arg("m"), py::arg("d"), py::arg("sigma2"), py::arg("sigma2_rag"), py::arg("beta_norm2"),
      py::arg("delta2") = 0.0);

  m.def(
      "sweep_csv",
      [](const py::dict& keys) {
        const SweepSpec spec = apply_sweep_keys({}, to_keys(keys));
        std::ostringstream os;
        write_csv(os, spec, run_sweep(spec));
        return os.str();
      },
      py::arg("keys"), "Runs a sweep (config keys plus axis/values/mode/workers) and returns the CSV text.");
}
