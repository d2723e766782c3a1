#include "mlsa/bias.hpp"
#include "mlsa/chain.hpp"
#include "mlsa/engine.hpp"
#include "mlsa/error.hpp"
#include "mlsa/extrapolation.hpp"
#include "mlsa/io.hpp"
#include "mlsa/problem.hpp"
#include "mlsa/sgd.hpp"
#include "mlsa/td.hpp"
#include "mlsa/version.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace mlsa;

namespace {

RunConfig run_config(double alpha, std::size_t K, std::uint64_t seed, const std::string& k0_policy,
                     std::size_t k0, std::optional<Vector> theta0, std::optional<std::size_t> x0,
                     double decay_power, std::vector<std::size_t> checkpoints) {
    RunConfig c;
    c.alpha = alpha;
    c.K = K;
    c.seed = seed;
    if (k0_policy == "half") {
        c.k0_policy = K0Policy::Half;
    } else if (k0_policy == "fixed") {
        c.k0_policy = K0Policy::Fixed;
    } else {
        throw Error(ErrorCode::InvalidParameter, "k0_policy must be 'half' or 'fixed'");
    }
    c.k0 = k0;
    c.theta0 = std::move(theta0);
    c.x0 = x0;
    c.decay_power = decay_power;
    c.checkpoints = std::move(checkpoints);
    return c;
}

NoiseModel noise_model(const std::string& name) {
    if (name == "zero") return NoiseModel::Zero;
    if (name == "iid-uniform") return NoiseModel::IidUniform;
    if (name == "sign-correlated") return NoiseModel::SignCorrelated;
    throw Error(ErrorCode::InvalidParameter, "unknown noise model " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Markovian linear stochastic approximation: simulation, exact bias and extrapolation";
    m.attr("__version__") = std::string(build_tag());

    py::exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object type = py::module_::import("mlsa._core").attr("Error");
            py::object instance = type(e.what());
            instance.attr("code") = std::string(to_string(e.code()));
            PyErr_SetObject(type.ptr(), instance.ptr());
        }
    });

    py::class_<FiniteChain>(m, "FiniteChain")
        .def_static("from_kernel", &FiniteChain::from_kernel, py::arg("P"), py::arg("label") = "")
        .def_property_readonly("size", &FiniteChain::size)
        .def_property_readonly("kernel", &FiniteChain::kernel)
        .def_property_readonly("stationary", &FiniteChain::stationary)
        .def_property_readonly("is_ergodic", &FiniteChain::is_ergodic)
        .def_property_readonly("label", &FiniteChain::label);

    m.def("random_ergodic_chain", &random_ergodic_chain, py::arg("n"), py::arg("seed"));
    m.def("interpolate_kernel", &interpolate_kernel, py::arg("chain"), py::arg("beta"));
    m.def("time_reversal", &time_reversal, py::arg("chain"));
    m.def(
        "mixing_time",
        [](const FiniteChain& chain, const LsaProblem& p, double eps, std::size_t k_max) {
            return mixing_time(chain, p.A, p.b, eps, k_max);
        },
        py::arg("chain"), py::arg("problem"), py::arg("eps"), py::arg("k_max") = kDefaultMixingCap);

    py::class_<SpectralReport>(m, "SpectralReport")
        .def_readonly("gap", &SpectralReport::gap)
        .def_readonly("slem", &SpectralReport::slem)
        .def_readonly("reversible", &SpectralReport::reversible)
        .def_readonly("detailed_balance_violation", &SpectralReport::detailed_balance_violation)
        .def_readonly("eigenvalues", &SpectralReport::eigenvalues);
    m.def("spectral_report", &spectral_report, py::arg("chain"));

    py::class_<LsaProblem>(m, "LsaProblem")
        .def_readonly("n", &LsaProblem::n)
        .def_readonly("d", &LsaProblem::d)
        .def_readonly("A", &LsaProblem::A)
        .def_readonly("b", &LsaProblem::b)
        .def_readonly("Abar", &LsaProblem::Abar)
        .def_readonly("bbar", &LsaProblem::bbar)
        .def_readonly("theta_star", &LsaProblem::theta_star)
        .def_readonly("A_max", &LsaProblem::A_max)
        .def_readonly("b_max", &LsaProblem::b_max)
        .def_readonly("scale", &LsaProblem::scale)
        .def_readonly("label", &LsaProblem::label);
    m.def("build_problem", &build_problem, py::arg("chain"), py::arg("A"), py::arg("b"),
          py::arg("normalize") = false, py::arg("label") = "");
    m.def("random_problem", &random_problem, py::arg("n"), py::arg("d"), py::arg("seed"));
    m.def("load_problem", &load_problem, py::arg("path"), py::arg("normalize") = false);

    py::class_<LyapunovCert>(m, "LyapunovCert")
        .def_readonly("Gamma", &LyapunovCert::Gamma)
        .def_readonly("gamma_min", &LyapunovCert::gamma_min)
        .def_readonly("gamma_max", &LyapunovCert::gamma_max)
        .def_readonly("kappa", &LyapunovCert::kappa)
        .def_readonly("residual", &LyapunovCert::residual);
    m.def("lyapunov_certificate", &lyapunov_certificate, py::arg("problem"));

    py::class_<AdmissibilityReport>(m, "AdmissibilityReport")
        .def_readonly("tau_alpha", &AdmissibilityReport::tau_alpha)
        .def_readonly("product", &AdmissibilityReport::product)
        .def_readonly("bound", &AdmissibilityReport::bound)
        .def_readonly("admissible", &AdmissibilityReport::admissible);
    m.def("stepsize_admissible",
          py::overload_cast<const LsaProblem&, const FiniteChain&, double>(&stepsize_admissible),
          py::arg("problem"), py::arg("chain"), py::arg("alpha"));
    m.def("largest_admissible_stepsize", &largest_admissible_stepsize, py::arg("problem"),
          py::arg("chain"), py::arg("alpha_hi") = 1e-2, py::arg("shrink") = 0.8);

    py::class_<TrajectorySummary>(m, "TrajectorySummary")
        .def_readonly("k", &TrajectorySummary::k)
        .def_readonly("k0", &TrajectorySummary::k0)
        .def_readonly("theta", &TrajectorySummary::theta)
        .def_readonly("theta_bar", &TrajectorySummary::theta_bar)
        .def_readonly("err_raw", &TrajectorySummary::err_raw)
        .def_readonly("err_ta", &TrajectorySummary::err_ta)
        .def_readonly("seed", &TrajectorySummary::seed)
        .def_readonly("alpha", &TrajectorySummary::alpha)
        .def_readonly("diverged", &TrajectorySummary::diverged)
        .def_readonly("diverged_at", &TrajectorySummary::diverged_at);
    m.def(
        "simulate",
        [](const LsaProblem& p, const FiniteChain& chain, double alpha, std::size_t K,
           std::uint64_t seed, const std::string& k0_policy, std::size_t k0,
           std::optional<Vector> theta0, std::optional<std::size_t> x0, double decay_power,
           std::vector<std::size_t> checkpoints) {
            const RunConfig c = run_config(alpha, K, seed, k0_policy, k0, std::move(theta0), x0,
                                           decay_power, std::move(checkpoints));
            py::gil_scoped_release release;
            return simulate(p, chain, c);
        },
        py::arg("problem"), py::arg("chain"), py::arg("alpha"), py::arg("K"), py::arg("seed") = 0,
        py::arg("k0_policy") = "half", py::arg("k0") = 0, py::arg("theta0") = py::none(),
        py::arg("x0") = py::none(), py::arg("decay_power") = 0.0,
        py::arg("checkpoints") = std::vector<std::size_t>{});
    m.def("log_checkpoints", &log_checkpoints, py::arg("K"), py::arg("per_decade") = 50);
    m.def(
        "plateau",
        [](const std::vector<std::size_t>& k, const std::vector<double>& v) { return plateau(k, v); },
        py::arg("k"), py::arg("values"));

    py::class_<CouplingSummary>(m, "CouplingSummary")
        .def_readonly("k", &CouplingSummary::k)
        .def_readonly("m", &CouplingSummary::m)
        .def_readonly("m0", &CouplingSummary::m0)
        .def_readonly("rho_hat", &CouplingSummary::rho_hat)
        .def_readonly("rho_se", &CouplingSummary::rho_se)
        .def_readonly("fit_points", &CouplingSummary::fit_points);
    m.def(
        "simulate_coupled",
        [](const LsaProblem& p, const FiniteChain& chain, double alpha, std::size_t K,
           std::uint64_t seed, std::size_t pairs, double radius, std::size_t fit_from) {
            CouplingConfig c;
            c.alpha = alpha;
            c.K = K;
            c.seed = seed;
            c.pairs = pairs;
            c.init = CouplingInit::Isotropic;
            c.radius = radius;
            c.fit_from = fit_from;
            py::gil_scoped_release release;
            return simulate_coupled(p, chain, c);
        },
        py::arg("problem"), py::arg("chain"), py::arg("alpha"), py::arg("K"), py::arg("seed") = 0,
        py::arg("pairs") = 1, py::arg("radius") = 1.0, py::arg("fit_from") = 0);

    py::class_<RrScheme>(m, "RrScheme")
        .def_readonly("alphas", &RrScheme::alphas)
        .def_readonly("h", &RrScheme::h)
        .def_readonly("sum_abs_h", &RrScheme::sum_abs_h)
        .def_readonly("cross_check_error", &RrScheme::cross_check_error);
    m.def(
        "rr_coefficients", [](const std::vector<double>& a) { return rr_coefficients(a); },
        py::arg("alphas"));
    m.def("rr_residual", &rr_residual, py::arg("scheme"));
    m.def(
        "rr_combine",
        [](const std::vector<Vector>& values, const RrScheme& s) { return rr_combine(values, s); },
        py::arg("values"), py::arg("scheme"));

    py::class_<StationarySolution>(m, "StationarySolution")
        .def_readonly("z", &StationarySolution::z)
        .def_readonly("mean", &StationarySolution::mean)
        .def_readonly("bias", &StationarySolution::bias)
        .def_readonly("residual", &StationarySolution::residual)
        .def_readonly("rcond", &StationarySolution::rcond);
    m.def("exact_stationary_mean", &exact_stationary_mean, py::arg("problem"), py::arg("chain"),
          py::arg("alpha"));

    py::class_<BiasExpansion>(m, "BiasExpansion")
        .def_readonly("B", &BiasExpansion::B)
        .def_readonly("Upsilon", &BiasExpansion::Upsilon)
        .def_readonly("xi_norm", &BiasExpansion::xi_norm)
        .def("truncated_bias", &BiasExpansion::truncated_bias, py::arg("alpha"), py::arg("m"));
    m.def("bias_expansion", &bias_expansion, py::arg("problem"), py::arg("chain"), py::arg("m"));
    m.def("infinite_series_mean", &infinite_series_mean, py::arg("expansion"), py::arg("problem"),
          py::arg("alpha"), py::arg("allow_outside") = false);

    py::class_<ZeroBiasReport>(m, "ZeroBiasReport")
        .def_readonly("holds", &ZeroBiasReport::holds)
        .def_readonly("max_violation", &ZeroBiasReport::max_violation)
        .def_readonly("violation", &ZeroBiasReport::violation);
    m.def("zero_bias_condition", &zero_bias_condition, py::arg("problem"), py::arg("chain"),
          py::arg("tol") = 1e-10);

    py::class_<ReversibleBoundRow>(m, "ReversibleBoundRow")
        .def_readonly("i", &ReversibleBoundRow::i)
        .def_readonly("norm_B", &ReversibleBoundRow::norm_B)
        .def_readonly("bound", &ReversibleBoundRow::bound)
        .def_readonly("satisfied", &ReversibleBoundRow::satisfied);
    py::class_<ReversibleBoundReport>(m, "ReversibleBoundReport")
        .def_readonly("C", &ReversibleBoundReport::C)
        .def_readonly("gap", &ReversibleBoundReport::gap)
        .def_readonly("rows", &ReversibleBoundReport::rows)
        .def("all_satisfied", &ReversibleBoundReport::all_satisfied);
    m.def("reversible_bias_bound", &reversible_bias_bound, py::arg("problem"), py::arg("chain"),
          py::arg("expansion"), py::arg("i_max"));

    py::class_<Mrp>(m, "Mrp")
        .def_readonly("nS", &Mrp::nS)
        .def_readonly("PS", &Mrp::PS)
        .def_readonly("r", &Mrp::r)
        .def_readonly("gamma", &Mrp::gamma)
        .def_readonly("label", &Mrp::label);
    py::class_<FeatureMap>(m, "FeatureMap").def_readonly("Phi", &FeatureMap::Phi);
    py::class_<TdInstance>(m, "TdInstance")
        .def_readonly("chain", &TdInstance::chain)
        .def_readonly("problem", &TdInstance::problem)
        .def_readonly("pairs", &TdInstance::pairs)
        .def_readonly("state_chain", &TdInstance::state_chain);
    py::class_<ProjectedFixedPoint>(m, "ProjectedFixedPoint")
        .def_readonly("theta_star", &ProjectedFixedPoint::theta_star)
        .def_readonly("V", &ProjectedFixedPoint::V)
        .def_readonly("value_error", &ProjectedFixedPoint::value_error);
    m.def("problematic_mrp", &problematic_mrp);
    m.def("polynomial_features", &polynomial_features, py::arg("nS"), py::arg("degree") = 2,
          py::arg("normalize_columns") = true);
    m.def("tabular_features", &tabular_features, py::arg("nS"));
    m.def("rescale_to_unit_ball", &rescale_to_unit_ball, py::arg("features"), py::arg("gamma"));
    m.def("value_function", &value_function, py::arg("mrp"));
    m.def("td_problem", &td_problem, py::arg("mrp"), py::arg("features"));
    m.def("semi_simulator_problem", &semi_simulator_problem, py::arg("mrp"));
    m.def("projected_fixed_point", &projected_fixed_point, py::arg("mrp"), py::arg("features"));

    m.def(
        "regression_target",
        [](const std::string& noise, const Vector& theta_reg) {
            return regression_target(noise_model(noise), theta_reg);
        },
        py::arg("noise"), py::arg("theta_reg"));
    m.def(
        "regression_run",
        [](const std::string& noise, double alpha, std::size_t K, std::uint64_t seed,
           std::optional<Vector> theta_reg, double decay_power) {
            RegressionConfig c;
            c.noise = noise_model(noise);
            if (theta_reg) c.theta_reg = *theta_reg;
            c.K = K;
            c.seed = seed;
            c.decay_power = decay_power;
            py::gil_scoped_release release;
            return regression_run(c, alpha);
        },
        py::arg("noise"), py::arg("alpha"), py::arg("K"), py::arg("seed") = 0,
        py::arg("theta_reg") = py::none(), py::arg("decay_power") = 0.0);
    m.def("ks_uniform", &ks_uniform, py::arg("samples"), py::arg("lo"), py::arg("hi"));
    m.def("ks_critical", &ks_critical, py::arg("n"), py::arg("level"));
}
