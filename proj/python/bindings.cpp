#include "uotkit/error.hpp"
#include "uotkit/fixtures.hpp"
#include "uotkit/measures.hpp"
#include "uotkit/metrics.hpp"
#include "uotkit/objective.hpp"
#include "uotkit/oracle.hpp"
#include "uotkit/pathology_correlation.hpp"
#include "uotkit/stain_optics.hpp"
#include "uotkit/transport_cycle.hpp"
#include "uotkit/uot_solver.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;
using namespace uotkit;

namespace {

using Image = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;
using Plane = py::array_t<double, py::array::c_style | py::array::forcecast>;

RgbImage to_image(const Image& a) {
    require(a.ndim() == 3 && a.shape(2) == 3, ErrorCode::invalid_argument, "expected an H x W x 3 uint8 array");
    RgbImage img(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
    std::memcpy(img.pixels.data(), a.data(), img.pixels.size());
    return img;
}

Image from_image(const RgbImage& img) {
    Image a({img.height, img.width, std::size_t{3}});
    std::memcpy(a.mutable_data(), img.pixels.data(), img.pixels.size());
    return a;
}

OdMap to_od(const Plane& a) {
    require(a.ndim() == 2, ErrorCode::invalid_argument, "expected an H x W float array");
    OdMap m(static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(0)));
    std::memcpy(m.values.data(), a.data(), m.values.size() * sizeof(double));
    return m;
}

Plane from_od(const OdMap& m) {
    require(m.channels == 1, ErrorCode::invalid_argument, "expected a single-channel map");
    Plane a({m.height, m.width});
    std::memcpy(a.mutable_data(), m.values.data(), m.values.size() * sizeof(double));
    return a;
}

StainMatrix stains_or_default(const std::optional<Eigen::Matrix3d>& s) {
    return s ? StainMatrix::normalized(*s) : StainMatrix::h_dab();
}

SolverConfig make_config(double epsilon, std::optional<double> tau, int max_iter, double tol, bool anneal,
                         int anneal_stages) {
    SolverConfig cfg;
    cfg.epsilon = epsilon;
    cfg.tau = tau;
    cfg.max_iter = max_iter;
    cfg.tol = tol;
    cfg.anneal = anneal;
    cfg.anneal_stages = anneal_stages;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Entropic unbalanced transport, stain optics and pathology losses";

    py::register_exception<Error>(m, "UotkitError", PyExc_ValueError);

    m.attr("DEFAULT_EPSILON") = default_epsilon;
    m.attr("DEFAULT_TAU") = default_tau;
    m.attr("DEFAULT_LAMBDA_TCYC") = default_lambda_tcyc;
    m.attr("DEFAULT_LAMBDA_CC") = default_lambda_cc;
    m.attr("DEFAULT_NCE_TEMPERATURE") = default_nce_temperature;

    py::class_<TransportPlan>(m, "TransportPlan")
        .def_readonly("plan", &TransportPlan::plan)
        .def_readonly("u", &TransportPlan::u)
        .def_readonly("v", &TransportPlan::v)
        .def_readonly("iterations", &TransportPlan::iterations)
        .def_readonly("converged", &TransportPlan::converged)
        .def_readonly("objective", &TransportPlan::objective);

    m.def(
        "solve",
        [](const Matrix& cost, const Vector& p, const Vector& q, double epsilon, std::optional<double> tau,
           int max_iter, double tol, bool anneal, int anneal_stages) {
            return solve(CostMatrix(cost), DiscreteMeasure(p), DiscreteMeasure(q),
                         make_config(epsilon, tau, max_iter, tol, anneal, anneal_stages));
        },
        py::arg("cost"), py::arg("p"), py::arg("q"), py::arg("epsilon") = default_epsilon,
        py::arg("tau") = std::optional<double>(default_tau), py::arg("max_iter") = default_max_iter,
        py::arg("tol") = default_tol, py::arg("anneal") = false, py::arg("anneal_stages") = 10,
        "Entropic transport plan. tau=None gives balanced transport.");

    m.def(
        "primal_objective",
        [](const Matrix& plan, const Matrix& cost, const Vector& p, const Vector& q, double epsilon,
           std::optional<double> tau) {
            SolverConfig cfg;
            cfg.epsilon = epsilon;
            cfg.tau = tau;
            return primal_objective(plan, CostMatrix(cost), DiscreteMeasure(p), DiscreteMeasure(q), cfg);
        },
        py::arg("plan"), py::arg("cost"), py::arg("p"), py::arg("q"), py::arg("epsilon") = default_epsilon,
        py::arg("tau") = std::optional<double>(default_tau));

    m.def(
        "lp_balanced",
        [](const Matrix& cost, const Vector& p, const Vector& q) {
            const OracleResult r = lp_balanced(CostMatrix(cost), DiscreteMeasure(p), DiscreteMeasure(q));
            return py::make_tuple(r.objective, r.plan);
        },
        py::arg("cost"), py::arg("p"), py::arg("q"), "Exact balanced optimum: (cost, plan).");

    m.def(
        "uot_dense_search",
        [](const Matrix& cost, const Vector& p, const Vector& q, double epsilon, double tau, int levels) {
            SearchOptions so;
            so.levels = levels;
            const OracleResult r = uot_dense_search(CostMatrix(cost), DiscreteMeasure(p), DiscreteMeasure(q),
                                                    SolverConfig::make_unbalanced(epsilon, tau), so);
            return py::make_tuple(r.objective, r.plan);
        },
        py::arg("cost"), py::arg("p"), py::arg("q"), py::arg("epsilon") = default_epsilon,
        py::arg("tau") = default_tau, py::arg("levels") = SearchOptions{}.levels);

    m.def(
        "neg_cosine_cost",
        [](const Matrix& x, const Matrix& y) { return neg_cosine_cost(FeatureSet(x), FeatureSet(y)).values(); },
        py::arg("x"), py::arg("y"));

    m.def(
        "tcyc_residual",
        [](const Matrix& t_hi, const Matrix& t_ii, const Matrix& t_direct) {
            return tcyc_residual(PlanTriple{t_hi, t_ii, t_direct});
        },
        py::arg("t_hi"), py::arg("t_ii"), py::arg("t_direct"));

    m.def(
        "h_dab_stains", [] { return Eigen::Matrix3d(StainMatrix::h_dab().columns()); },
        "Default stain matrix, one unit stain per column.");

    m.def(
        "deconvolve",
        [](const Image& image, std::optional<Eigen::Matrix3d> stains, double i0) {
            const auto conc = deconvolve(rgb_to_od(to_image(image), {i0, i0, i0}), stains_or_default(stains));
            return py::make_tuple(from_od(conc[0]), from_od(conc[1]), from_od(conc[2]));
        },
        py::arg("image"), py::arg("stains") = py::none(), py::arg("i0") = default_i0[0],
        "Per-stain concentration maps of an H x W x 3 uint8 image.");

    m.def(
        "dab_channel",
        [](const Image& image, std::optional<Eigen::Matrix3d> stains, double i0) {
            return from_od(dab_channel(to_image(image), stains_or_default(stains), {i0, i0, i0}));
        },
        py::arg("image"), py::arg("stains") = py::none(), py::arg("i0") = default_i0[0]);

    m.def(
        "focal_od", [](const Plane& od, double alpha) { return from_od(focal_od(to_od(od), FodConfig{alpha})); },
        py::arg("od"), py::arg("alpha") = FodConfig{}.alpha);

    m.def(
        "odc_loss",
        [](const std::vector<Plane>& real, const std::vector<Plane>& fake, double alpha) {
            std::vector<OdMap> r;
            std::vector<OdMap> f;
            for (const auto& a : real) r.push_back(to_od(a));
            for (const auto& a : fake) f.push_back(to_od(a));
            return odc_loss(r, f, FodConfig{alpha});
        },
        py::arg("real"), py::arg("fake"), py::arg("alpha") = FodConfig{}.alpha);

    m.def(
        "correlation_matrix", [](const Matrix& rows) { return correlation_matrix(rows).values(); }, py::arg("rows"));

    m.def(
        "cc_loss",
        [](const std::vector<Matrix>& real, const std::vector<Matrix>& fake) {
            std::vector<FeatureSet> r;
            std::vector<FeatureSet> f;
            for (const auto& a : real) r.emplace_back(a);
            for (const auto& a : fake) f.emplace_back(a);
            return cc_loss(r, f);
        },
        py::arg("real"), py::arg("fake"));

    m.def(
        "nce_loss",
        [](const std::vector<double>& anchor, const std::vector<double>& positive,
           const std::vector<std::vector<double>>& negatives, double temperature) {
            return nce_loss(anchor, positive, negatives, NceConfig{temperature});
        },
        py::arg("anchor"), py::arg("positive"), py::arg("negatives"),
        py::arg("temperature") = default_nce_temperature);

    m.def(
        "total_loss",
        [](double tcyc, double cc, double odc, double nce, double adv, double lambda_tcyc, double lambda_cc) {
            LossWeights w;
            w.lambda_tcyc = lambda_tcyc;
            w.lambda_cc = lambda_cc;
            return total_loss(tcyc, cc, odc, nce, adv, w);
        },
        py::arg("tcyc"), py::arg("cc"), py::arg("odc"), py::arg("nce"), py::arg("adv"),
        py::arg("lambda_tcyc") = default_lambda_tcyc, py::arg("lambda_cc") = default_lambda_cc);

    m.def(
        "fid", [](const Matrix& real, const Matrix& gen) { return fid(real, gen); }, py::arg("real"),
        py::arg("generated"));
    m.def(
        "pearson", [](const std::vector<double>& a, const std::vector<double>& b) { return pearson(a, b); },
        py::arg("a"), py::arg("b"));
    m.def(
        "iod", [](const std::vector<double>& v, const std::vector<double>& r) { return iod(v, r); },
        py::arg("virtual"), py::arg("reference"));

    m.def(
        "make_stain_pair",
        [](std::uint64_t seed, std::size_t size, int n_blobs, double positive_fraction) {
            SyntheticSpec spec;
            spec.seed = seed;
            spec.size = size;
            spec.n_blobs = n_blobs;
            spec.positive_fraction = positive_fraction;
            const StainPair pair = make_stain_pair(spec);
            return py::make_tuple(from_image(pair.he_like), from_image(pair.ihc_like), from_od(pair.dab_truth));
        },
        py::arg("seed"), py::arg("size") = 64, py::arg("n_blobs") = 12, py::arg("positive_fraction") = 0.3,
        "(he_like, ihc_like, dab_truth) for a seed.");
}
