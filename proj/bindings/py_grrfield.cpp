#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>
#include <vector>

#include "grr/experiments.hpp"
#include "grr/field_grid.hpp"
#include "grr/gaussian_fields.hpp"
#include "grr/grr_core.hpp"
#include "grr/heat_field.hpp"
#include "grr/modulus.hpp"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

grr::GridField to_field(const DoubleArray& values, std::vector<std::vector<double>> axes) {
    py::buffer_info buf = values.request();
    if (static_cast<std::size_t>(buf.ndim) != axes.size())
        throw std::invalid_argument("values rank does not match the number of axes");
    for (std::size_t k = 0; k < axes.size(); ++k)
        if (static_cast<std::size_t>(buf.shape[k]) != axes[k].size())
            throw std::invalid_argument("values shape does not match the axes");
    const double* ptr = static_cast<const double*>(buf.ptr);
    return grr::GridField(std::move(axes),
                          std::vector<double>(ptr, ptr + static_cast<std::size_t>(buf.size)));
}

py::array_t<double> from_field(const grr::GridField& f) {
    std::vector<py::ssize_t> shape(f.shape().begin(), f.shape().end());
    py::array_t<double> out(shape);
    std::copy(f.values().begin(), f.values().end(), out.mutable_data());
    return out;
}

std::vector<grr::ModulusFunction> parse_moduli(const std::vector<std::string>& specs) {
    std::vector<grr::ModulusFunction> out;
    out.reserve(specs.size());
    for (const auto& s : specs) out.push_back(grr::ModulusFunction::parse(s));
    return out;
}

grr::CovarianceModel make_model(const std::string& name, const std::vector<double>& hurst) {
    if (name == "fbm") return grr::CovarianceModel::fbm(hurst);
    if (name == "heat") {
        if (!hurst.empty()) throw std::invalid_argument("hurst applies only to fbm");
        return grr::CovarianceModel::heat();
    }
    throw std::invalid_argument("unknown model '" + name + "'");
}

grr::LogModulatedModulus make_form(const std::string& form, const std::vector<double>& hurst,
                                   const std::vector<std::string>& p, double alpha) {
    if (form == "h") return grr::LogModulatedModulus::h_form(parse_moduli(p));
    if (form == "sigma") return grr::LogModulatedModulus::sigma_form(parse_moduli(p));
    if (form == "hH") return grr::LogModulatedModulus::hH_form(hurst);
    if (form == "sigmaH") return grr::LogModulatedModulus::sigmaH_form(hurst);
    if (form == "heat") return grr::LogModulatedModulus::heat_form(alpha);
    if (form == "heat_point") return grr::LogModulatedModulus::heat_point_form(alpha);
    throw std::invalid_argument("unknown modulus form '" + form + "'");
}

grr::PointPair make_pair(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("point pair ranks differ");
    grr::PointPair pp;
    pp.x = std::move(x);
    pp.y = std::move(y);
    return pp;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "rectangular-increment regularity toolkit";

    m.def(
        "rect_increment",
        [](const DoubleArray& values, std::vector<std::vector<double>> axes,
           std::vector<double> x, std::vector<double> y) {
            grr::GridField f = to_field(values, std::move(axes));
            grr::FieldView view(f);
            return grr::rect_increment(view, make_pair(std::move(x), std::move(y)));
        },
        py::arg("values"), py::arg("axes"), py::arg("x"), py::arg("y"),
        "Signed alternating corner sum of the box spanned by x and y.");

    m.def(
        "young_eval",
        [](const std::string& spec, double u) { return grr::YoungFunction::parse(spec)(u); },
        py::arg("spec"), py::arg("u"));
    m.def(
        "young_inverse",
        [](const std::string& spec, double u) {
            return grr::YoungFunction::parse(spec).inverse(u);
        },
        py::arg("spec"), py::arg("u"));
    m.def(
        "modulus_eval",
        [](const std::string& spec, double u) { return grr::ModulusFunction::parse(spec)(u); },
        py::arg("spec"), py::arg("u"));
    m.def(
        "modulus_inverse",
        [](const std::string& spec, double u) {
            return grr::p_inverse(grr::ModulusFunction::parse(spec), u);
        },
        py::arg("spec"), py::arg("u"));

    m.def(
        "b_functional",
        [](const DoubleArray& values, std::vector<std::vector<double>> axes,
           const std::string& psi, const std::vector<std::string>& p) {
            grr::GrrProblem prob{to_field(values, std::move(axes)),
                                 grr::YoungFunction::parse(psi), parse_moduli(p)};
            return grr::b_functional(prob);
        },
        py::arg("values"), py::arg("axes"), py::arg("psi"), py::arg("p"),
        "Double-integral functional over the grid with Voronoi cell weights.");

    m.def(
        "grr_rhs",
        [](const std::string& psi, const std::vector<std::string>& p, double B,
           const std::vector<double>& deltas) {
            auto moduli = parse_moduli(p);
            grr::GrrBound b =
                grr::grr_rhs(grr::YoungFunction::parse(psi), moduli, B, deltas);
            return py::make_tuple(b.value, b.divergent);
        },
        py::arg("psi"), py::arg("p"), py::arg("B"), py::arg("deltas"),
        "Right side of the increment bound; returns (value, divergent).");

    m.def(
        "log_tail_integral",
        [](const std::vector<std::string>& p, const std::vector<double>& deltas, double c) {
            auto moduli = parse_moduli(p);
            return grr::log_tail_integral(moduli, deltas, c);
        },
        py::arg("p"), py::arg("deltas"), py::arg("c"));

    m.def("kernel_time_integral", &grr::kernel_time_integral, py::arg("T"), py::arg("delta"));
    m.def("kernel_gap_integral", &grr::kernel_gap_integral, py::arg("T"), py::arg("delta"));
    m.def(
        "heat_cov",
        [](double s, double x, double t, double y) {
            return grr::heat_cov({s, x}, {t, y});
        },
        py::arg("s"), py::arg("x"), py::arg("t"), py::arg("y"));
    m.def("heat_sq_increment", &grr::heat_sq_increment, py::arg("s"), py::arg("t"), py::arg("x"),
          py::arg("y"));
    m.def(
        "heat_sq_increment_bound",
        [](double s, double t, double x, double y, double alpha) {
            grr::HeatIncrementBound b = grr::heat_sq_increment_bound(s, t, x, y, alpha);
            return py::make_tuple(b.value, b.bound1, b.bound2);
        },
        py::arg("s"), py::arg("t"), py::arg("x"), py::arg("y"), py::arg("alpha"),
        "Returns (value, bound1, bound2).");
    m.def(
        "kernel_tail_brackets",
        [](double a, double b, double delta) {
            grr::KernelTailBrackets k = grr::kernel_tail_brackets(a, b, delta);
            py::dict out;
            out["I"] = k.I_quadrature;
            out["lower"] = k.lower;
            out["upper"] = k.upper;
            out["J"] = k.J_quadrature;
            out["J_identity"] = k.J_identity;
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("delta"));
    m.def("rho", &grr::rho, py::arg("u"));

    m.def(
        "increment_variance",
        [](const std::string& model, const std::vector<double>& hurst, std::vector<double> x,
           std::vector<double> y) {
            return grr::increment_variance(make_model(model, hurst),
                                           make_pair(std::move(x), std::move(y)));
        },
        py::arg("model"), py::arg("hurst"), py::arg("x"), py::arg("y"));

    m.def(
        "sample_field",
        [](const std::string& model, const std::vector<double>& hurst,
           std::vector<std::vector<double>> axes, std::uint64_t seed, std::uint64_t replicate) {
            return from_field(
                grr::sample_field(make_model(model, hurst), axes, seed, replicate));
        },
        py::arg("model"), py::arg("hurst"), py::arg("axes"), py::arg("seed"),
        py::arg("replicate"), "Exact Gaussian draw on the grid; deterministic in (seed, replicate).");

    m.def(
        "increment_moment_mc",
        [](const std::string& model, const std::vector<double>& hurst, std::vector<double> x,
           std::vector<double> y, std::size_t replicates, std::uint64_t seed) {
            grr::MomentEstimate e =
                grr::increment_moment_mc(make_model(model, hurst),
                                         make_pair(std::move(x), std::move(y)), replicates, seed);
            return py::make_tuple(e.mean, e.std_error);
        },
        py::arg("model"), py::arg("hurst"), py::arg("x"), py::arg("y"), py::arg("replicates"),
        py::arg("seed"), "Monte Carlo squared-increment moment; returns (mean, std_error).");

    m.def("exp_moment_check", &grr::exp_moment_check, py::arg("variance"), py::arg("draws"),
          py::arg("seed"));
    m.def("exp_moment_closed_form", &grr::exp_moment_closed_form, py::arg("variance"));

    m.def(
        "sup_ratio",
        [](const DoubleArray& values, std::vector<std::vector<double>> axes,
           const std::string& form, double delta_max, const std::vector<double>& hurst,
           const std::vector<std::string>& p, double alpha) {
            grr::GridField f = to_field(values, std::move(axes));
            return grr::sup_ratio(f, make_form(form, hurst, p, alpha), delta_max);
        },
        py::arg("values"), py::arg("axes"), py::arg("form"), py::arg("delta_max"),
        py::arg("hurst") = std::vector<double>{}, py::arg("p") = std::vector<std::string>{},
        py::arg("alpha") = 0.125,
        "Max increment-to-modulus ratio over grid pairs within delta_max.");
}
