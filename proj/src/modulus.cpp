#include "grr/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace grr {

namespace {

double parse_number(std::string_view text, const char* what) {
    double value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw std::invalid_argument(std::string(what) + ": cannot parse '" + std::string(text) + "'");
    return value;
}

} // namespace

YoungFunction YoungFunction::power(double alpha) {
    if (!(alpha > 0) || !std::isfinite(alpha))
        throw std::invalid_argument("YoungFunction: power exponent must be positive");
    return YoungFunction(Kind::power, alpha);
}

YoungFunction YoungFunction::exp_quarter_square() {
    return YoungFunction(Kind::exp_quarter_square, 0);
}

YoungFunction YoungFunction::parse(std::string_view text) {
    if (text == "expq") return exp_quarter_square();
    if (text.starts_with("pow:")) return power(parse_number(text.substr(4), "psi"));
    throw std::invalid_argument("YoungFunction: unknown family '" + std::string(text) +
                                "' (expected pow:<alpha> or expq)");
}

double YoungFunction::operator()(double u) const {
    if (u < 0) throw std::domain_error("YoungFunction: negative argument");
    if (kind_ == Kind::power) return std::pow(u, alpha_);
    return std::exp(u * u / 4.0);
}

double YoungFunction::inverse(double u) const {
    if (u < 0) throw std::domain_error("YoungFunction inverse: negative argument");
    if (kind_ == Kind::power) {
        if (alpha_ == 1.0) return u;
        return std::pow(u, 1.0 / alpha_);
    }
    if (u < 1.0) return 0.0;  // level set empty below Psi(0)=1
    return 2.0 * std::sqrt(std::log(u));
}

double YoungFunction::value_at_zero() const {
    return kind_ == Kind::power ? 0.0 : 1.0;
}

std::string YoungFunction::to_string() const {
    if (kind_ == Kind::exp_quarter_square) return "expq";
    std::ostringstream os;
    os << "pow:" << alpha_;
    return os.str();
}

double psi_inverse(const YoungFunction& psi, double u) {
    if (u < psi.value_at_zero())
        throw std::domain_error("psi_inverse: argument below Psi(0)");
    return psi.inverse(u);
}

ModulusFunction ModulusFunction::power(double gamma, double scale) {
    if (!(gamma > 0) || !std::isfinite(gamma))
        throw std::invalid_argument("ModulusFunction: power exponent must be positive");
    if (!(scale > 0) || !std::isfinite(scale))
        throw std::invalid_argument("ModulusFunction: scale must be positive");
    ModulusFunction p;
    p.kind_ = Kind::power;
    p.gamma_ = gamma;
    p.scale_ = scale;
    return p;
}

ModulusFunction ModulusFunction::tabulated(std::vector<double> us, std::vector<double> ps) {
    if (us.size() != ps.size() || us.empty())
        throw std::invalid_argument("ModulusFunction: bad table shape");
    if (us.front() != 0.0) {
        if (us.front() < 0) throw std::invalid_argument("ModulusFunction: negative knot");
        us.insert(us.begin(), 0.0);
        ps.insert(ps.begin(), 0.0);
    } else if (ps.front() != 0.0) {
        throw std::invalid_argument("ModulusFunction: p(0) must be 0");
    }
    for (std::size_t i = 0; i < us.size(); ++i) {
        if (!std::isfinite(us[i]) || !std::isfinite(ps[i]) || ps[i] < 0)
            throw std::invalid_argument("ModulusFunction: non-finite or negative table entry");
        if (i > 0) {
            if (!(us[i] > us[i - 1]))
                throw std::invalid_argument("ModulusFunction: knots must be strictly increasing");
            if (ps[i] < ps[i - 1])
                throw std::invalid_argument("ModulusFunction: table values must be non-decreasing");
        }
    }
    if (us.size() < 2) throw std::invalid_argument("ModulusFunction: table needs at least one positive knot");
    ModulusFunction p;
    p.kind_ = Kind::tabulated;
    p.us_ = std::move(us);
    p.ps_ = std::move(ps);
    return p;
}

ModulusFunction ModulusFunction::parse(std::string_view text) {
    if (text.starts_with("pow:")) return power(parse_number(text.substr(4), "p"));
    if (text.starts_with("tab:")) {
        std::string path(text.substr(4));
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("ModulusFunction: cannot open table '" + path + "'");
        std::vector<double> us, ps;
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            for (char& c : line)
                if (c == ',') c = ' ';
            std::istringstream ls(line);
            double u, p;
            if (ls >> u >> p) {
                us.push_back(u);
                ps.push_back(p);
            }
        }
        return tabulated(std::move(us), std::move(ps));
    }
    throw std::invalid_argument("ModulusFunction: unknown family '" + std::string(text) +
                                "' (expected pow:<gamma> or tab:<path>)");
}

double ModulusFunction::operator()(double u) const {
    if (u < 0) throw std::domain_error("ModulusFunction: negative argument");
    if (kind_ == Kind::power) {
        if (gamma_ == 1.0) return scale_ * u;
        return scale_ * std::pow(u, gamma_);
    }
    if (u >= us_.back()) {
        if (u == us_.back()) return ps_.back();
        throw std::domain_error("ModulusFunction: argument beyond table range");
    }
    auto it = std::upper_bound(us_.begin(), us_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - us_.begin()) - 1;
    double t = (u - us_[i]) / (us_[i + 1] - us_[i]);
    return ps_[i] + t * (ps_[i + 1] - ps_[i]);
}

double ModulusFunction::at_one() const {
    if (kind_ == Kind::power) return scale_;
    return (*this)(std::min(1.0, us_.back()));
}

double ModulusFunction::inverse(double u) const {
    if (u < 0) throw std::domain_error("ModulusFunction inverse: negative argument");
    if (u > at_one()) throw std::domain_error("ModulusFunction inverse: argument above p(1)");
    if (kind_ == Kind::power) {
        if (gamma_ == 1.0) return u / scale_;
        return std::pow(u / scale_, 1.0 / gamma_);
    }
    const double vmax = std::min(1.0, us_.back());
    if ((*this)(vmax) <= u) return vmax;
    // rightmost knot with p <= u (p(0)=0 <= u guarantees one exists), then
    // exact inversion of the linear segment above it
    auto it = std::upper_bound(ps_.begin(), ps_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - ps_.begin()) - 1;
    double v = us_[i] + (u - ps_[i]) / (ps_[i + 1] - ps_[i]) * (us_[i + 1] - us_[i]);
    return std::min(v, vmax);
}

double ModulusFunction::derivative(double u) const {
    if (u < 0) throw std::domain_error("ModulusFunction derivative: negative argument");
    if (kind_ == Kind::power) {
        if (gamma_ == 1.0) return scale_;
        return scale_ * gamma_ * std::pow(u, gamma_ - 1.0);
    }
    if (u >= us_.back()) throw std::domain_error("ModulusFunction derivative: beyond table range");
    auto it = std::upper_bound(us_.begin(), us_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - us_.begin());
    if (i > 0) --i;
    if (i + 1 >= us_.size()) i = us_.size() - 2;
    return (ps_[i + 1] - ps_[i]) / (us_[i + 1] - us_[i]);
}

std::string ModulusFunction::to_string() const {
    if (kind_ == Kind::power) {
        std::ostringstream os;
        os << "pow:" << gamma_;
        if (scale_ != 1.0) os << " (scale " << scale_ << ")";
        return os.str();
    }
    std::ostringstream os;
    os << "tab[" << us_.size() << " knots]";
    return os.str();
}

double p_inverse(const ModulusFunction& p, double u) { return p.inverse(u); }

LogModulatedModulus LogModulatedModulus::h_form(std::vector<ModulusFunction> base) {
    if (base.empty() || base.size() > 8)
        throw std::invalid_argument("LogModulatedModulus: dimension must be in [1,8]");
    return {Form::h, std::move(base), {}, 0.25};
}

LogModulatedModulus LogModulatedModulus::sigma_form(std::vector<ModulusFunction> base) {
    if (base.empty() || base.size() > 8)
        throw std::invalid_argument("LogModulatedModulus: dimension must be in [1,8]");
    return {Form::sigma, std::move(base), {}, 0.25};
}

namespace {
void check_hurst(const std::vector<double>& hurst) {
    if (hurst.empty() || hurst.size() > 8)
        throw std::invalid_argument("LogModulatedModulus: dimension must be in [1,8]");
    for (double h : hurst)
        if (!(h > 0 && h <= 1))
            throw std::invalid_argument("LogModulatedModulus: Hurst index outside (0,1]");
}
} // namespace

LogModulatedModulus LogModulatedModulus::hH_form(std::vector<double> hurst) {
    check_hurst(hurst);
    return {Form::hH, {}, std::move(hurst), 0.25};
}

LogModulatedModulus LogModulatedModulus::sigmaH_form(std::vector<double> hurst) {
    check_hurst(hurst);
    return {Form::sigmaH, {}, std::move(hurst), 0.25};
}

LogModulatedModulus LogModulatedModulus::heat_form(double alpha) {
    if (!(alpha >= 0 && alpha <= 0.25))
        throw std::invalid_argument("LogModulatedModulus: heat exponent must lie in [0,1/4]");
    return {Form::heat, {}, {}, alpha};
}

LogModulatedModulus LogModulatedModulus::heat_point_form(double alpha) {
    if (!(alpha >= 0 && alpha <= 0.25))
        throw std::invalid_argument("LogModulatedModulus: heat exponent must lie in [0,1/4]");
    return {Form::heat_point, {}, {}, alpha};
}

int LogModulatedModulus::dim() const {
    switch (form) {
        case Form::h:
        case Form::sigma:
            return static_cast<int>(base.size());
        case Form::hH:
        case Form::sigmaH:
            return static_cast<int>(hurst.size());
        case Form::heat:
        case Form::heat_point:
            return 2;
    }
    return 0;
}

namespace {

// sigma-style sum with per-axis evaluators p_k; the j != k companion factor
// uses z_{j,k} = x_j for j < k and y_j for j > k.
double sigma_sum(const PointPair& pair, const std::function<double(int, double)>& p) {
    const int n = static_cast<int>(pair.x.size());
    double total = 0;
    for (int k = 0; k < n; ++k) {
        auto ku = static_cast<std::size_t>(k);
        double dk = std::fabs(pair.x[ku] - pair.y[ku]);
        double term = p(k, dk) * std::sqrt(std::fabs(std::log(dk)));
        if (term == 0) continue;
        if (n > 1) {
            double prod_p = 1;
            double log_prod = 0;
            bool zero = false;
            for (int j = 0; j < n; ++j) {
                if (j == k) continue;
                auto ju = static_cast<std::size_t>(j);
                double z = j < k ? pair.x[ju] : pair.y[ju];
                if (z == 0) {
                    zero = true;  // p_j(0)=0 kills the term
                    break;
                }
                prod_p *= p(j, z);
                log_prod += std::log(z);
            }
            if (zero || prod_p == 0) continue;
            term *= prod_p * std::sqrt(std::fabs(log_prod));
        }
        // empty companion product at n=1: factor 1 by convention
        total += term;
    }
    return total;
}

} // namespace

double eval_log_modulus(const LogModulatedModulus& m, const PointPair& pair) {
    const int n = m.dim();
    if (pair.x.size() != static_cast<std::size_t>(n) || pair.y.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("eval_log_modulus: pair dimension mismatch");

    std::vector<double> delta(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        auto ku = static_cast<std::size_t>(k);
        delta[ku] = std::fabs(pair.x[ku] - pair.y[ku]);
        if (!(delta[ku] > 0 && delta[ku] < 1))
            throw std::domain_error("eval_log_modulus: |x_k - y_k| must lie in (0,1)");
    }
    const bool needs_coords = m.form == LogModulatedModulus::Form::sigma ||
                              m.form == LogModulatedModulus::Form::sigmaH ||
                              m.form == LogModulatedModulus::Form::heat_point;
    if (needs_coords) {
        for (int k = 0; k < n; ++k) {
            auto ku = static_cast<std::size_t>(k);
            if (!(pair.x[ku] > 0 && pair.x[ku] <= 1) || !(pair.y[ku] > 0 && pair.y[ku] <= 1))
                throw std::domain_error("eval_log_modulus: coordinates must lie in (0,1] for this form");
        }
    }

    switch (m.form) {
        case LogModulatedModulus::Form::h: {
            double prod = 1, logsum = 0;
            for (int k = 0; k < n; ++k) {
                auto ku = static_cast<std::size_t>(k);
                prod *= m.base[ku](delta[ku]);
                logsum -= std::log(delta[ku]);
            }
            return prod * std::sqrt(logsum);
        }
        case LogModulatedModulus::Form::hH: {
            double prod = 1, logsum = 0;
            for (int k = 0; k < n; ++k) {
                auto ku = static_cast<std::size_t>(k);
                prod *= std::pow(delta[ku], m.hurst[ku]);
                logsum -= std::log(delta[ku]);
            }
            return prod * std::sqrt(logsum);
        }
        case LogModulatedModulus::Form::sigma:
            return sigma_sum(pair, [&](int k, double u) { return m.base[static_cast<std::size_t>(k)](u); });
        case LogModulatedModulus::Form::sigmaH:
            return sigma_sum(pair, [&](int k, double u) {
                return std::pow(u, m.hurst[static_cast<std::size_t>(k)]);
            });
        case LogModulatedModulus::Form::heat: {
            double dt = delta[0], dx = delta[1];
            return std::pow(dt, 0.25 - m.alpha) * std::pow(dx, 2.0 * m.alpha) *
                   std::sqrt(std::fabs(std::log(dt * dx)));
        }
        case LogModulatedModulus::Form::heat_point: {
            // pointwise space-time increment denominator: first point (s,x),
            // second point (t,y)
            double s = pair.x[0], x = pair.x[1];
            double t = pair.y[0], y = pair.y[1];
            double dt = std::fabs(s - t), dx = std::fabs(x - y);
            double term_t = std::pow(dt, 0.25) * std::sqrt(std::fabs(std::log(x * dt)));
            double term_x = std::sqrt(dx) * std::sqrt(std::fabs(std::log(dx * t)));
            return term_t + term_x;
        }
    }
    throw std::logic_error("eval_log_modulus: unreachable");
}

} // namespace grr
