#include "lobhawkes/kernels.hpp"

#include "lobhawkes/error.hpp"

#include <algorithm>
#include <cmath>

namespace lobhawkes {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check(const kernel::Exponential& k) {
    if (!std::isfinite(k.alpha) || !(k.beta > 0.0) || !std::isfinite(k.beta))
        throw InvalidArgument("exponential kernel needs finite alpha and beta > 0");
}

/// Integral of max(sign * phi, 0) over one linear segment.
double segment_part(double dt, double a, double b, double sign) {
    a *= sign;
    b *= sign;
    if (a >= 0.0 && b >= 0.0) return 0.5 * dt * (a + b);
    if (a <= 0.0 && b <= 0.0) return 0.0;
    const double hi = std::max(a, b);
    const double frac = hi / (std::abs(a) + std::abs(b));
    return 0.5 * dt * frac * hi;
}

double tabulated_part(const kernel::Tabulated& k, double sign) {
    double total = 0.0;
    for (std::size_t m = 1; m < k.t.size(); ++m)
        total += segment_part(k.t[m] - k.t[m - 1], k.v[m - 1], k.v[m], sign);
    return total;
}

} // namespace

KernelSpec::KernelSpec(kernel::Exponential k) : spec_(k) { check(k); }

KernelSpec::KernelSpec(kernel::SumExponential k) : spec_(k) {
    for (const auto& term : k.terms) check(term);
}

KernelSpec::KernelSpec(kernel::PowerLaw k) : spec_(k) {
    if (!std::isfinite(k.c) || !(k.gamma > 1.0) || !(k.t0 > 0.0))
        throw InvalidArgument("power-law kernel needs gamma > 1 and t0 > 0");
}

KernelSpec::KernelSpec(kernel::Tabulated k) : spec_(k) {
    const auto& tab = std::get<kernel::Tabulated>(spec_);
    if (tab.t.size() < 2 || tab.t.size() != tab.v.size())
        throw InvalidArgument("tabulated kernel needs at least two (t, v) pairs of equal length");
    if (tab.t.front() != 0.0) throw InvalidArgument("tabulated kernel must start at t = 0");
    for (std::size_t m = 0; m < tab.t.size(); ++m) {
        if (!std::isfinite(tab.v[m])) throw InvalidArgument("tabulated kernel values must be finite");
        if (m > 0 && !(tab.t[m] > tab.t[m - 1]))
            throw InvalidArgument("tabulated kernel abscissae must be strictly increasing");
    }
    suffix_max_.assign(tab.v.size(), 0.0);
    double running = 0.0;
    for (std::size_t m = tab.v.size(); m-- > 0;) {
        running = std::max(running, tab.v[m]);
        suffix_max_[m] = running;
    }
}

bool KernelSpec::is_zero() const noexcept {
    return std::visit(overloaded{[](const kernel::Zero&) { return true; },
                                 [](const kernel::Exponential& k) { return k.alpha == 0.0; },
                                 [](const kernel::SumExponential& k) {
                                     return std::all_of(k.terms.begin(), k.terms.end(),
                                                        [](const auto& e) { return e.alpha == 0.0; });
                                 },
                                 [](const kernel::PowerLaw& k) { return k.c == 0.0; },
                                 [](const kernel::Tabulated& k) {
                                     return std::all_of(k.v.begin(), k.v.end(), [](double x) { return x == 0.0; });
                                 }},
                      spec_);
}

double KernelSpec::value(double t) const {
    if (t < 0.0) return 0.0;
    return std::visit(overloaded{[](const kernel::Zero&) { return 0.0; },
                                 [t](const kernel::Exponential& k) { return k.alpha * k.beta * std::exp(-k.beta * t); },
                                 [t](const kernel::SumExponential& k) {
                                     double s = 0.0;
                                     for (const auto& e : k.terms) s += e.alpha * e.beta * std::exp(-e.beta * t);
                                     return s;
                                 },
                                 [t](const kernel::PowerLaw& k) { return k.c * std::pow(1.0 + t / k.t0, -k.gamma); },
                                 [t](const kernel::Tabulated& k) {
                                     if (t > k.t.back()) return 0.0;
                                     auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
                                     if (it == k.t.end()) return k.v.back();
                                     const auto m = static_cast<std::size_t>(it - k.t.begin());
                                     const double w = (t - k.t[m - 1]) / (k.t[m] - k.t[m - 1]);
                                     return k.v[m - 1] + w * (k.v[m] - k.v[m - 1]);
                                 }},
                      spec_);
}

double KernelSpec::integral() const {
    return std::visit(overloaded{[](const kernel::Zero&) { return 0.0; },
                                 [](const kernel::Exponential& k) { return k.alpha; },
                                 [](const kernel::SumExponential& k) {
                                     double s = 0.0;
                                     for (const auto& e : k.terms) s += e.alpha;
                                     return s;
                                 },
                                 [](const kernel::PowerLaw& k) { return k.c * k.t0 / (k.gamma - 1.0); },
                                 [](const kernel::Tabulated& k) {
                                     return tabulated_part(k, 1.0) - tabulated_part(k, -1.0);
                                 }},
                      spec_);
}

double KernelSpec::positive_integral() const {
    return std::visit(overloaded{[](const kernel::Tabulated& k) { return tabulated_part(k, 1.0); },
                                 [](const kernel::SumExponential& k) {
                                     // upper bound when terms of both signs are mixed
                                     double s = 0.0;
                                     for (const auto& e : k.terms) s += std::max(e.alpha, 0.0);
                                     return s;
                                 },
                                 [this](const auto&) { return std::max(integral(), 0.0); }},
                      spec_);
}

double KernelSpec::abs_integral() const {
    return std::visit(overloaded{[](const kernel::Tabulated& k) {
                                     return tabulated_part(k, 1.0) + tabulated_part(k, -1.0);
                                 },
                                 [](const kernel::SumExponential& k) {
                                     // exact for same-sign terms, an upper bound otherwise
                                     double s = 0.0;
                                     for (const auto& e : k.terms) s += std::abs(e.alpha);
                                     return s;
                                 },
                                 [this](const auto&) { return std::abs(integral()); }},
                      spec_);
}

double KernelSpec::positive_sup_from(double t) const {
    t = std::max(t, 0.0);
    return std::visit(overloaded{[](const kernel::Zero&) { return 0.0; },
                                 [t](const kernel::Exponential& k) {
                                     return k.alpha > 0.0 ? k.alpha * k.beta * std::exp(-k.beta * t) : 0.0;
                                 },
                                 [t](const kernel::SumExponential& k) {
                                     double s = 0.0;
                                     for (const auto& e : k.terms)
                                         if (e.alpha > 0.0) s += e.alpha * e.beta * std::exp(-e.beta * t);
                                     return s;
                                 },
                                 [t](const kernel::PowerLaw& k) {
                                     return k.c > 0.0 ? k.c * std::pow(1.0 + t / k.t0, -k.gamma) : 0.0;
                                 },
                                 [this, t](const kernel::Tabulated& k) {
                                     if (t > k.t.back()) return 0.0;
                                     auto it = std::upper_bound(k.t.begin(), k.t.end(), t);
                                     const double here = std::max(value(t), 0.0);
                                     if (it == k.t.end()) return here;
                                     return std::max(here, suffix_max_[static_cast<std::size_t>(it - k.t.begin())]);
                                 }},
                      spec_);
}

double KernelSpec::support_horizon(double eps) const {
    if (!(eps > 0.0)) throw InvalidArgument("support horizon needs eps > 0");
    const auto exp_horizon = [](const kernel::Exponential& e, double tol) {
        const double peak = std::abs(e.alpha) * e.beta;
        return peak > tol ? std::log(peak / tol) / e.beta : 0.0;
    };
    return std::visit(overloaded{[](const kernel::Zero&) { return 0.0; },
                                 [&](const kernel::Exponential& k) { return exp_horizon(k, eps); },
                                 [&](const kernel::SumExponential& k) {
                                     double h = 0.0;
                                     const double tol = eps / static_cast<double>(std::max<std::size_t>(k.terms.size(), 1));
                                     for (const auto& e : k.terms) h = std::max(h, exp_horizon(e, tol));
                                     return h;
                                 },
                                 [eps](const kernel::PowerLaw& k) {
                                     const double c = std::abs(k.c);
                                     return c > eps ? (std::pow(c / eps, 1.0 / k.gamma) - 1.0) * k.t0 : 0.0;
                                 },
                                 [](const kernel::Tabulated& k) { return k.t.back(); }},
                      spec_);
}

bool KernelSpec::nonnegative() const {
    return std::visit(overloaded{[](const kernel::Zero&) { return true; },
                                 [](const kernel::Exponential& k) { return k.alpha >= 0.0; },
                                 [](const kernel::SumExponential& k) {
                                     return std::all_of(k.terms.begin(), k.terms.end(),
                                                        [](const auto& e) { return e.alpha >= 0.0; });
                                 },
                                 [](const kernel::PowerLaw& k) { return k.c >= 0.0; },
                                 [](const kernel::Tabulated& k) {
                                     return std::all_of(k.v.begin(), k.v.end(), [](double x) { return x >= 0.0; });
                                 }},
                      spec_);
}

KernelSpec KernelSpec::scaled(double factor) const {
    return std::visit(overloaded{[](const kernel::Zero&) { return KernelSpec{}; },
                                 [factor](kernel::Exponential k) {
                                     k.alpha *= factor;
                                     return KernelSpec(k);
                                 },
                                 [factor](kernel::SumExponential k) {
                                     for (auto& e : k.terms) e.alpha *= factor;
                                     return KernelSpec(std::move(k));
                                 },
                                 [factor](kernel::PowerLaw k) {
                                     k.c *= factor;
                                     return KernelSpec(k);
                                 },
                                 [factor](kernel::Tabulated k) {
                                     for (auto& x : k.v) x *= factor;
                                     return KernelSpec(std::move(k));
                                 }},
                      spec_);
}

nlohmann::json KernelSpec::to_json() const {
    using nlohmann::json;
    return std::visit(overloaded{[](const kernel::Zero&) { return json{{"type", "zero"}}; },
                                 [](const kernel::Exponential& k) {
                                     return json{{"type", "exponential"}, {"alpha", k.alpha}, {"beta", k.beta}};
                                 },
                                 [](const kernel::SumExponential& k) {
                                     json terms = json::array();
                                     for (const auto& e : k.terms) terms.push_back({{"alpha", e.alpha}, {"beta", e.beta}});
                                     return json{{"type", "sum_exp"}, {"terms", terms}};
                                 },
                                 [](const kernel::PowerLaw& k) {
                                     return json{{"type", "power_law"}, {"c", k.c}, {"gamma", k.gamma}, {"t0", k.t0}};
                                 },
                                 [](const kernel::Tabulated& k) {
                                     return json{{"type", "tabulated"}, {"t", k.t}, {"v", k.v}};
                                 }},
                      spec_);
}

KernelSpec KernelSpec::from_json(const nlohmann::json& doc) {
    try {
        const std::string type = doc.at("type").get<std::string>();
        if (type == "zero") return KernelSpec{};
        if (type == "exponential")
            return kernel::Exponential{doc.at("alpha").get<double>(), doc.at("beta").get<double>()};
        if (type == "sum_exp") {
            kernel::SumExponential k;
            for (const auto& e : doc.at("terms"))
                k.terms.push_back({e.at("alpha").get<double>(), e.at("beta").get<double>()});
            return k;
        }
        if (type == "power_law")
            return kernel::PowerLaw{doc.at("c").get<double>(), doc.at("gamma").get<double>(),
                                    doc.at("t0").get<double>()};
        if (type == "tabulated")
            return kernel::Tabulated{doc.at("t").get<std::vector<double>>(), doc.at("v").get<std::vector<double>>()};
        throw InvalidArgument("unknown kernel type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("kernel spec: ") + e.what());
    }
}

} // namespace lobhawkes
