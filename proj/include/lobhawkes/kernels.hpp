#pragma once

#include "json.hpp"

#include <variant>
#include <vector>

namespace lobhawkes {

namespace kernel {

struct Zero {};

/// alpha * beta * exp(-beta t); alpha is the L1 norm (negative for inhibition).
struct Exponential {
    double alpha = 0.0;
    double beta = 1.0;
};

struct SumExponential {
    std::vector<Exponential> terms;
};

/// c * (1 + t / t0)^(-gamma), gamma > 1; norm c * t0 / (gamma - 1).
struct PowerLaw {
    double c = 0.0;
    double gamma = 2.0;
    double t0 = 1.0;
};

/// Piecewise linear through (t[k], v[k]), t[0] = 0, zero after t.back().
struct Tabulated {
    std::vector<double> t;
    std::vector<double> v;
};

} // namespace kernel

/// A causal kernel phi(t), zero for t < 0.
class KernelSpec {
public:
    using Variant = std::variant<kernel::Zero, kernel::Exponential, kernel::SumExponential,
                                 kernel::PowerLaw, kernel::Tabulated>;

    KernelSpec() = default;
    KernelSpec(kernel::Zero k) : spec_(k) {}
    KernelSpec(kernel::Exponential k);
    KernelSpec(kernel::SumExponential k);
    KernelSpec(kernel::PowerLaw k);
    KernelSpec(kernel::Tabulated k);

    static KernelSpec exponential(double alpha, double beta) { return kernel::Exponential{alpha, beta}; }

    const Variant& variant() const noexcept { return spec_; }
    bool is_zero() const noexcept;

    double value(double t) const;
    /// Exact integral over [0, inf).
    double integral() const;
    /// Exact integral of |phi| over [0, inf).
    double abs_integral() const;
    /// Integral of the positive part over [0, inf).
    double positive_integral() const;
    /// An upper bound of max(phi(u), 0) over u >= t, tight for monotone kernels.
    double positive_sup_from(double t) const;
    /// Lag after which |phi| stays below `eps`.
    double support_horizon(double eps) const;
    bool nonnegative() const;
    /// The same kernel shape multiplied by `factor`.
    KernelSpec scaled(double factor) const;

    nlohmann::json to_json() const;
    static KernelSpec from_json(const nlohmann::json& doc);

private:
    Variant spec_{kernel::Zero{}};
    std::vector<double> suffix_max_;  // tabulated only: max(v[k..], 0)
};

} // namespace lobhawkes
