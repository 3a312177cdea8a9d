#pragma once

#include "lobhawkes/estimate.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lobhawkes {

/// Lin-log quadrature on [0, x_max]: n_lin cells of width lin_step up to
/// x_min, then n_log log-spaced cells. Zero steps are derived from counts.
struct QuadratureParams {
    double lin_step = 0.0;
    double x_min = 5e-4;
    double log_step = 0.0;
    double x_max = 0.5;
    int n_lin = 80;
    int n_log = 80;
};

struct QuadratureGrid {
    QuadratureParams params;  // with both steps resolved
    std::vector<double> nodes;
    std::vector<double> weights;  // trapezoidal

    std::size_t size() const noexcept { return nodes.size(); }
};

QuadratureGrid build_quadrature(const QuadratureParams& params);
/// Trapezoidal weights for arbitrary strictly increasing nodes.
QuadratureGrid quadrature_from_nodes(std::vector<double> nodes);

struct SolverOptions {
    double max_condition = 1e12;
    bool compute_stderr = true;
};

struct SolverDiagnostics {
    double residual = 0.0;   // ||A U - B||_F / ||B||_F (absolute when B = 0)
    double condition = 0.0;  // 1-norm condition estimate of A
    std::size_t unknowns = 0;
};

struct KernelEstimate {
    QuadratureGrid quad;
    std::size_t dimension = 0;
    std::vector<Eigen::VectorXd> phi;      // [i * D + j] at the nodes, 1/s
    std::vector<Eigen::VectorXd> stderrs;  // first-order propagation of the g error bars
    Eigen::MatrixXd norms;
    Eigen::MatrixXd rescaled;
    Eigen::VectorXd lambda;
    Eigen::VectorXd mu;
    Eigen::VectorXd ratios;  // percent
    SolverDiagnostics diagnostics;

    std::size_t index(std::size_t i, std::size_t j) const { return i * dimension + j; }
    const Eigen::VectorXd& kernel(std::size_t i, std::size_t j) const { return phi.at(index(i, j)); }
    /// Components whose recovered baseline is negative.
    std::vector<std::size_t> negative_baselines() const;
};

/// Nystrom solve of g^{ij}(t) = phi^{ij}(t) + sum_k int_0^inf phi^{ik}(u) g^{kj}(t - u) du
/// at the quadrature nodes, followed by norms, baseline and ratios.
/// Throws IllConditionedError above `max_condition`.
KernelEstimate solve_wiener_hopf(const ConditionalLawMatrix& claw, const QuadratureGrid& quad,
                                 const SolverOptions& options = {});

/// The discretized operator A[(j,q),(k,m)] = delta + w_m g^{kj}(x_q - x_m)
/// and right-hand sides B[(j,q), i] = g^{ij}(x_q).
struct WienerHopfSystem {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b;
};
WienerHopfSystem assemble_wiener_hopf(const ConditionalLawMatrix& claw, const QuadratureGrid& quad);

/// Relative residual of the discretized system for a given estimate.
double wiener_hopf_residual(const ConditionalLawMatrix& claw, const KernelEstimate& est);

Eigen::MatrixXd kernel_norms(const KernelEstimate& est);
Eigen::MatrixXd rescaled_norms(const Eigen::MatrixXd& norms, const Eigen::VectorXd& lambda);
Eigen::VectorXd recover_baseline(const Eigen::MatrixXd& norms, const Eigen::VectorXd& lambda);
Eigen::VectorXd exogeneity_ratios(const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda);

struct NegativityReport {
    bool hypothesis = false;  // every column of g has a bin below zero
    bool negative_found = false;
    bool passed = false;      // negative_found, or the hypothesis does not hold
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t node = 0;
    double value = 0.0;       // most negative phi value
    KernelEstimate estimate;
};

/// Solves the system and locates the most negative kernel value. Only bins
/// inside [0, x_max] enter the hypothesis check.
NegativityReport verify_negativity_propagation(const ConditionalLawMatrix& claw, const QuadratureGrid& quad,
                                               const SolverOptions& options = {});

} // namespace lobhawkes
