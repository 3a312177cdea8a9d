#pragma once

#include "lobhawkes/kernels.hpp"

#include <Eigen/Dense>

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lobhawkes {

enum class Flavor { linear, positive_part, factorized };

std::string to_string(Flavor flavor);
Flavor flavor_from_string(const std::string& name);

/// Naive volume-factorized model: lambda = mu + sum_s f(v_s) phi(t - s), the
/// marks of all events i.i.d. over the bins with probabilities `probs`.
struct FactorizedMarks {
    double mu_total = 0.0;
    KernelSpec base;
    std::vector<double> f;      // mark function value per bin
    std::vector<double> probs;  // mark distribution, sums to one
};

/// D-dimensional Hawkes specification. kernels[i][j] is the j -> i kernel
/// phi^{ij}; for the factorized flavor it holds the effective kernels
/// p_i f_j phi and `mu` sums to the total exogenous rate.
struct HawkesModel {
    Flavor flavor = Flavor::linear;
    Eigen::VectorXd mu;
    std::vector<std::vector<KernelSpec>> kernels;
    std::optional<FactorizedMarks> factorized;
    std::vector<std::string> labels;

    static HawkesModel linear(Eigen::VectorXd mu, std::vector<std::vector<KernelSpec>> kernels);
    static HawkesModel positive_part(Eigen::VectorXd mu, std::vector<std::vector<KernelSpec>> kernels);
    /// Effective multivariate form of the factorized model. The total baseline
    /// `mu_total` is spread over components by the mark probabilities.
    static HawkesModel make_factorized(double mu_total, FactorizedMarks marks);

    std::size_t dimension() const noexcept { return static_cast<std::size_t>(mu.size()); }
    const KernelSpec& kernel(std::size_t i, std::size_t j) const { return kernels.at(i).at(j); }

    /// ||phi^{ij}||_1 (signed integral).
    Eigen::MatrixXd norm_matrix() const;
    /// Norms of the positive parts, which drive the thinning bound.
    Eigen::MatrixXd positive_norm_matrix() const;

    /// Throws InvalidArgument on shape or sign violations and InstabilityError
    /// when the relevant norm matrix has spectral radius >= 1.
    void validate() const;

    nlohmann::json to_json() const;
    static HawkesModel from_json(const nlohmann::json& doc);
    static HawkesModel load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
    /// SHA-256 of the canonical JSON form.
    std::string hash() const;
};

/// Largest eigenvalue modulus of a nonnegative matrix by power iteration,
/// to relative tolerance `tol`.
double spectral_radius(const Eigen::MatrixXd& norms, double tol = 1e-10, int max_iterations = 100000);

/// Stationary mean intensity (I - ||phi||)^{-1} mu. For the positive-part
/// flavor this is the unclipped linear prediction, an upper bound.
Eigen::VectorXd mean_intensity(const HawkesModel& model);

} // namespace lobhawkes
