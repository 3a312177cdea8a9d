#pragma once

#include "lobhawkes/estimate.hpp"
#include "lobhawkes/whsolve.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lobhawkes {

struct PipelineOptions {
    LinLogParams grid;
    QuadratureParams quadrature;
    ConditionalLawOptions estimation;
    SolverOptions solver;
};

struct PipelineResult {
    ConditionalLawMatrix claw;
    KernelEstimate kernels;
};

/// Conditional laws on the lin-log grid, then the Wiener-Hopf solve.
PipelineResult run_pipeline(const MultivariateEventStream& stream, const PipelineOptions& options = {});

/// Largest |sum_j rescaled_ij + mu_i / lambda_i - 1| over components.
double closure_error(const KernelEstimate& est);

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string measured;
    std::string target;
    double seconds = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20120101;
    /// Multiplies every tolerance band; below one tightens the suite.
    double tolerance_scale = 1.0;
    unsigned threads = 1;
    /// Criteria to run (1..8); empty runs all. 6 and 8 summarise the solves
    /// of whichever of 1..5 ran.
    std::vector<int> only;
    /// Called after each criterion, e.g. for progress output.
    std::function<void(const CriterionResult&)> on_result;
};

struct AcceptanceReport {
    std::vector<CriterionResult> results;

    bool passed() const;
    nlohmann::json to_json() const;
};

AcceptanceReport run_acceptance(const AcceptanceOptions& options = {});

/// One pass/fail line per criterion.
std::string format_result(const CriterionResult& r);

} // namespace lobhawkes
