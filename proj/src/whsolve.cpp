#include "lobhawkes/whsolve.hpp"

#include "lobhawkes/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace lobhawkes {

QuadratureGrid quadrature_from_nodes(std::vector<double> nodes) {
    if (nodes.size() < 2) throw InvalidArgument("quadrature needs at least two nodes");
    for (std::size_t m = 1; m < nodes.size(); ++m)
        if (!(nodes[m] > nodes[m - 1])) throw InvalidArgument("quadrature nodes must be strictly increasing");
    QuadratureGrid quad;
    quad.nodes = std::move(nodes);
    const std::size_t n = quad.nodes.size();
    quad.weights.assign(n, 0.0);
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double half = 0.5 * (quad.nodes[m + 1] - quad.nodes[m]);
        quad.weights[m] += half;
        quad.weights[m + 1] += half;
    }
    quad.params.x_max = quad.nodes.back();
    return quad;
}

QuadratureGrid build_quadrature(const QuadratureParams& params) {
    LinLogParams lp{params.lin_step, params.x_min, params.log_step, params.x_max, params.n_lin, params.n_log};
    QuadratureGrid quad = quadrature_from_nodes(linlog_points(lp));
    quad.params = {lp.lin_step, lp.h_min, lp.log_step, lp.h_max, lp.n_lin, lp.n_log};
    return quad;
}

std::vector<std::size_t> KernelEstimate::negative_baselines() const {
    std::vector<std::size_t> out;
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (mu[i] < 0.0) out.push_back(static_cast<std::size_t>(i));
    return out;
}

namespace {

void check_inputs(const ConditionalLawMatrix& claw, const QuadratureGrid& quad) {
    if (claw.dimension == 0 || claw.values.size() != claw.dimension * claw.dimension)
        throw InvalidArgument("conditional law matrix has inconsistent dimensions");
    if (quad.size() < 2 || quad.weights.size() != quad.size()) throw InvalidArgument("invalid quadrature grid");
    if (claw.grid.edges.empty() || quad.nodes.back() > claw.grid.edges.back())
        throw InvalidArgument("quadrature x_max exceeds the conditional-law grid h_max");
    for (Eigen::Index i = 0; i < claw.lambda.size(); ++i)
        if (!(claw.lambda[i] > 0.0))
            throw InvalidArgument("component " + std::to_string(i) + " has zero mean intensity");
}

} // namespace

WienerHopfSystem assemble_wiener_hopf(const ConditionalLawMatrix& claw, const QuadratureGrid& quad) {
    check_inputs(claw, quad);
    const std::size_t d = claw.dimension;
    const std::size_t nm = quad.size();
    const auto n = static_cast<Eigen::Index>(d * nm);
    WienerHopfSystem sys;
    sys.a = Eigen::MatrixXd::Identity(n, n);
    sys.b.resize(n, static_cast<Eigen::Index>(d));

    const auto row = [nm](std::size_t comp, std::size_t node) { return static_cast<Eigen::Index>(comp * nm + node); };
    for (std::size_t q = 0; q < nm; ++q) {
        for (std::size_t m = 0; m < nm; ++m) {
            const double lag = quad.nodes[q] - quad.nodes[m];
            const double w = quad.weights[m];
            for (std::size_t j = 0; j < d; ++j)
                for (std::size_t k = 0; k < d; ++k) sys.a(row(j, q), row(k, m)) += w * claw.at(k, j, lag);
        }
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < d; ++i) sys.b(row(j, q), static_cast<Eigen::Index>(i)) = claw.at(i, j, quad.nodes[q]);
    }
    return sys;
}

Eigen::MatrixXd kernel_norms(const KernelEstimate& est) {
    const auto d = static_cast<Eigen::Index>(est.dimension);
    const Eigen::Map<const Eigen::VectorXd> w(est.quad.weights.data(), static_cast<Eigen::Index>(est.quad.size()));
    Eigen::MatrixXd n(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            n(i, j) = w.dot(est.kernel(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
    return n;
}

Eigen::MatrixXd rescaled_norms(const Eigen::MatrixXd& norms, const Eigen::VectorXd& lambda) {
    if (norms.rows() != norms.cols() || norms.rows() != lambda.size())
        throw InvalidArgument("rescaled_norms: shapes disagree");
    Eigen::MatrixXd r(norms.rows(), norms.cols());
    for (Eigen::Index i = 0; i < norms.rows(); ++i) {
        if (!(lambda[i] > 0.0)) throw InvalidArgument("rescaled_norms needs positive mean intensities");
        for (Eigen::Index j = 0; j < norms.cols(); ++j) r(i, j) = lambda[j] / lambda[i] * norms(i, j);
    }
    return r;
}

Eigen::VectorXd recover_baseline(const Eigen::MatrixXd& norms, const Eigen::VectorXd& lambda) {
    if (norms.rows() != norms.cols() || norms.rows() != lambda.size())
        throw InvalidArgument("recover_baseline: shapes disagree");
    return lambda - norms * lambda;
}

Eigen::VectorXd exogeneity_ratios(const Eigen::VectorXd& mu, const Eigen::VectorXd& lambda) {
    if (mu.size() != lambda.size()) throw InvalidArgument("exogeneity_ratios: shapes disagree");
    Eigen::VectorXd r(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
        if (!(lambda[i] > 0.0)) throw InvalidArgument("exogeneity_ratios needs positive mean intensities");
        r[i] = 100.0 * mu[i] / lambda[i];
    }
    return r;
}

KernelEstimate solve_wiener_hopf(const ConditionalLawMatrix& claw, const QuadratureGrid& quad,
                                 const SolverOptions& options) {
    const WienerHopfSystem sys = assemble_wiener_hopf(claw, quad);
    const std::size_t d = claw.dimension;
    const std::size_t nm = quad.size();

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.a);
    const double rcond = lu.rcond();
    const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    if (!(condition <= options.max_condition))
        throw IllConditionedError("Wiener-Hopf system condition estimate " + std::to_string(condition) +
                                      " exceeds " + std::to_string(options.max_condition),
                                  condition);
    const Eigen::MatrixXd u = lu.solve(sys.b);

    KernelEstimate est;
    est.quad = quad;
    est.dimension = d;
    est.phi.assign(d * d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nm)));
    est.stderrs.assign(d * d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nm)));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k)
            est.phi[est.index(i, k)] =
                u.block(static_cast<Eigen::Index>(k * nm), static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nm), 1);

    const double bnorm = sys.b.norm();
    const double rnorm = (sys.a * u - sys.b).norm();
    est.diagnostics.residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
    est.diagnostics.condition = condition;
    est.diagnostics.unknowns = d * nm;

    if (options.compute_stderr) {
        // Nodes sharing a histogram bin share one noisy g value, so the
        // inverse columns are summed per (source, bin) group first.
        std::map<std::pair<std::size_t, long>, Eigen::Index> groups;
        std::vector<Eigen::Index> group_of(d * nm);
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t q = 0; q < nm; ++q) {
                const auto key = std::make_pair(j, claw.grid.bin_of(quad.nodes[q]));
                auto [it, fresh] = groups.try_emplace(key, static_cast<Eigen::Index>(groups.size()));
                group_of[j * nm + q] = it->second;
            }
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(sys.a.rows(), static_cast<Eigen::Index>(groups.size()));
        for (std::size_t r = 0; r < d * nm; ++r) s(static_cast<Eigen::Index>(r), group_of[r]) = 1.0;
        const Eigen::MatrixXd z = lu.solve(s);
        for (std::size_t i = 0; i < d; ++i) {
            Eigen::VectorXd sigma2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(groups.size()));
            for (const auto& [key, g] : groups) {
                const long bin = key.second;
                if (bin < 0) continue;
                const auto idx = claw.index(i, key.first);
                if (claw.status[idx][static_cast<std::size_t>(bin)] != BinStatus::measured) continue;
                const double se = claw.stderrs[idx][static_cast<std::size_t>(bin)];
                sigma2[g] = se * se;
            }
            const Eigen::VectorXd var = z.array().square().matrix() * sigma2;
            for (std::size_t k = 0; k < d; ++k)
                est.stderrs[est.index(i, k)] =
                    var.segment(static_cast<Eigen::Index>(k * nm), static_cast<Eigen::Index>(nm)).cwiseSqrt();
        }
    }

    est.lambda = claw.lambda;
    est.norms = kernel_norms(est);
    est.rescaled = rescaled_norms(est.norms, est.lambda);
    est.mu = recover_baseline(est.norms, est.lambda);
    est.ratios = exogeneity_ratios(est.mu, est.lambda);
    return est;
}

double wiener_hopf_residual(const ConditionalLawMatrix& claw, const KernelEstimate& est) {
    const WienerHopfSystem sys = assemble_wiener_hopf(claw, est.quad);
    const std::size_t d = est.dimension;
    const std::size_t nm = est.quad.size();
    Eigen::MatrixXd u(sys.a.rows(), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k)
            u.block(static_cast<Eigen::Index>(k * nm), static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nm), 1) =
                est.kernel(i, k);
    const double bnorm = sys.b.norm();
    const double rnorm = (sys.a * u - sys.b).norm();
    return bnorm > 0.0 ? rnorm / bnorm : rnorm;
}

NegativityReport verify_negativity_propagation(const ConditionalLawMatrix& claw, const QuadratureGrid& quad,
                                               const SolverOptions& options) {
    NegativityReport rep;
    const std::size_t d = claw.dimension;
    const double x_max = quad.nodes.back();
    rep.hypothesis = true;
    for (std::size_t j = 0; j < d && rep.hypothesis; ++j) {
        bool column_negative = false;
        for (std::size_t i = 0; i < d && !column_negative; ++i) {
            const auto idx = claw.index(i, j);
            for (std::size_t k = 0; k < claw.grid.bins() && claw.grid.left(k) < x_max; ++k)
                if (claw.status[idx][k] == BinStatus::measured && claw.values[idx][k] < 0.0) {
                    column_negative = true;
                    break;
                }
        }
        rep.hypothesis = column_negative;
    }

    rep.estimate = solve_wiener_hopf(claw, quad, options);
    rep.value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            const auto& phi = rep.estimate.kernel(i, j);
            for (Eigen::Index m = 0; m < phi.size(); ++m)
                if (phi[m] < rep.value) {
                    rep.value = phi[m];
                    rep.i = i;
                    rep.j = j;
                    rep.node = static_cast<std::size_t>(m);
                }
        }
    rep.negative_found = rep.value < 0.0;
    rep.passed = rep.negative_found || !rep.hypothesis;
    return rep;
}

} // namespace lobhawkes
