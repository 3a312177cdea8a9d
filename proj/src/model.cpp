#include "lobhawkes/model.hpp"

#include "lobhawkes/error.hpp"
#include "lobhawkes/hashing.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace lobhawkes {

std::string to_string(Flavor flavor) {
    switch (flavor) {
    case Flavor::linear: return "linear";
    case Flavor::positive_part: return "positive_part";
    case Flavor::factorized: return "factorized";
    }
    return "unknown";
}

Flavor flavor_from_string(const std::string& name) {
    if (name == "linear") return Flavor::linear;
    if (name == "positive_part") return Flavor::positive_part;
    if (name == "factorized") return Flavor::factorized;
    throw InvalidArgument("unknown model flavor '" + name + "'");
}

HawkesModel HawkesModel::linear(Eigen::VectorXd mu, std::vector<std::vector<KernelSpec>> kernels) {
    HawkesModel m;
    m.flavor = Flavor::linear;
    m.mu = std::move(mu);
    m.kernels = std::move(kernels);
    m.validate();
    return m;
}

HawkesModel HawkesModel::positive_part(Eigen::VectorXd mu, std::vector<std::vector<KernelSpec>> kernels) {
    HawkesModel m;
    m.flavor = Flavor::positive_part;
    m.mu = std::move(mu);
    m.kernels = std::move(kernels);
    m.validate();
    return m;
}

HawkesModel HawkesModel::make_factorized(double mu_total, FactorizedMarks marks) {
    const std::size_t d = marks.probs.size();
    if (d == 0 || marks.f.size() != d) throw InvalidArgument("factorized model needs one f value per mark bin");
    marks.mu_total = mu_total;
    HawkesModel m;
    m.flavor = Flavor::factorized;
    m.mu.resize(static_cast<Eigen::Index>(d));
    m.kernels.assign(d, std::vector<KernelSpec>(d));
    for (std::size_t i = 0; i < d; ++i) {
        m.mu[static_cast<Eigen::Index>(i)] = marks.probs[i] * mu_total;
        for (std::size_t j = 0; j < d; ++j) m.kernels[i][j] = marks.base.scaled(marks.probs[i] * marks.f[j]);
    }
    m.factorized = std::move(marks);
    m.validate();
    return m;
}

Eigen::MatrixXd HawkesModel::norm_matrix() const {
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd n(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            n(i, j) = kernel(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).integral();
    return n;
}

Eigen::MatrixXd HawkesModel::positive_norm_matrix() const {
    const auto d = static_cast<Eigen::Index>(dimension());
    Eigen::MatrixXd n(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            n(i, j) = kernel(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).positive_integral();
    return n;
}

void HawkesModel::validate() const {
    const std::size_t d = dimension();
    if (d == 0) throw InvalidArgument("model dimension must be at least 1");
    if (kernels.size() != d) throw InvalidArgument("kernel matrix must be D x D");
    for (const auto& row : kernels)
        if (row.size() != d) throw InvalidArgument("kernel matrix must be D x D");
    for (Eigen::Index i = 0; i < mu.size(); ++i)
        if (!(mu[i] >= 0.0) || !std::isfinite(mu[i])) throw InvalidArgument("baseline rates must be finite and >= 0");
    if (!labels.empty() && labels.size() != d) throw InvalidArgument("labels must have one entry per component");

    switch (flavor) {
    case Flavor::factorized: {
        if (!factorized) throw InvalidArgument("factorized flavor needs its mark specification");
        const auto& fm = *factorized;
        if (fm.probs.size() != d || fm.f.size() != d)
            throw InvalidArgument("factorized model needs one mark probability and f value per component");
        double total = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            if (!(fm.probs[k] >= 0.0)) throw InvalidArgument("mark probabilities must be >= 0");
            if (!(fm.f[k] >= 0.0) || !std::isfinite(fm.f[k])) throw InvalidArgument("mark function f must be >= 0");
            total += fm.probs[k];
        }
        if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("mark probabilities must sum to one");
        if (!fm.base.nonnegative()) throw InvalidArgument("factorized base kernel must be nonnegative");
        [[fallthrough]];
    }
    case Flavor::linear: {
        for (const auto& row : kernels)
            for (const auto& k : row)
                if (!k.nonnegative())
                    throw InvalidArgument("negative kernels need the positive_part flavor");
        const double rho = spectral_radius(norm_matrix());
        if (!(rho < 1.0))
            throw InstabilityError("spectral radius of the kernel norm matrix is " + std::to_string(rho) + " >= 1");
        break;
    }
    case Flavor::positive_part: {
        const double rho = spectral_radius(positive_norm_matrix());
        if (!(rho < 1.0))
            throw InstabilityError("spectral radius of the positive-part norm matrix is " + std::to_string(rho) +
                                   " >= 1");
        break;
    }
    }
}

nlohmann::json HawkesModel::to_json() const {
    using nlohmann::json;
    json doc;
    doc["dimension"] = dimension();
    doc["flavor"] = to_string(flavor);
    if (flavor == Flavor::factorized && factorized) {
        doc["factorized"] = {{"mu_total", factorized->mu_total},
                             {"base", factorized->base.to_json()},
                             {"f", factorized->f},
                             {"probs", factorized->probs}};
    } else {
        doc["mu"] = std::vector<double>(mu.data(), mu.data() + mu.size());
        json rows = json::array();
        for (const auto& row : kernels) {
            json r = json::array();
            for (const auto& k : row) r.push_back(k.to_json());
            rows.push_back(r);
        }
        doc["kernels"] = rows;
    }
    if (!labels.empty()) doc["labels"] = labels;
    return doc;
}

HawkesModel HawkesModel::from_json(const nlohmann::json& doc) {
    try {
        const Flavor flavor = flavor_from_string(doc.at("flavor").get<std::string>());
        HawkesModel m;
        if (flavor == Flavor::factorized) {
            const auto& fj = doc.at("factorized");
            FactorizedMarks marks;
            marks.base = KernelSpec::from_json(fj.at("base"));
            marks.f = fj.at("f").get<std::vector<double>>();
            marks.probs = fj.at("probs").get<std::vector<double>>();
            m = make_factorized(fj.at("mu_total").get<double>(), std::move(marks));
        } else {
            const auto mu = doc.at("mu").get<std::vector<double>>();
            m.flavor = flavor;
            m.mu = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
            for (const auto& row : doc.at("kernels")) {
                std::vector<KernelSpec> r;
                for (const auto& k : row) r.push_back(KernelSpec::from_json(k));
                m.kernels.push_back(std::move(r));
            }
        }
        if (doc.contains("dimension") && doc["dimension"].get<std::size_t>() != m.dimension())
            throw InvalidArgument("model 'dimension' disagrees with its baseline vector");
        if (doc.contains("labels")) m.labels = doc["labels"].get<std::vector<std::string>>();
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("model file: ") + e.what());
    }
}

HawkesModel HawkesModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open model file '" + path.string() + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument("model file '" + path.string() + "': " + e.what());
    }
    return from_json(doc);
}

void HawkesModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write model file '" + path.string() + "'");
    out << to_json().dump(2) << '\n';
}

std::string HawkesModel::hash() const { return sha256_hex(to_json().dump()); }

namespace {

/// Power iteration on m + shift * I. Returns false when the iterate vanishes.
bool power_iterate(const Eigen::MatrixXd& m, double shift, double tol, int max_iterations, double& estimate) {
    const Eigen::Index d = m.rows();
    Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    double previous = -1.0;
    int settled = 0;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::VectorXd y = m * x + shift * x;
        const double norm = y.lpNorm<1>();
        if (norm == 0.0) {
            estimate = 0.0;
            return false;
        }
        x = y / norm;
        settled = std::abs(norm - previous) <= tol * norm ? settled + 1 : 0;
        previous = norm;
        if (settled >= 3) {
            estimate = norm;
            return true;
        }
    }
    estimate = previous;
    return false;
}

} // namespace

double spectral_radius(const Eigen::MatrixXd& norms, double tol, int max_iterations) {
    if (norms.rows() != norms.cols()) throw InvalidArgument("spectral_radius needs a square matrix");
    if (!norms.allFinite()) throw InvalidArgument("spectral_radius needs finite entries");
    if ((norms.array() < 0.0).any()) throw InvalidArgument("spectral_radius needs a nonnegative matrix");
    if (norms.size() == 0 || norms.isZero(0.0)) return 0.0;

    double estimate = 0.0;
    const int first = std::min(max_iterations, 1000);
    if (power_iterate(norms, 0.0, tol, first, estimate)) return estimate;
    if (estimate == 0.0) return 0.0;  // nilpotent

    // Shifting by the identity separates the Perron root from other
    // eigenvalues of the same modulus, which stall the plain iteration.
    if (power_iterate(norms, 1.0, tol, max_iterations, estimate)) return std::max(estimate - 1.0, 0.0);
    throw ConvergenceError("spectral radius power iteration did not converge in " +
                           std::to_string(max_iterations) + " iterations");
}

Eigen::VectorXd mean_intensity(const HawkesModel& model) {
    const Eigen::Index d = static_cast<Eigen::Index>(model.dimension());
    const Eigen::MatrixXd n = model.norm_matrix();
    const Eigen::MatrixXd drive = model.flavor == Flavor::positive_part ? model.positive_norm_matrix() : n;
    if (!(spectral_radius(drive) < 1.0)) throw InstabilityError("model is not stable: spectral radius >= 1");
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d, d) - n;
    return a.partialPivLu().solve(model.mu);
}

} // namespace lobhawkes
