#include "triage/data/synthetic.hpp"

#include "triage/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace triage::data {

namespace {

// Returns L with L * L^T = covariance. Uses an eigendecomposition so that
// semi-definite (rank-deficient) covariances are accepted.
Eigen::MatrixXd covariance_factor(const ClassDistribution& cls, std::size_t d, const char* which)
{
    if (cls.mean.size() != d) {
        throw Error(ErrorKind::dimension, std::string(which) + " mean has " + std::to_string(cls.mean.size()) +
                                              " entries, schema has " + std::to_string(d));
    }
    if (cls.covariance.size() == d) {
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) {
            if (!(cls.covariance[j] >= 0.0) || !std::isfinite(cls.covariance[j])) {
                throw Error(ErrorKind::contract, std::string("invalid covariance: ") + which + " variance " +
                                                     std::to_string(j) + " is not a finite non-negative number");
            }
            l(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = std::sqrt(cls.covariance[j]);
        }
        return l;
    }
    if (cls.covariance.size() != d * d) {
        throw Error(ErrorKind::contract, std::string("invalid covariance: ") + which + " covariance needs " +
                                             std::to_string(d) + " or " + std::to_string(d * d) + " entries");
    }
    const auto n = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            cov(r, c) = cls.covariance[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(c)];
        }
    }
    if (!cov.allFinite() || (cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + cov.cwiseAbs().maxCoeff())) {
        throw Error(ErrorKind::contract, std::string("invalid covariance: ") + which + " covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd lambda = eig.eigenvalues();
    const double tol = 1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
    if (lambda.minCoeff() < -tol) {
        throw Error(ErrorKind::contract, std::string("invalid covariance: ") + which +
                                             " covariance is not positive semi-definite");
    }
    return eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

} // namespace

Dataset gen_synthetic(const SyntheticSpec& spec)
{
    const std::size_t d = spec.schema.size();
    if (spec.positive.count == 0 || spec.negative.count == 0) {
        throw Error(ErrorKind::contract, "synthetic data needs at least one row per class");
    }
    if (!(spec.missing_rate >= 0.0 && spec.missing_rate < 1.0)) {
        throw Error(ErrorKind::contract, "missing rate must lie in [0, 1)");
    }
    const Eigen::MatrixXd l_pos = covariance_factor(spec.positive, d, "positive");
    const Eigen::MatrixXd l_neg = covariance_factor(spec.negative, d, "negative");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution drop(spec.missing_rate);

    const std::size_t n = spec.positive.count + spec.negative.count;
    std::vector<double> values;
    values.reserve(n * d);
    std::vector<int> labels;
    labels.reserve(n);
    Eigen::VectorXd z(static_cast<Eigen::Index>(d));

    auto emit = [&](const ClassDistribution& cls, const Eigen::MatrixXd& l, int label) {
        for (std::size_t i = 0; i < cls.count; ++i) {
            for (auto& zi : z) {
                zi = normal(rng);
            }
            const Eigen::VectorXd x = l * z;
            for (std::size_t j = 0; j < d; ++j) {
                values.push_back(cls.mean[j] + x(static_cast<Eigen::Index>(j)));
            }
            labels.push_back(label);
        }
    };
    emit(spec.positive, l_pos, kPositive);
    emit(spec.negative, l_neg, kNegative);

    if (spec.missing_rate > 0.0) {
        for (auto& v : values) {
            if (drop(rng)) {
                v = kMissing;
            }
        }
    }
    return Dataset(spec.schema, std::move(values), std::move(labels));
}

SyntheticSpec separated_gaussians(FeatureSchema schema, std::size_t n_positive, std::size_t n_negative,
                                  double separation, double missing_rate, std::uint64_t seed)
{
    const std::size_t d = schema.size();
    SyntheticSpec spec;
    spec.positive = {std::vector<double>(d, separation / 2.0), std::vector<double>(d, 1.0), n_positive};
    spec.negative = {std::vector<double>(d, -separation / 2.0), std::vector<double>(d, 1.0), n_negative};
    spec.schema = std::move(schema);
    spec.missing_rate = missing_rate;
    spec.seed = seed;
    return spec;
}

} // namespace triage::data
