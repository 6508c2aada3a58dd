#pragma once

#include "triage/data/dataset.hpp"
#include "triage/svm/kernel.hpp"
#include "triage/svm/solver.hpp"

#include <optional>
#include <span>
#include <vector>

namespace triage::svm {

struct SvmHyperparams {
    double C = 1.0;
    KernelSpec kernel;
    data::ClassWeights class_weights; // per-sample cost is C * weight(label)
    double tol = 1e-3;
    std::size_t max_passes = 1'000'000;

    void validate() const;
    bool operator==(const SvmHyperparams&) const = default;
};

// Coefficients below this are not support vectors.
inline constexpr double kSupportThreshold = 1e-8;

struct Decision {
    int label = data::kPositive;
    double score = 0.0;
};

class SvmModel {
public:
    SvmModel() = default;
    // support_vectors: row-major (n_sv x n_features). For the linear kernel
    // the weight vector is derived when not supplied.
    SvmModel(KernelSpec kernel, std::size_t n_features, std::vector<double> support_vectors,
             std::vector<double> dual_coefs, double bias, std::optional<std::vector<double>> weight_vector = {},
             bool converged = true, double kkt_violation = 0.0, std::size_t iterations = 0);

    [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
    [[nodiscard]] std::size_t n_support() const noexcept { return dual_coefs_.size(); }
    [[nodiscard]] std::span<const double> support_vector(std::size_t i) const
    {
        return {support_vectors_.data() + i * n_features_, n_features_};
    }
    [[nodiscard]] const std::vector<double>& support_vectors() const noexcept { return support_vectors_; }
    // alpha_i * y_i
    [[nodiscard]] const std::vector<double>& dual_coefs() const noexcept { return dual_coefs_; }
    [[nodiscard]] double bias() const noexcept { return bias_; }
    [[nodiscard]] const std::optional<std::vector<double>>& weight_vector() const noexcept { return weight_; }

    [[nodiscard]] bool converged() const noexcept { return converged_; }
    [[nodiscard]] double kkt_violation() const noexcept { return kkt_violation_; }
    [[nodiscard]] std::size_t iterations() const noexcept { return iterations_; }

    // sum_i c_i K(sv_i, x) + b
    [[nodiscard]] double decision_dual(std::span<const double> x) const;
    // w.x + b for the linear kernel, the dual sum otherwise
    [[nodiscard]] double decision(std::span<const double> x) const;
    // score >= 0 -> +1
    [[nodiscard]] Decision predict(std::span<const double> x) const;

    bool operator==(const SvmModel&) const = default;

private:
    void check_input(std::span<const double> x) const;

    KernelSpec kernel_;
    std::size_t n_features_ = 0;
    std::vector<double> support_vectors_;
    std::vector<double> dual_coefs_;
    double bias_ = 0.0;
    std::optional<std::vector<double>> weight_;
    bool converged_ = true;
    double kkt_violation_ = 0.0;
    std::size_t iterations_ = 0;
};

// Model plus the full solver state (alpha for every training row).
struct SvmFit {
    SvmModel model;
    SolverState state;
    std::vector<double> upper; // per-sample box bound C * weight(y_i)
};

// `kernel`, when given, must be the kernel matrix of `train` under hp.kernel;
// grid search passes one shared matrix to fits that differ only in C.
SvmFit fit_svm_detailed(const data::Dataset& train, const SvmHyperparams& hp, bool record_trace = false,
                        const KernelRows* kernel = nullptr);

SvmModel fit_svm(const data::Dataset& train, const SvmHyperparams& hp);

Decision predict_svm(const SvmModel& model, std::span<const double> x);

// Dual objective of a fitted model: sum |c_i| - 1/2 sum_ij c_i c_j K(sv_i, sv_j).
double dual_objective(const SvmModel& model);

// Largest per-sample KKT violation of alpha on the training set, measured
// against y_i f(x_i) with the model's bias.
double max_kkt_violation(const SvmFit& fit, const data::Dataset& train);

// |w| normalized to unit L1 norm. Linear kernel only.
std::vector<double> svm_importance(const SvmModel& model);

} // namespace triage::svm
