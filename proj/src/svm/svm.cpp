#include "triage/svm/svm.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace triage::svm {

void SvmHyperparams::validate() const
{
    if (!(C > 0.0 && std::isfinite(C))) {
        throw Error(ErrorKind::contract, "C must be positive");
    }
    kernel.validate();
    if (!(class_weights.positive > 0.0) || !(class_weights.negative > 0.0)) {
        throw Error(ErrorKind::contract, "class weights must be positive");
    }
    if (!(tol > 0.0)) {
        throw Error(ErrorKind::contract, "tolerance must be positive");
    }
    if (max_passes < 1) {
        throw Error(ErrorKind::contract, "max_passes must be at least 1");
    }
}

SvmModel::SvmModel(KernelSpec kernel, std::size_t n_features, std::vector<double> support_vectors,
                   std::vector<double> dual_coefs, double bias, std::optional<std::vector<double>> weight_vector,
                   bool converged, double kkt_violation, std::size_t iterations)
    : kernel_(kernel)
    , n_features_(n_features)
    , support_vectors_(std::move(support_vectors))
    , dual_coefs_(std::move(dual_coefs))
    , bias_(bias)
    , weight_(std::move(weight_vector))
    , converged_(converged)
    , kkt_violation_(kkt_violation)
    , iterations_(iterations)
{
    kernel_.validate();
    if (support_vectors_.size() != dual_coefs_.size() * n_features_) {
        throw Error(ErrorKind::dimension, "support vectors do not match " + std::to_string(dual_coefs_.size()) +
                                              " coefficients of dimension " + std::to_string(n_features_));
    }
    if (kernel_.kind == KernelKind::linear) {
        if (!weight_) {
            std::vector<double> w(n_features_, 0.0);
            for (std::size_t i = 0; i < dual_coefs_.size(); ++i) {
                const auto sv = support_vector(i);
                for (std::size_t k = 0; k < n_features_; ++k) {
                    w[k] += dual_coefs_[i] * sv[k];
                }
            }
            weight_ = std::move(w);
        } else if (weight_->size() != n_features_) {
            throw Error(ErrorKind::dimension, "weight vector has " + std::to_string(weight_->size()) +
                                                  " entries, model has " + std::to_string(n_features_) + " features");
        }
    } else if (weight_) {
        throw Error(ErrorKind::contract, "only linear models carry a weight vector");
    }
}

void SvmModel::check_input(std::span<const double> x) const
{
    if (x.size() != n_features_) {
        throw Error(ErrorKind::dimension, "SVM expects " + std::to_string(n_features_) + " features, got " +
                                              std::to_string(x.size()));
    }
}

double SvmModel::decision_dual(std::span<const double> x) const
{
    check_input(x);
    double s = 0.0;
    for (std::size_t i = 0; i < dual_coefs_.size(); ++i) {
        s += dual_coefs_[i] * kernel_eval(kernel_, support_vector(i), x);
    }
    return s + bias_;
}

double SvmModel::decision(std::span<const double> x) const
{
    if (!weight_) {
        return decision_dual(x);
    }
    check_input(x);
    double s = 0.0;
    for (std::size_t k = 0; k < n_features_; ++k) {
        s += (*weight_)[k] * x[k];
    }
    return s + bias_;
}

Decision SvmModel::predict(std::span<const double> x) const
{
    const double score = decision(x);
    return {score >= 0.0 ? data::kPositive : data::kNegative, score};
}

SvmFit fit_svm_detailed(const data::Dataset& train, const SvmHyperparams& hp, bool record_trace,
                        const KernelRows* kernel)
{
    hp.validate();
    data::require_both_classes(train, "SVM");
    const std::size_t n = train.n_samples();
    const std::size_t d = train.n_features();
    for (double v : train.values()) {
        if (data::is_missing(v)) {
            throw Error(ErrorKind::contract, "SVM: training data contains missing values");
        }
    }

    std::optional<KernelRows> own;
    if (kernel == nullptr) {
        own.emplace(hp.kernel, train.values(), n, d);
        kernel = &*own;
    } else if (kernel->size() != n) {
        throw Error(ErrorKind::dimension, "precomputed kernel does not match the training set");
    }

    SvmFit fit;
    fit.upper.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fit.upper[i] = hp.C * hp.class_weights.of(train.label(i));
    }
    fit.state = solve_dual(*kernel, train.labels(), fit.upper,
                           SolverSettings{hp.tol, hp.max_passes, record_trace});

    std::vector<double> svs;
    std::vector<double> coefs;
    for (std::size_t i = 0; i < n; ++i) {
        if (fit.state.alpha[i] > kSupportThreshold) {
            const auto x = train.row(i);
            svs.insert(svs.end(), x.begin(), x.end());
            coefs.push_back(fit.state.alpha[i] * train.label(i));
        }
    }
    fit.model = SvmModel(hp.kernel, d, std::move(svs), std::move(coefs), fit.state.bias, std::nullopt,
                         fit.state.converged, fit.state.max_violation, fit.state.iterations);
    return fit;
}

SvmModel fit_svm(const data::Dataset& train, const SvmHyperparams& hp)
{
    return fit_svm_detailed(train, hp).model;
}

Decision predict_svm(const SvmModel& model, std::span<const double> x) { return model.predict(x); }

double dual_objective(const SvmModel& model)
{
    const std::size_t m = model.n_support();
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        linear += std::abs(model.dual_coefs()[i]);
        for (std::size_t j = 0; j < m; ++j) {
            quad += model.dual_coefs()[i] * model.dual_coefs()[j] *
                    kernel_eval(model.kernel(), model.support_vector(i), model.support_vector(j));
        }
    }
    return linear - 0.5 * quad;
}

double max_kkt_violation(const SvmFit& fit, const data::Dataset& train)
{
    const auto& alpha = fit.state.alpha;
    double worst = 0.0;
    for (std::size_t i = 0; i < train.n_samples(); ++i) {
        // margin computed from the full alpha vector, so dropped tiny
        // coefficients do not enter the check
        double f = fit.state.bias;
        for (std::size_t j = 0; j < train.n_samples(); ++j) {
            if (alpha[j] != 0.0) {
                f += alpha[j] * train.label(j) * kernel_eval(fit.model.kernel(), train.row(j), train.row(i));
            }
        }
        const double margin = train.label(i) * f;
        double v = 0.0;
        if (alpha[i] <= 0.0) {
            v = std::max(0.0, 1.0 - margin);
        } else if (alpha[i] >= fit.upper[i]) {
            v = std::max(0.0, margin - 1.0);
        } else {
            v = std::abs(margin - 1.0);
        }
        worst = std::max(worst, v);
    }
    return worst;
}

std::vector<double> svm_importance(const SvmModel& model)
{
    if (model.kernel().kind != KernelKind::linear || !model.weight_vector()) {
        throw Error(ErrorKind::unsupported, "feature importance is only defined for linear-kernel SVMs");
    }
    std::vector<double> imp(model.n_features());
    for (std::size_t k = 0; k < imp.size(); ++k) {
        imp[k] = std::abs((*model.weight_vector())[k]);
    }
    const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
    if (total > 0.0) {
        for (auto& v : imp) {
            v /= total;
        }
    }
    return imp;
}

} // namespace triage::svm
