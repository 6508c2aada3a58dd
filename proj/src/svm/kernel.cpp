#include "triage/svm/kernel.hpp"

#include "triage/error.hpp"

#include <algorithm>
#include <cmath>

namespace triage::svm {

namespace {

double dot(const double* a, const double* b, std::size_t d)
{
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        s += a[k] * b[k];
    }
    return s;
}

double squared_distance(const double* a, const double* b, std::size_t d)
{
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

double evaluate(const KernelSpec& k, const double* a, const double* b, std::size_t d)
{
    return k.kind == KernelKind::linear ? dot(a, b, d) : std::exp(-k.gamma * squared_distance(a, b, d));
}

} // namespace

std::string_view to_string(KernelKind k) noexcept { return k == KernelKind::linear ? "linear" : "rbf"; }

void KernelSpec::validate() const
{
    if (kind == KernelKind::rbf && !(gamma > 0.0 && std::isfinite(gamma))) {
        throw Error(ErrorKind::contract, "RBF kernel needs gamma > 0");
    }
}

double kernel_eval(const KernelSpec& k, std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw Error(ErrorKind::dimension, "kernel arguments have dimensions " + std::to_string(a.size()) + " and " +
                                              std::to_string(b.size()));
    }
    return evaluate(k, a.data(), b.data(), a.size());
}

std::vector<double> gram_matrix(const KernelSpec& kernel, std::span<const double> points, std::size_t n,
                                std::size_t d)
{
    kernel.validate();
    std::vector<double> g(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = points.data() + i * d;
        for (std::size_t j = i; j < n; ++j) {
            const double v = evaluate(kernel, a, points.data() + j * d, d);
            g[i * n + j] = v;
            g[j * n + i] = v;
        }
    }
    return g;
}

KernelRows::KernelRows(const KernelSpec& kernel, std::span<const double> points, std::size_t n, std::size_t d,
                       std::size_t cache_bytes)
    : kernel_(kernel), points_(points), n_(n), d_(d)
{
    kernel_.validate();
    if (points.size() != n * d) {
        throw Error(ErrorKind::dimension, "kernel point buffer does not hold n x d values");
    }
    if (n <= kFullGramLimit) {
        gram_ = std::make_shared<const std::vector<double>>(gram_matrix(kernel, points, n, d));
        diag_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            diag_[i] = (*gram_)[i * n + i];
        }
        return;
    }
    diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* a = points.data() + i * d;
        diag_[i] = evaluate(kernel, a, a, d);
    }
    capacity_ = std::max<std::size_t>(2, cache_bytes / (n * sizeof(double)));
}

KernelRows::KernelRows(std::shared_ptr<const std::vector<double>> gram, std::size_t n)
    : n_(n), gram_(std::move(gram))
{
    if (!gram_ || gram_->size() != n * n) {
        throw Error(ErrorKind::dimension, "precomputed Gram matrix is not n x n");
    }
    diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag_[i] = (*gram_)[i * n + i];
    }
}

std::vector<double> KernelRows::compute_row(std::size_t i) const
{
    std::vector<double> r(n_);
    const double* a = points_.data() + i * d_;
    for (std::size_t j = 0; j < n_; ++j) {
        r[j] = evaluate(kernel_, a, points_.data() + j * d_, d_);
    }
    return r;
}

KernelRows::Row KernelRows::row(std::size_t i) const
{
    Row r;
    if (gram_) {
        r.data_ = std::span<const double>(gram_->data() + i * n_, n_);
        return r;
    }
    if (auto it = cache_.find(i); it != cache_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second.second);
        r.keep_ = it->second.first;
    } else {
        if (cache_.size() >= capacity_) {
            cache_.erase(lru_.back());
            lru_.pop_back();
        }
        lru_.push_front(i);
        r.keep_ = std::make_shared<const std::vector<double>>(compute_row(i));
        cache_.emplace(i, std::make_pair(r.keep_, lru_.begin()));
    }
    r.data_ = *r.keep_;
    return r;
}

} // namespace triage::svm
