#pragma once

#include "triage/data/dataset.hpp"

#include <list>
#include <memory>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace triage::svm {

enum class KernelKind { linear, rbf };

std::string_view to_string(KernelKind k) noexcept;

struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double gamma = 0.0; // rbf only

    static KernelSpec linear() { return {}; }
    static KernelSpec rbf(double gamma) { return {KernelKind::rbf, gamma}; }

    void validate() const;
    bool operator==(const KernelSpec&) const = default;
};

// linear: a.b; rbf: exp(-gamma * |a - b|^2)
double kernel_eval(const KernelSpec& k, std::span<const double> a, std::span<const double> b);

// Kernel rows over a fixed point set. Up to kFullGramLimit points the whole
// Gram matrix is computed up front; above it rows are computed on demand and
// kept in an LRU cache. Both modes return identical values.
class KernelRows {
public:
    static constexpr std::size_t kFullGramLimit = 4096;

    // `points` is row-major n x d and must outlive this object.
    KernelRows(const KernelSpec& kernel, std::span<const double> points, std::size_t n, std::size_t d,
               std::size_t cache_bytes = std::size_t{256} << 20);

    // Full-Gram mode sharing an already computed n x n matrix.
    KernelRows(std::shared_ptr<const std::vector<double>> gram, std::size_t n);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] double diagonal(std::size_t i) const { return diag_[i]; }

    // Row i of the kernel matrix. The returned handle keeps the row alive.
    class Row {
    public:
        [[nodiscard]] double operator[](std::size_t j) const { return data_[j]; }
        [[nodiscard]] std::span<const double> span() const noexcept { return data_; }

    private:
        friend class KernelRows;
        std::span<const double> data_;
        std::shared_ptr<const std::vector<double>> keep_;
    };
    [[nodiscard]] Row row(std::size_t i) const;

    [[nodiscard]] bool is_full() const noexcept { return gram_ != nullptr; }

private:
    std::vector<double> compute_row(std::size_t i) const;

    KernelSpec kernel_;
    std::span<const double> points_;
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> diag_;
    std::shared_ptr<const std::vector<double>> gram_;

    // LRU mode
    std::size_t capacity_ = 0;
    mutable std::list<std::size_t> lru_;
    mutable std::unordered_map<std::size_t,
                               std::pair<std::shared_ptr<const std::vector<double>>, std::list<std::size_t>::iterator>>
        cache_;
};

// Dense n x n Gram matrix, row-major.
std::vector<double> gram_matrix(const KernelSpec& kernel, std::span<const double> points, std::size_t n,
                                std::size_t d);

} // namespace triage::svm
