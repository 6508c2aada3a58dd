#include "svm_oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace triage::oracle {

std::vector<double> kernel_matrix(const svm::KernelSpec& k, std::span<const double> points, std::size_t n,
                                  std::size_t d)
{
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            K[i * n + j] = svm::kernel_eval(k, points.subspan(i * d, d), points.subspan(j * d, d));
        }
    }
    return K;
}

double dual_value(std::span<const double> alpha, std::span<const int> y, std::span<const double> K)
{
    const std::size_t n = alpha.size();
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += alpha[i];
        for (std::size_t j = 0; j < n; ++j) {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * K[i * n + j];
        }
    }
    return linear - 0.5 * quad;
}

double grid_maximum(std::span<const int> y, std::span<const double> K, double C, int steps)
{
    const std::size_t n = y.size();
    std::vector<int> idx(n - 1, 0);
    std::vector<double> alpha(n, 0.0);
    double best = -std::numeric_limits<double>::infinity();
    const double step = C / steps;
    for (;;) {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            alpha[i] = idx[i] * step;
            s += alpha[i] * y[i];
        }
        const double last = -s * y[n - 1];
        if (last >= -1e-12 && last <= C + 1e-12) {
            alpha[n - 1] = std::clamp(last, 0.0, C);
            best = std::max(best, dual_value(alpha, y, K));
        }
        std::size_t k = 0;
        while (k < idx.size() && ++idx[k] > steps) {
            idx[k++] = 0;
        }
        if (k == idx.size()) {
            break;
        }
    }
    return best;
}

double active_set_maximum(std::span<const int> y, std::span<const double> K, double C)
{
    const std::size_t n = y.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        total *= 3;
    }
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> alpha(n);
    std::vector<std::size_t> free;
    for (std::size_t code = 0; code < total; ++code) {
        // 0 -> at zero, 1 -> at C, 2 -> free
        free.clear();
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            const auto state = c % 3;
            c /= 3;
            alpha[i] = state == 1 ? C : 0.0;
            if (state == 2) {
                free.push_back(i);
            }
        }
        if (!free.empty()) {
            // Stationarity on the face: for i in F,
            //   sum_j y_i y_j K_ij a_j + b y_i = 1, and sum_j y_j a_j = 0.
            const auto m = free.size();
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
            for (std::size_t r = 0; r < m; ++r) {
                const auto i = free[r];
                double fixed = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    fixed += y[i] * y[j] * K[i * n + j] * alpha[j];
                }
                for (std::size_t s = 0; s < m; ++s) {
                    const auto j = free[s];
                    A(r, s) = y[i] * y[j] * K[i * n + j];
                }
                A(r, m) = y[i];
                rhs(r) = 1.0 - fixed;
            }
            double fixed_sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                fixed_sum += y[j] * alpha[j];
            }
            for (std::size_t s = 0; s < m; ++s) {
                A(m, s) = y[free[s]];
            }
            rhs(m) = -fixed_sum;
            const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(rhs);
            if ((A * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
                continue;
            }
            bool inside = true;
            for (std::size_t s = 0; s < m; ++s) {
                const double v = sol(static_cast<Eigen::Index>(s));
                inside = inside && v >= -1e-10 && v <= C + 1e-10;
                alpha[free[s]] = std::clamp(v, 0.0, C);
            }
            if (!inside) {
                continue;
            }
        }
        double eq = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            eq += y[j] * alpha[j];
        }
        if (std::abs(eq) > 1e-9 * (1.0 + C)) {
            continue;
        }
        best = std::max(best, dual_value(alpha, y, K));
    }
    return best;
}

} // namespace triage::oracle
