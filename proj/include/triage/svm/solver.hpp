#pragma once

#include "triage/svm/kernel.hpp"

#include <span>
#include <vector>

namespace triage::svm {

struct SolverSettings {
    double tol = 1e-3;                  // stop once the maximal KKT violation drops below this
    std::size_t max_passes = 1'000'000; // pair updates
    bool record_trace = false;          // keep the dual objective after every update
};

// Working state of the dual solver once it stops.
struct SolverState {
    std::vector<double> alpha;
    std::vector<double> gradient;        // (Q alpha - 1), Q_ij = y_i y_j K_ij
    double bias = 0.0;
    double max_violation = 0.0;          // m(alpha) - M(alpha)
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace; // dual objective after each accepted update
};

// Maximizes sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij subject to
// 0 <= a_i <= upper[i] and sum_i a_i y_i = 0 by SMO: the first index is the
// maximal KKT violator, the second maximizes the second-order gain.
SolverState solve_dual(const KernelRows& kernel, std::span<const int> labels, std::span<const double> upper,
                       const SolverSettings& settings);

// Direct double-sum evaluation of the dual objective.
double dual_objective(std::span<const double> alpha, std::span<const int> labels, const KernelRows& kernel);

} // namespace triage::svm
