#include "triage/svm/solver.hpp"

#include "triage/error.hpp"

#include <cmath>
#include <limits>

namespace triage::svm {

namespace {

constexpr double kTau = 1e-12; // curvature floor for non-positive-definite pairs
constexpr double kInf = std::numeric_limits<double>::infinity();

class Smo {
public:
    Smo(const KernelRows& k, std::span<const int> y, std::span<const double> upper)
        : k_(k), y_(y), upper_(upper), n_(y.size())
    {
        state_.alpha.assign(n_, 0.0);
        state_.gradient.assign(n_, -1.0);
    }

    SolverState run(const SolverSettings& s)
    {
        if (s.record_trace) {
            state_.objective_trace.push_back(0.0);
        }
        while (true) {
            std::size_t i = 0;
            std::size_t j = 0;
            const double violation = select(i, j);
            state_.max_violation = violation;
            if (violation < s.tol || j == n_) {
                state_.converged = true;
                break;
            }
            if (state_.iterations >= s.max_passes) {
                state_.converged = false;
                break;
            }
            update(i, j);
            ++state_.iterations;
            if (s.record_trace) {
                state_.objective_trace.push_back(objective());
            }
        }
        state_.bias = bias();
        return std::move(state_);
    }

private:
    [[nodiscard]] bool at_upper(std::size_t t) const { return state_.alpha[t] >= upper_[t]; }
    [[nodiscard]] bool at_lower(std::size_t t) const { return state_.alpha[t] <= 0.0; }

    // I_up: alpha_t can move so that y_t alpha_t grows.
    [[nodiscard]] bool in_up(std::size_t t) const { return y_[t] > 0 ? !at_upper(t) : !at_lower(t); }
    [[nodiscard]] bool in_low(std::size_t t) const { return y_[t] > 0 ? !at_lower(t) : !at_upper(t); }

    // Returns m(alpha) - M(alpha); sets j = n when no admissible pair exists.
    double select(std::size_t& i_out, std::size_t& j_out)
    {
        const auto& g = state_.gradient;
        double g_max = -kInf;
        std::size_t i = n_;
        for (std::size_t t = 0; t < n_; ++t) {
            if (in_up(t) && -y_[t] * g[t] > g_max) {
                g_max = -y_[t] * g[t];
                i = t;
            }
        }
        if (i == n_) {
            i_out = j_out = n_;
            return 0.0;
        }
        const auto qi = k_.row(i);
        double g_min = kInf;
        double best_gain = kInf;
        std::size_t j = n_;
        for (std::size_t t = 0; t < n_; ++t) {
            if (!in_low(t)) {
                continue;
            }
            const double v = -y_[t] * g[t];
            g_min = std::min(g_min, v);
            const double b = g_max - v;
            if (b > 0.0) {
                double a = k_.diagonal(i) + k_.diagonal(t) - 2.0 * qi[t];
                if (a <= 0.0) {
                    a = kTau;
                }
                const double gain = -(b * b) / a;
                if (gain < best_gain) {
                    best_gain = gain;
                    j = t;
                }
            }
        }
        i_out = i;
        j_out = j;
        return g_min == kInf ? 0.0 : g_max - g_min;
    }

    void update(std::size_t i, std::size_t j)
    {
        auto& a = state_.alpha;
        auto& g = state_.gradient;
        const auto qi = k_.row(i);
        const auto qj = k_.row(j);
        const double ci = upper_[i];
        const double cj = upper_[j];
        const double old_i = a[i];
        const double old_j = a[j];
        const double kij = qi[j];

        if (y_[i] != y_[j]) {
            double quad = k_.diagonal(i) + k_.diagonal(j) - 2.0 * kij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (-g[i] - g[j]) / quad;
            const double diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if (diff > 0.0) {
                if (a[j] < 0.0) {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if (diff > ci - cj) {
                if (a[i] > ci) {
                    a[i] = ci;
                    a[j] = ci - diff;
                }
            } else if (a[j] > cj) {
                a[j] = cj;
                a[i] = cj + diff;
            }
        } else {
            double quad = k_.diagonal(i) + k_.diagonal(j) - 2.0 * kij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (g[i] - g[j]) / quad;
            const double sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if (sum > ci) {
                if (a[i] > ci) {
                    a[i] = ci;
                    a[j] = sum - ci;
                }
            } else if (a[j] < 0.0) {
                a[j] = 0.0;
                a[i] = sum;
            }
            if (sum > cj) {
                if (a[j] > cj) {
                    a[j] = cj;
                    a[i] = sum - cj;
                }
            } else if (a[i] < 0.0) {
                a[i] = 0.0;
                a[j] = sum;
            }
        }

        // Q_tk = y_t y_k K_tk
        const double di = (a[i] - old_i) * y_[i];
        const double dj = (a[j] - old_j) * y_[j];
        for (std::size_t t = 0; t < n_; ++t) {
            g[t] += y_[t] * (qi[t] * di + qj[t] * dj);
        }
    }

    // J(alpha) = 1/2 sum_i alpha_i (1 - G_i)
    [[nodiscard]] double objective() const
    {
        double s = 0.0;
        for (std::size_t t = 0; t < n_; ++t) {
            s += state_.alpha[t] * (1.0 - state_.gradient[t]);
        }
        return 0.5 * s;
    }

    // b = -y_i G_i on free vectors (averaged); midpoint of the feasible
    // interval when every alpha sits on a bound.
    [[nodiscard]] double bias() const
    {
        double ub = kInf;
        double lb = -kInf;
        double free_sum = 0.0;
        std::size_t n_free = 0;
        for (std::size_t t = 0; t < n_; ++t) {
            const double yg = y_[t] * state_.gradient[t];
            if (at_upper(t)) {
                if (y_[t] < 0) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else if (at_lower(t)) {
                if (y_[t] > 0) {
                    ub = std::min(ub, yg);
                } else {
                    lb = std::max(lb, yg);
                }
            } else {
                ++n_free;
                free_sum += yg;
            }
        }
        const double rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : (ub + lb) / 2.0;
        // + 0.0 folds a negative zero into +0 so encodings stay canonical
        return -rho + 0.0;
    }

    const KernelRows& k_;
    std::span<const int> y_;
    std::span<const double> upper_;
    std::size_t n_;
    SolverState state_;
};

} // namespace

SolverState solve_dual(const KernelRows& kernel, std::span<const int> labels, std::span<const double> upper,
                       const SolverSettings& settings)
{
    const std::size_t n = labels.size();
    if (kernel.size() != n || upper.size() != n) {
        throw Error(ErrorKind::dimension, "dual problem sizes disagree");
    }
    if (!(settings.tol > 0.0)) {
        throw Error(ErrorKind::contract, "solver tolerance must be positive");
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (labels[t] != 1 && labels[t] != -1) {
            throw Error(ErrorKind::contract, "dual labels must be +1 or -1");
        }
        if (!(upper[t] > 0.0)) {
            throw Error(ErrorKind::contract, "box bounds must be positive");
        }
    }
    return Smo(kernel, labels, upper).run(settings);
}

double dual_objective(std::span<const double> alpha, std::span<const int> labels, const KernelRows& kernel)
{
    const std::size_t n = alpha.size();
    if (labels.size() != n || kernel.size() != n) {
        throw Error(ErrorKind::dimension, "dual objective sizes disagree");
    }
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        linear += alpha[i];
        if (alpha[i] == 0.0) {
            continue;
        }
        const auto row = kernel.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            quad += alpha[i] * alpha[j] * labels[i] * labels[j] * row[j];
        }
    }
    return linear - 0.5 * quad;
}

} // namespace triage::svm
