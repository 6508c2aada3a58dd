#pragma once

#include "triage/data/dataset.hpp"

#include <cstdint>
#include <vector>

namespace triage::data {

// Multivariate normal class. `covariance` is either d entries (diagonal) or
// d*d entries (row-major, symmetric positive semi-definite).
struct ClassDistribution {
    std::vector<double> mean;
    std::vector<double> covariance;
    std::size_t count = 0;
};

struct SyntheticSpec {
    FeatureSchema schema;
    ClassDistribution positive;
    ClassDistribution negative;
    double missing_rate = 0.0;   // per-cell probability of a missing marker
    std::uint64_t seed = 0;
};

// Deterministic for a fixed spec. Positive rows come first.
Dataset gen_synthetic(const SyntheticSpec& spec);

// Unit-variance classes whose means sit at +separation/2 and -separation/2 on
// every feature.
SyntheticSpec separated_gaussians(FeatureSchema schema, std::size_t n_positive,
                                  std::size_t n_negative, double separation,
                                  double missing_rate, std::uint64_t seed);

} // namespace triage::data
