#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace psfm {

using Rng = std::mt19937_64;

// Draws `count` distinct indices from [0, population) in random order.
std::vector<std::size_t> SampleDistinct(std::size_t population,
                                        std::size_t count,
                                        Rng& rng);

// Number of RANSAC iterations needed to draw at least one all-inlier
// minimal sample with the given confidence.
std::size_t RequiredRansacIterations(double inlier_ratio,
                                     std::size_t sample_size,
                                     double confidence,
                                     std::size_t max_iterations);

}  // namespace psfm
