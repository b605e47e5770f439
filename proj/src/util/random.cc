#include "psfm/util/random.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace psfm {

std::vector<std::size_t> SampleDistinct(std::size_t population,
                                        std::size_t count,
                                        Rng& rng) {
  if (count > population) {
    throw std::invalid_argument("SampleDistinct: count exceeds population");
  }
  std::vector<std::size_t> sample;
  sample.reserve(count);
  // Rejection sampling is fine for the small minimal-sample sizes used here.
  if (count * 4 < population) {
    std::uniform_int_distribution<std::size_t> dist(0, population - 1);
    while (sample.size() < count) {
      const std::size_t idx = dist(rng);
      if (std::find(sample.begin(), sample.end(), idx) == sample.end()) {
        sample.push_back(idx);
      }
    }
    return sample;
  }
  std::vector<std::size_t> all(population);
  std::iota(all.begin(), all.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> dist(i, population - 1);
    std::swap(all[i], all[dist(rng)]);
  }
  all.resize(count);
  return all;
}

std::size_t RequiredRansacIterations(double inlier_ratio,
                                     std::size_t sample_size,
                                     double confidence,
                                     std::size_t max_iterations) {
  if (inlier_ratio <= 0) return max_iterations;
  if (inlier_ratio >= 1) return 1;
  const double p_good = std::pow(inlier_ratio, static_cast<double>(sample_size));
  if (p_good <= 0) return max_iterations;
  const double denom = std::log1p(-p_good);
  if (denom >= 0) return max_iterations;
  const double n = std::ceil(std::log1p(-confidence) / denom);
  if (!std::isfinite(n) || n > static_cast<double>(max_iterations)) {
    return max_iterations;
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(n));
}

}  // namespace psfm
