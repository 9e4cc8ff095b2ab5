#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "teamprod/moments.hpp"
#include "teamprod/network.hpp"

namespace teamprod {

struct FixedEffectEstimates {
  std::vector<std::string> node_ids;
  std::vector<double> alpha;             // NaN where not identified
  std::vector<std::size_t> moment_count;  // projects contributing to the node's equations
  std::vector<bool> identified;
  std::vector<std::size_t> component;    // connected component of the equation system

  std::size_t num_identified() const;
};

// Stacked least squares over bucket-averaged moment equations:
//   solo bucket of i:    alpha_i * mean(Y) = mean(Y^2) - sigma_1^2
//   pair bucket of i,j:  lambda (alpha_i + alpha_j) * mean(Y) = mean(Y^2) - sigma_2^2
//   triple bucket:       lambda3 (alpha_i + alpha_j + alpha_k) * mean(Y) = mean(Y^2) - sigma_3^2
// Each row is weighted by the square root of its project count, so the fit
// equals least squares over the individual project moments. Triple buckets are
// used only when params.lambda3 is set. Components without a solo anchor, or
// whose system is rank-deficient, are flagged rather than solved.
FixedEffectEstimates recover_fixed_effects(const TeamNetwork& net, const Params& params);

}  // namespace teamprod
