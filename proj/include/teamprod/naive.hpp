#pragma once

#include <span>
#include <vector>

#include "teamprod/network.hpp"

namespace teamprod {

// A node pair with at least one solo project each and at least one joint project.
struct EligiblePair {
  NodeIndex i = 0;
  NodeIndex j = 0;
  double team_mean = 0.0;  // mean over L_ij
  double solo_sum = 0.0;   // mean over L_i plus mean over L_j
};

std::vector<EligiblePair> eligible_pairs(const TeamNetwork& net);

// Ratio of summed team means to summed solo means over eligible pairs. Uses
// every link in the buckets, not only triplet-matched ones. Throws
// DegenerateData when no pair is eligible or the denominator is zero.
double naive_lambda(std::span<const EligiblePair> pairs);
double naive_lambda(const TeamNetwork& net);

// Average gain of a two-person team of identical workers, 2 lambda - 1.
inline double collaboration_premium(double lambda) { return 2.0 * lambda - 1.0; }

}  // namespace teamprod
