#pragma once

#include <string>
#include <vector>

#include "teamprod/network.hpp"

namespace teamprod {

// Two solo outcomes and one joint outcome; i < j in node-id order.
struct Triplet {
  std::string i, j;
  double y_i = 0.0, y_j = 0.0, y_ij = 0.0;
  std::string solo_i_id, solo_j_id, team_id;
};

// Three solo outcomes and one three-worker outcome; i < j < k.
struct Quadruplet {
  std::string i, j, k;
  double y_i = 0.0, y_j = 0.0, y_k = 0.0, y_ijk = 0.0;
  std::string solo_i_id, solo_j_id, solo_k_id, team_id;
};

struct TupleSet {
  std::vector<Triplet> triplets;
  std::vector<Quadruplet> quadruplets;
};

// Greedy time-matching of team projects to unmatched solo projects. Team
// projects are visited in (timestamp, id) order; each worker takes the unmatched
// solo closest in time (ties: earlier timestamp, then smaller id). No project
// is used twice.
std::vector<Triplet> build_triplets(const TeamNetwork& net);
std::vector<Quadruplet> build_quadruplets(const TeamNetwork& net);

// Triplets first, then quadruplets from the solos that remain.
TupleSet build_tuples(const TeamNetwork& net);

// Keeps the first triplet of every unordered node pair.
std::vector<Triplet> select_unique_pairs(const std::vector<Triplet>& triplets);

}  // namespace teamprod
