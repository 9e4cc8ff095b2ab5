#include "teamprod/triplets.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string_view>
#include <utility>

namespace teamprod {

namespace {

// Unmatched solo projects per node, each list in (timestamp, id) order.
class SoloPool {
 public:
  explicit SoloPool(const TeamNetwork& net) : net_(net), free_(net.num_nodes()) {
    for (NodeIndex i = 0; i < net.num_nodes(); ++i) {
      auto solos = net.solo_projects(i);
      free_[i].assign(solos.begin(), solos.end());
    }
  }

  bool has(NodeIndex i) const { return !free_[i].empty(); }

  // Position in free_[i] of the solo closest in time to `t`.
  std::size_t closest(NodeIndex i, std::int64_t t) const {
    const auto& list = free_[i];
    std::size_t best = 0;
    auto best_gap = gap(list[0], t);
    for (std::size_t k = 1; k < list.size(); ++k) {
      // list is ordered, so the first hit at a given gap is the earlier one
      auto g = gap(list[k], t);
      if (g < best_gap) {
        best_gap = g;
        best = k;
      }
    }
    return best;
  }

  std::size_t take(NodeIndex i, std::size_t pos) {
    auto p = free_[i][pos];
    free_[i].erase(free_[i].begin() + static_cast<std::ptrdiff_t>(pos));
    return p;
  }

 private:
  std::uint64_t gap(std::size_t project, std::int64_t t) const {
    auto ts = net_.project(project).timestamp;
    return ts > t ? static_cast<std::uint64_t>(ts - t) : static_cast<std::uint64_t>(t - ts);
  }

  const TeamNetwork& net_;
  std::vector<std::vector<std::size_t>> free_;
};

std::vector<Triplet> triplets_from(const TeamNetwork& net, SoloPool& pool) {
  std::vector<Triplet> out;
  for (auto p : net.chronological()) {
    auto ws = net.workers(p);
    if (ws.size() != 2) continue;
    auto a = std::min(ws[0], ws[1]);
    auto b = std::max(ws[0], ws[1]);
    if (!pool.has(a) || !pool.has(b)) continue;
    auto t = net.project(p).timestamp;
    auto sa = pool.take(a, pool.closest(a, t));
    auto sb = pool.take(b, pool.closest(b, t));
    out.push_back(Triplet{net.node_id(a), net.node_id(b), net.outcome(sa), net.outcome(sb),
                          net.outcome(p), net.project(sa).id, net.project(sb).id,
                          net.project(p).id});
  }
  return out;
}

std::vector<Quadruplet> quadruplets_from(const TeamNetwork& net, SoloPool& pool) {
  std::vector<Quadruplet> out;
  for (auto p : net.chronological()) {
    auto ws = net.workers(p);
    if (ws.size() != 3) continue;
    std::array<NodeIndex, 3> m{ws[0], ws[1], ws[2]};
    std::sort(m.begin(), m.end());
    if (!pool.has(m[0]) || !pool.has(m[1]) || !pool.has(m[2])) continue;
    auto t = net.project(p).timestamp;
    std::array<std::size_t, 3> s{};
    for (int r = 0; r < 3; ++r) s[r] = pool.take(m[r], pool.closest(m[r], t));
    Quadruplet q;
    q.i = net.node_id(m[0]);
    q.j = net.node_id(m[1]);
    q.k = net.node_id(m[2]);
    q.y_i = net.outcome(s[0]);
    q.y_j = net.outcome(s[1]);
    q.y_k = net.outcome(s[2]);
    q.y_ijk = net.outcome(p);
    q.solo_i_id = net.project(s[0]).id;
    q.solo_j_id = net.project(s[1]).id;
    q.solo_k_id = net.project(s[2]).id;
    q.team_id = net.project(p).id;
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace

std::vector<Triplet> build_triplets(const TeamNetwork& net) {
  SoloPool pool(net);
  return triplets_from(net, pool);
}

std::vector<Quadruplet> build_quadruplets(const TeamNetwork& net) {
  SoloPool pool(net);
  return quadruplets_from(net, pool);
}

TupleSet build_tuples(const TeamNetwork& net) {
  SoloPool pool(net);
  TupleSet out;
  out.triplets = triplets_from(net, pool);
  out.quadruplets = quadruplets_from(net, pool);
  return out;
}

std::vector<Triplet> select_unique_pairs(const std::vector<Triplet>& triplets) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  std::vector<Triplet> out;
  for (const auto& t : triplets) {
    auto key = t.i < t.j ? std::pair<std::string_view, std::string_view>{t.i, t.j}
                         : std::pair<std::string_view, std::string_view>{t.j, t.i};
    if (seen.insert(key).second) out.push_back(t);
  }
  return out;
}

}  // namespace teamprod
