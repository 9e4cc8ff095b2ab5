#include "teamprod/fixed_effects.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseQR>
#include <Eigen/OrderingMethods>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace teamprod {

namespace {

struct Row {
  std::vector<NodeIndex> nodes;
  double coef = 0.0;  // multiplies each alpha in `nodes`
  double rhs = 0.0;
  double weight = 1.0;
};

struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::pair<double, double> bucket_moments(const TeamNetwork& net, std::span<const std::size_t> ps) {
  double m1 = 0.0, m2 = 0.0;
  for (auto p : ps) {
    double y = net.outcome(p);
    m1 += y;
    m2 += y * y;
  }
  const double n = static_cast<double>(ps.size());
  return {m1 / n, m2 / n};
}

}  // namespace

std::size_t FixedEffectEstimates::num_identified() const {
  return static_cast<std::size_t>(std::count(identified.begin(), identified.end(), true));
}

FixedEffectEstimates recover_fixed_effects(const TeamNetwork& net, const Params& params) {
  const std::size_t n = net.num_nodes();
  const double s1 = params.sigma_by_size ? (*params.sigma_by_size)[0] : params.sigma;
  const double s2 = params.sigma_by_size ? (*params.sigma_by_size)[1] : params.sigma;
  const double s3 = s2;

  FixedEffectEstimates out;
  out.node_ids = net.node_ids();
  out.alpha.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.moment_count.assign(n, 0);
  out.identified.assign(n, false);
  out.component.assign(n, 0);

  std::vector<Row> rows;
  std::vector<bool> anchored(n, false);
  Dsu dsu(n);
  for (NodeIndex i = 0; i < n; ++i) {
    auto ps = net.solo_projects(i);
    if (ps.empty()) continue;
    auto [m1, m2] = bucket_moments(net, ps);
    rows.push_back({{i}, m1, m2 - s1 * s1, std::sqrt(static_cast<double>(ps.size()))});
    out.moment_count[i] += ps.size();
    anchored[i] = true;
  }
  for (const auto& b : net.pair_buckets()) {
    auto [m1, m2] = bucket_moments(net, b.projects);
    rows.push_back({{b.first, b.second}, params.lambda * m1, m2 - s2 * s2,
                    std::sqrt(static_cast<double>(b.projects.size()))});
    out.moment_count[b.first] += b.projects.size();
    out.moment_count[b.second] += b.projects.size();
    dsu.unite(b.first, b.second);
  }
  if (params.lambda3) {
    for (const auto& b : net.team_buckets()) {
      if (b.members.size() != 3) continue;
      auto [m1, m2] = bucket_moments(net, b.projects);
      rows.push_back({b.members, *params.lambda3 * m1, m2 - s3 * s3,
                      std::sqrt(static_cast<double>(b.projects.size()))});
      for (auto m : b.members) out.moment_count[m] += b.projects.size();
      dsu.unite(b.members[0], b.members[1]);
      dsu.unite(b.members[0], b.members[2]);
    }
  }

  // Group nodes and rows by component; components numbered by their smallest node.
  std::vector<std::size_t> comp_of_root(n, std::numeric_limits<std::size_t>::max());
  std::vector<std::vector<NodeIndex>> comp_nodes;
  for (NodeIndex i = 0; i < n; ++i) {
    auto r = dsu.find(i);
    if (comp_of_root[r] == std::numeric_limits<std::size_t>::max()) {
      comp_of_root[r] = comp_nodes.size();
      comp_nodes.emplace_back();
    }
    out.component[i] = comp_of_root[r];
    comp_nodes[comp_of_root[r]].push_back(i);
  }
  std::vector<std::vector<std::size_t>> comp_rows(comp_nodes.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    comp_rows[out.component[rows[r].nodes.front()]].push_back(r);

  std::vector<Eigen::Index> local(n, -1);
  for (std::size_t c = 0; c < comp_nodes.size(); ++c) {
    const auto& nodes = comp_nodes[c];
    bool anchor = false;
    for (auto v : nodes) anchor = anchor || anchored[v];
    if (!anchor || comp_rows[c].empty()) continue;
    for (std::size_t k = 0; k < nodes.size(); ++k) local[nodes[k]] = static_cast<Eigen::Index>(k);

    const auto m = static_cast<Eigen::Index>(comp_rows[c].size());
    const auto p = static_cast<Eigen::Index>(nodes.size());
    std::vector<Eigen::Triplet<double>> entries;
    Eigen::VectorXd rhs(m);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto& row = rows[comp_rows[c][static_cast<std::size_t>(r)]];
      for (auto v : row.nodes) entries.emplace_back(r, local[v], row.weight * row.coef);
      rhs(r) = row.weight * row.rhs;
    }
    Eigen::SparseMatrix<double> a(m, p);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.setPivotThreshold(1e-12);
    qr.compute(a);
    if (qr.info() != Eigen::Success || qr.rank() < p) continue;
    Eigen::VectorXd x = qr.solve(rhs);
    if (qr.info() != Eigen::Success || !x.allFinite()) continue;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      out.alpha[nodes[k]] = x(static_cast<Eigen::Index>(k));
      out.identified[nodes[k]] = true;
    }
  }
  return out;
}

}  // namespace teamprod
