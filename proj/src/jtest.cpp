#include "teamprod/jtest.hpp"

#include "teamprod/errors.hpp"
#include "teamprod/stats.hpp"

namespace teamprod {

NodeStatistic builtin_statistic(const std::string& name, const NodeStatistics& stats) {
  NodeStatistic out;
  out.name = name;
  for (std::size_t i = 0; i < stats.node_ids.size(); ++i) {
    double v;
    if (name == "degree") v = static_cast<double>(stats.degree[i]);
    else if (name == "closeness") v = stats.closeness[i];
    else throw ConfigError("jtest: unknown statistic '" + name + "' (expected degree or closeness)");
    out.values.emplace(stats.node_ids[i], v);
  }
  return out;
}

double j_statistic(const Eigen::VectorXd& g, const Eigen::MatrixXd& weight, std::size_t n) {
  return std::max(0.0, static_cast<double>(n) * g.dot(weight * g));
}

JtestResult jtest(std::span<const Triplet> triplets, const std::vector<NodeStatistic>& statistics,
                  std::size_t min_triplets) {
  const auto k = static_cast<Eigen::Index>(statistics.size());
  if (k == 0) throw InvalidInput("jtest: at least one statistic is required");
  if (triplets.size() < min_triplets)
    throw InvalidInput("jtest: needs at least " + std::to_string(min_triplets) +
                       " pair-unique triplets, got " + std::to_string(triplets.size()));
  const auto n = static_cast<Eigen::Index>(triplets.size());

  // Instruments z (n x K+1) and the per-triplet pieces of m0 = y_ij - lambda s.
  Eigen::MatrixXd z(n, k + 1);
  Eigen::VectorXd y(n), s(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& t = triplets[static_cast<std::size_t>(r)];
    z(r, 0) = 1.0;
    for (Eigen::Index q = 0; q < k; ++q) {
      const auto& vals = statistics[static_cast<std::size_t>(q)].values;
      auto fi = vals.find(t.i);
      auto fj = vals.find(t.j);
      if (fi == vals.end() || fj == vals.end())
        throw InvalidInput("jtest: statistic '" + statistics[static_cast<std::size_t>(q)].name +
                           "' has no value for node " + (fi == vals.end() ? t.i : t.j));
      z(r, q + 1) = fi->second + fj->second;
    }
    y(r) = t.y_ij;
    s(r) = t.y_i + t.y_j;
  }
  // g(lambda) = a - lambda b
  const Eigen::VectorXd a = z.transpose() * y / static_cast<double>(n);
  const Eigen::VectorXd b = z.transpose() * s / static_cast<double>(n);
  if (!(b.squaredNorm() > 0.0)) throw DegenerateData("jtest: all solo outcomes are zero");

  JtestResult res;
  res.n = static_cast<std::size_t>(n);
  for (const auto& st : statistics) res.statistics.push_back(st.name);
  // First step weights by (Z'Z/n)^-1 so that lambda, S and T are unchanged
  // by invertible linear maps of the instruments (affine maps of any f).
  const Eigen::MatrixXd zz = z.transpose() * z / static_cast<double>(n);
  const auto zz_dec = zz.completeOrthogonalDecomposition();
  const Eigen::VectorXd qa = zz_dec.solve(a), qb = zz_dec.solve(b);
  res.lambda_first_step = b.dot(qb) > 0.0 ? b.dot(qa) / b.dot(qb) : b.dot(a) / b.dot(b);

  Eigen::MatrixXd mom = z.array().colwise() * (y - res.lambda_first_step * s).array();
  Eigen::RowVectorXd mean = mom.colwise().mean();
  Eigen::MatrixXd centered = mom.rowwise() - mean;
  Eigen::MatrixXd s_hat = centered.transpose() * centered / static_cast<double>(n - 1);

  // Rank is judged on the correlation scale so the cut-off does not depend on
  // the units of any statistic.
  Eigen::VectorXd d = s_hat.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = d(i) > 0.0 ? 1.0 / d(i) : 0.0;
  const Eigen::MatrixXd corr = d.asDiagonal() * s_hat * d.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  const auto& ev = es.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv(ev.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > 1e-10 * top && top > 0.0) {
      inv(i) = 1.0 / ev(i);
      ++rank;
    } else {
      inv(i) = 0.0;
    }
  }
  res.weight_matrix = d.asDiagonal() *
                      (es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose()) *
                      d.asDiagonal();
  res.dof = static_cast<int>(k);
  if (rank < k + 1) {
    res.pseudo_inverse = true;
    res.dof = std::max(1, rank - 1);
    res.warnings.push_back("singular moment covariance; pseudo-inverse used and dof reduced to " +
                           std::to_string(res.dof));
  }
  const auto& w = res.weight_matrix;
  const double denom = b.dot(w * b);
  if (!(denom > 0.0)) throw DegenerateData("jtest: second-step weight annihilates the moments");
  res.lambda_hat = b.dot(w * a) / denom;
  res.moment_values = a - res.lambda_hat * b;
  res.statistic = j_statistic(res.moment_values, w, res.n);
  res.p_value = chi2_upper_tail(res.statistic, res.dof);
  return res;
}

JtestResult jtest(const TeamNetwork& net, std::span<const Triplet> triplets,
                  const std::vector<std::string>& statistics, std::size_t min_triplets) {
  if (statistics.empty()) throw InvalidInput("jtest: at least one statistic is required");
  auto stats = node_statistics(net);
  std::vector<NodeStatistic> resolved;
  for (const auto& name : statistics) resolved.push_back(builtin_statistic(name, stats));
  return jtest(triplets, resolved, min_triplets);
}

}  // namespace teamprod
