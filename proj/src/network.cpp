#include "teamprod/network.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "teamprod/errors.hpp"

namespace teamprod {

void validate_project(const ProjectRecord& p) {
  if (p.id.empty()) throw InvalidInput("project with empty id");
  if (p.workers.empty()) throw InvalidInput("project " + p.id + " has no workers");
  std::unordered_set<std::string_view> seen;
  for (const auto& w : p.workers) {
    if (w.empty()) throw InvalidInput("project " + p.id + " has an empty worker id");
    if (!seen.insert(w).second)
      throw InvalidInput("project " + p.id + " lists worker " + w + " twice");
  }
  if (p.observed_outcome) {
    if (!(*p.observed_outcome >= 0.0))
      throw InvalidInput("project " + p.id + " has a negative observed outcome");
    if (p.latent_outcome && *p.latent_outcome != *p.observed_outcome)
      throw InvalidInput("project " + p.id + " has observed outcome different from latent");
  }
}

TeamNetwork TeamNetwork::build(std::vector<ProjectRecord> projects, NetworkView view) {
  TeamNetwork net;
  net.view_ = view;

  std::unordered_set<std::string_view> ids;
  ids.reserve(projects.size());
  std::vector<std::string_view> all_workers;
  for (const auto& p : projects) {
    validate_project(p);
    const auto& y = view == NetworkView::latent ? p.latent_outcome : p.observed_outcome;
    if (!y)
      throw InvalidInput("project " + p.id + " is missing its " +
                         (view == NetworkView::latent ? "latent" : "observed") + " outcome");
    if (!ids.insert(p.id).second) throw InvalidInput("duplicate project id " + p.id);
    for (const auto& w : p.workers) all_workers.push_back(w);
  }

  std::sort(all_workers.begin(), all_workers.end());
  all_workers.erase(std::unique(all_workers.begin(), all_workers.end()), all_workers.end());
  net.node_ids_.assign(all_workers.begin(), all_workers.end());
  std::unordered_map<std::string_view, NodeIndex> index;
  index.reserve(net.node_ids_.size());
  for (NodeIndex i = 0; i < net.node_ids_.size(); ++i) index.emplace(net.node_ids_[i], i);

  net.projects_ = std::move(projects);
  const auto n = net.projects_.size();
  net.outcomes_.resize(n);
  net.worker_offsets_.assign(1, 0);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& rec = net.projects_[p];
    net.outcomes_[p] = view == NetworkView::latent ? *rec.latent_outcome : *rec.observed_outcome;
    for (const auto& w : rec.workers) net.worker_nodes_.push_back(index.at(w));
    net.worker_offsets_.push_back(static_cast<std::uint32_t>(net.worker_nodes_.size()));
  }

  net.chronological_.resize(n);
  std::iota(net.chronological_.begin(), net.chronological_.end(), std::size_t{0});
  std::sort(net.chronological_.begin(), net.chronological_.end(),
            [&](std::size_t a, std::size_t b) {
              const auto& pa = net.projects_[a];
              const auto& pb = net.projects_[b];
              if (pa.timestamp != pb.timestamp) return pa.timestamp < pb.timestamp;
              return pa.id < pb.id;
            });

  net.solo_.assign(net.node_ids_.size(), {});
  std::vector<std::pair<std::uint64_t, std::size_t>> pair_keys;
  std::vector<std::pair<std::vector<NodeIndex>, std::size_t>> team_keys;
  for (auto p : net.chronological_) {
    auto ws = net.workers(p);
    if (ws.size() == 1) {
      net.solo_[ws[0]].push_back(p);
    } else if (ws.size() == 2) {
      auto a = std::min(ws[0], ws[1]);
      auto b = std::max(ws[0], ws[1]);
      pair_keys.emplace_back((std::uint64_t{a} << 32) | b, p);
    } else {
      std::vector<NodeIndex> members(ws.begin(), ws.end());
      std::sort(members.begin(), members.end());
      team_keys.emplace_back(std::move(members), p);
    }
  }
  // stable sorts keep the chronological order inside each bucket
  std::stable_sort(pair_keys.begin(), pair_keys.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [key, p] : pair_keys) {
    auto a = static_cast<NodeIndex>(key >> 32);
    auto b = static_cast<NodeIndex>(key & 0xffffffffu);
    if (net.pairs_.empty() || net.pairs_.back().first != a || net.pairs_.back().second != b)
      net.pairs_.push_back(PairBucket{a, b, {}});
    net.pairs_.back().projects.push_back(p);
  }
  std::stable_sort(team_keys.begin(), team_keys.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& [members, p] : team_keys) {
    if (net.teams_.empty() || net.teams_.back().members != members)
      net.teams_.push_back(TeamBucket{members, {}});
    net.teams_.back().projects.push_back(p);
  }
  return net;
}

std::optional<NodeIndex> TeamNetwork::find_node(std::string_view id) const {
  auto it = std::lower_bound(node_ids_.begin(), node_ids_.end(), id);
  if (it == node_ids_.end() || *it != id) return std::nullopt;
  return static_cast<NodeIndex>(it - node_ids_.begin());
}

std::span<const NodeIndex> TeamNetwork::workers(std::size_t project) const {
  return {worker_nodes_.data() + worker_offsets_[project],
          worker_nodes_.data() + worker_offsets_[project + 1]};
}

std::span<const std::size_t> TeamNetwork::solo_projects(NodeIndex i) const {
  return solo_[i];
}

std::span<const std::size_t> TeamNetwork::pair_projects(NodeIndex i, NodeIndex j) const {
  auto a = std::min(i, j);
  auto b = std::max(i, j);
  auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::pair{a, b},
                             [](const PairBucket& x, const std::pair<NodeIndex, NodeIndex>& k) {
                               return std::pair{x.first, x.second} < k;
                             });
  if (it == pairs_.end() || it->first != a || it->second != b) return {};
  return it->projects;
}

TeamNetwork build_indices(std::vector<ProjectRecord> projects, NetworkView view) {
  return TeamNetwork::build(std::move(projects), view);
}

TeamNetwork truncate_network(const TeamNetwork& latent) {
  std::vector<ProjectRecord> kept;
  for (const auto& p : latent.projects()) {
    if (!p.latent_outcome) throw InvalidInput("project " + p.id + " has no latent outcome");
    if (*p.latent_outcome < 0.0) continue;
    ProjectRecord q = p;
    q.observed_outcome = *p.latent_outcome;
    kept.push_back(std::move(q));
  }
  return TeamNetwork::build(std::move(kept), NetworkView::observed);
}

NodeStatistics node_statistics(const TeamNetwork& net) {
  const auto n = net.num_nodes();
  NodeStatistics out;
  out.node_ids = net.node_ids();
  out.degree.assign(n, 0);
  out.closeness.assign(n, 0.0);
  if (n == 0) return out;

  std::vector<std::vector<NodeIndex>> adj(n);
  for (const auto& b : net.pair_buckets()) {
    adj[b.first].push_back(b.second);
    adj[b.second].push_back(b.first);
  }
  for (const auto& t : net.team_buckets())
    for (auto a : t.members)
      for (auto b : t.members)
        if (a != b) adj[a].push_back(b);
  for (std::size_t i = 0; i < n; ++i) {
    auto& v = adj[i];
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    out.degree[i] = v.size();
  }
  if (n == 1) return out;

  std::vector<std::uint32_t> dist(n);
  std::vector<NodeIndex> queue(n);
  constexpr auto unseen = std::numeric_limits<std::uint32_t>::max();
  for (std::size_t s = 0; s < n; ++s) {
    if (adj[s].empty()) continue;
    std::fill(dist.begin(), dist.end(), unseen);
    dist[s] = 0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = static_cast<NodeIndex>(s);
    double acc = 0.0;
    while (head < tail) {
      auto u = queue[head++];
      for (auto v : adj[u]) {
        if (dist[v] != unseen) continue;
        dist[v] = dist[u] + 1;
        acc += 1.0 / dist[v];
        queue[tail++] = v;
      }
    }
    out.closeness[s] = acc / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace teamprod
