#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace teamprod {

using NodeIndex = std::uint32_t;

// One link of the team hypergraph. A single worker is a solo project (self-loop).
struct ProjectRecord {
  std::string id;
  std::vector<std::string> workers;
  std::int64_t timestamp = 0;
  std::optional<double> latent_outcome;
  std::optional<double> observed_outcome;

  std::size_t team_size() const { return workers.size(); }
};

// Throws InvalidInput when a record breaks the per-project invariants.
void validate_project(const ProjectRecord& p);

// Which outcome a network is built on: the complete graph G* or the truncated graph G.
enum class NetworkView { latent, observed };

struct PairBucket {
  NodeIndex first = 0;  // first < second
  NodeIndex second = 0;
  std::vector<std::size_t> projects;
};

struct TeamBucket {
  std::vector<NodeIndex> members;  // sorted, size >= 3
  std::vector<std::size_t> projects;
};

// Immutable multigraph with self-loops and hyperedges. Node indices follow the
// lexicographic order of node ids; every bucket is ordered by (timestamp, id).
class TeamNetwork {
 public:
  TeamNetwork() = default;

  static TeamNetwork build(std::vector<ProjectRecord> projects, NetworkView view);

  NetworkView view() const { return view_; }
  const std::vector<ProjectRecord>& projects() const { return projects_; }
  std::size_t num_projects() const { return projects_.size(); }
  std::size_t num_nodes() const { return node_ids_.size(); }
  const std::vector<std::string>& node_ids() const { return node_ids_; }
  const std::string& node_id(NodeIndex i) const { return node_ids_[i]; }
  std::optional<NodeIndex> find_node(std::string_view id) const;

  std::span<const NodeIndex> workers(std::size_t project) const;
  double outcome(std::size_t project) const { return outcomes_[project]; }
  const ProjectRecord& project(std::size_t p) const { return projects_[p]; }

  // L_i
  std::span<const std::size_t> solo_projects(NodeIndex i) const;
  // L_ij, unordered
  std::span<const std::size_t> pair_projects(NodeIndex i, NodeIndex j) const;
  const std::vector<PairBucket>& pair_buckets() const { return pairs_; }
  const std::vector<TeamBucket>& team_buckets() const { return teams_; }

  // Project indices in (timestamp, id) order.
  const std::vector<std::size_t>& chronological() const { return chronological_; }

 private:
  NetworkView view_ = NetworkView::observed;
  std::vector<ProjectRecord> projects_;
  std::vector<double> outcomes_;
  std::vector<std::string> node_ids_;
  std::vector<std::uint32_t> worker_offsets_;
  std::vector<NodeIndex> worker_nodes_;
  std::vector<std::vector<std::size_t>> solo_;
  std::vector<PairBucket> pairs_;
  std::vector<TeamBucket> teams_;
  std::vector<std::size_t> chronological_;
};

// Index construction over a project list; same as TeamNetwork::build.
TeamNetwork build_indices(std::vector<ProjectRecord> projects,
                          NetworkView view = NetworkView::observed);

// Drops every project with a negative latent outcome and copies the rest into
// the observed view. Y* = 0 is kept.
TeamNetwork truncate_network(const TeamNetwork& latent);

// Degree and harmonic closeness on the simple undirected projection
// (hyperedges expanded to cliques, self-loops and multiplicity ignored).
struct NodeStatistics {
  std::vector<std::string> node_ids;
  std::vector<std::size_t> degree;
  std::vector<double> closeness;
};

NodeStatistics node_statistics(const TeamNetwork& net);

}  // namespace teamprod
