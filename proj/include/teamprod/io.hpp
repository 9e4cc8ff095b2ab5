#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "teamprod/fixed_effects.hpp"
#include "teamprod/network.hpp"
#include "teamprod/triplets.hpp"

namespace teamprod {

// Shortest decimal text that reads back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text, const std::string& where);

// project_id,timestamp,outcome,workers  (workers separated by ';').
// The outcome column fills the outcome of `view`; an empty cell leaves it absent.
// Observed outcomes must be >= 0. Errors name the file and line.
std::vector<ProjectRecord> read_projects_csv(const std::filesystem::path& path, NetworkView view);
std::vector<ProjectRecord> parse_projects_csv(std::string_view text, NetworkView view,
                                              const std::string& source = "<memory>");
void write_projects_csv(const std::filesystem::path& path, const TeamNetwork& net);
std::string format_projects_csv(const TeamNetwork& net);

// i,j,y_i,y_j,y_ij,solo_i_id,solo_j_id,team_id
std::vector<Triplet> read_triplets_csv(const std::filesystem::path& path);
void write_triplets_csv(const std::filesystem::path& path, const std::vector<Triplet>& t);

// i,j,k,y_i,y_j,y_k,y_ijk,solo_i_id,solo_j_id,solo_k_id,team_id
std::vector<Quadruplet> read_quadruplets_csv(const std::filesystem::path& path);
void write_quadruplets_csv(const std::filesystem::path& path, const std::vector<Quadruplet>& q);

// node_id,alpha
void write_alphas_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const std::vector<double>& alphas);

// node_id,value: custom node statistic for the J-test.
std::vector<std::pair<std::string, double>> read_node_values_csv(const std::filesystem::path& path);

// node_id,alpha,moment_count,identified,component  (alpha empty when not identified)
void write_fixed_effects_csv(const std::filesystem::path& path, const FixedEffectEstimates& fe);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file in the same directory, then renames.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace teamprod
