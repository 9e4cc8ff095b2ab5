#include "teamprod/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "teamprod/errors.hpp"

namespace teamprod {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Table {
  std::string source;
  std::vector<std::pair<std::size_t, std::vector<std::string_view>>> rows;  // line number, cells
};

// Splits CSV text with a required header. Blank lines are skipped.
Table parse_table(std::string_view text, const std::vector<std::string>& header,
                  const std::string& source) {
  Table t;
  t.source = source;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool seen_header = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = trim(text.substr(pos, end - pos));
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto cells = split(line, ',');
    for (auto& c : cells) c = trim(c);
    if (!seen_header) {
      bool ok = cells.size() == header.size();
      for (std::size_t k = 0; ok && k < header.size(); ++k) ok = cells[k] == header[k];
      if (!ok) {
        std::string want;
        for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
        throw InvalidInput(source + ":" + std::to_string(line_no) + ": expected header '" + want + "'");
      }
      seen_header = true;
    } else {
      if (cells.size() != header.size())
        throw InvalidInput(source + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(header.size()) + " fields, found " +
                           std::to_string(cells.size()));
      t.rows.emplace_back(line_no, std::move(cells));
    }
    if (end == text.size()) break;
  }
  if (!seen_header) throw InvalidInput(source + ": missing header line");
  return t;
}

std::string where(const Table& t, std::size_t line) { return t.source + ":" + std::to_string(line); }

std::string require_id(std::string_view v, const std::string& loc, const char* field) {
  if (v.empty()) throw InvalidInput(loc + ": empty " + field);
  return std::string(v);
}

const std::vector<std::string> kProjectHeader{"project_id", "timestamp", "outcome", "workers"};
const std::vector<std::string> kTripletHeader{"i", "j", "y_i", "y_j", "y_ij",
                                              "solo_i_id", "solo_j_id", "team_id"};
const std::vector<std::string> kQuadHeader{"i",         "j",         "k",         "y_i",
                                           "y_j",       "y_k",       "y_ijk",     "solo_i_id",
                                           "solo_j_id", "solo_k_id", "team_id"};

std::string header_line(const std::vector<std::string>& h) {
  std::string out;
  for (const auto& c : h) out += (out.empty() ? "" : ",") + c;
  return out + "\n";
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view text, const std::string& loc) {
  text = trim(text);
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto r = std::from_chars(first, last, v);
  if (text.empty() || r.ec != std::errc() || r.ptr != last || !std::isfinite(v))
    throw InvalidInput(loc + ": '" + std::string(text) + "' is not a finite number");
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << text;
    if (!out) throw InvalidInput("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<ProjectRecord> parse_projects_csv(std::string_view text, NetworkView view,
                                              const std::string& source) {
  auto table = parse_table(text, kProjectHeader, source);
  std::vector<ProjectRecord> out;
  out.reserve(table.rows.size());
  for (const auto& [line, c] : table.rows) {
    const auto loc = where(table, line);
    ProjectRecord p;
    p.id = require_id(c[0], loc, "project_id");
    {
      auto r = std::from_chars(c[1].data(), c[1].data() + c[1].size(), p.timestamp);
      if (c[1].empty() || r.ec != std::errc() || r.ptr != c[1].data() + c[1].size())
        throw InvalidInput(loc + ": timestamp '" + std::string(c[1]) + "' is not an integer");
    }
    if (c[3].empty()) throw InvalidInput(loc + ": project has no workers");
    for (auto w : split(c[3], ';')) {
      w = trim(w);
      if (w.empty()) throw InvalidInput(loc + ": empty worker id in '" + std::string(c[3]) + "'");
      p.workers.emplace_back(w);
    }
    if (!c[2].empty()) {
      double y = parse_double(c[2], loc);
      if (view == NetworkView::observed) {
        if (y < 0.0) throw InvalidInput(loc + ": observed outcome " + std::string(c[2]) + " is negative");
        p.observed_outcome = y;
      } else {
        p.latent_outcome = y;
      }
    }
    try {
      validate_project(p);
    } catch (const InvalidInput& e) {
      throw InvalidInput(loc + ": " + e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<ProjectRecord> read_projects_csv(const std::filesystem::path& path, NetworkView view) {
  return parse_projects_csv(read_text_file(path), view, path.string());
}

std::string format_projects_csv(const TeamNetwork& net) {
  std::string out = header_line(kProjectHeader);
  for (const auto& p : net.projects()) {
    out += p.id;
    out += ',';
    out += std::to_string(p.timestamp);
    out += ',';
    const auto& y = net.view() == NetworkView::observed ? p.observed_outcome : p.latent_outcome;
    if (y) out += format_double(*y);
    out += ',';
    for (std::size_t k = 0; k < p.workers.size(); ++k) {
      if (k) out += ';';
      out += p.workers[k];
    }
    out += '\n';
  }
  return out;
}

void write_projects_csv(const std::filesystem::path& path, const TeamNetwork& net) {
  write_text_file(path, format_projects_csv(net));
}

std::vector<Triplet> read_triplets_csv(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  auto table = parse_table(text, kTripletHeader, path.string());
  std::vector<Triplet> out;
  out.reserve(table.rows.size());
  for (const auto& [line, c] : table.rows) {
    const auto loc = where(table, line);
    Triplet t;
    t.i = require_id(c[0], loc, "i");
    t.j = require_id(c[1], loc, "j");
    t.y_i = parse_double(c[2], loc);
    t.y_j = parse_double(c[3], loc);
    t.y_ij = parse_double(c[4], loc);
    t.solo_i_id = require_id(c[5], loc, "solo_i_id");
    t.solo_j_id = require_id(c[6], loc, "solo_j_id");
    t.team_id = require_id(c[7], loc, "team_id");
    if (t.i == t.j) throw InvalidInput(loc + ": i and j are the same node");
    out.push_back(std::move(t));
  }
  return out;
}

void write_triplets_csv(const std::filesystem::path& path, const std::vector<Triplet>& ts) {
  std::string out = header_line(kTripletHeader);
  for (const auto& t : ts)
    out += t.i + ',' + t.j + ',' + format_double(t.y_i) + ',' + format_double(t.y_j) + ',' +
           format_double(t.y_ij) + ',' + t.solo_i_id + ',' + t.solo_j_id + ',' + t.team_id + '\n';
  write_text_file(path, out);
}

std::vector<Quadruplet> read_quadruplets_csv(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  auto table = parse_table(text, kQuadHeader, path.string());
  std::vector<Quadruplet> out;
  for (const auto& [line, c] : table.rows) {
    const auto loc = where(table, line);
    Quadruplet q;
    q.i = require_id(c[0], loc, "i");
    q.j = require_id(c[1], loc, "j");
    q.k = require_id(c[2], loc, "k");
    q.y_i = parse_double(c[3], loc);
    q.y_j = parse_double(c[4], loc);
    q.y_k = parse_double(c[5], loc);
    q.y_ijk = parse_double(c[6], loc);
    q.solo_i_id = require_id(c[7], loc, "solo_i_id");
    q.solo_j_id = require_id(c[8], loc, "solo_j_id");
    q.solo_k_id = require_id(c[9], loc, "solo_k_id");
    q.team_id = require_id(c[10], loc, "team_id");
    out.push_back(std::move(q));
  }
  return out;
}

void write_quadruplets_csv(const std::filesystem::path& path, const std::vector<Quadruplet>& qs) {
  std::string out = header_line(kQuadHeader);
  for (const auto& q : qs)
    out += q.i + ',' + q.j + ',' + q.k + ',' + format_double(q.y_i) + ',' + format_double(q.y_j) +
           ',' + format_double(q.y_k) + ',' + format_double(q.y_ijk) + ',' + q.solo_i_id + ',' +
           q.solo_j_id + ',' + q.solo_k_id + ',' + q.team_id + '\n';
  write_text_file(path, out);
}

void write_alphas_csv(const std::filesystem::path& path, const std::vector<std::string>& ids,
                      const std::vector<double>& alphas) {
  std::string out = "node_id,alpha\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out += ids[i] + ',' + format_double(alphas[i]) + '\n';
  write_text_file(path, out);
}

std::vector<std::pair<std::string, double>> read_node_values_csv(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  auto table = parse_table(text, {"node_id", "value"}, path.string());
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [line, c] : table.rows) {
    const auto loc = where(table, line);
    out.emplace_back(require_id(c[0], loc, "node_id"), parse_double(c[1], loc));
  }
  return out;
}

void write_fixed_effects_csv(const std::filesystem::path& path, const FixedEffectEstimates& fe) {
  std::string out = "node_id,alpha,moment_count,identified,component\n";
  for (std::size_t i = 0; i < fe.node_ids.size(); ++i) {
    out += fe.node_ids[i] + ',';
    if (fe.identified[i]) out += format_double(fe.alpha[i]);
    out += ',' + std::to_string(fe.moment_count[i]) + ',' + (fe.identified[i] ? "true" : "false") +
           ',' + std::to_string(fe.component[i]) + '\n';
  }
  write_text_file(path, out);
}

}  // namespace teamprod
