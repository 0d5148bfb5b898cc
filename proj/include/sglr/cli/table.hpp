#pragma once

// Text tables over run artifacts: ranks per iteration, errors per grid
// level, timings per solution method.

#include "sglr/cli/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace sglr::cli {

enum class TableKind { ranks, errors, timings };

inline TableKind parse_table_kind(const std::string& s) {
  if (s == "ranks") return TableKind::ranks;
  if (s == "errors") return TableKind::errors;
  if (s == "timings") return TableKind::timings;
  throw ConfigError("unknown table '" + s + "' (ranks | errors | timings)");
}

/// Left-aligned first column, right-aligned numeric columns.
inline std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w;
  for (const auto& r : rows) {
    if (w.size() < r.size()) w.resize(r.size(), 0);
    for (std::size_t j = 0; j < r.size(); ++j) w[j] = std::max(w[j], r[j].size());
  }
  std::ostringstream os;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      const std::string pad(w[j] - r[j].size(), ' ');
      os << (j == 0 ? r[j] + pad : "  " + pad + r[j]);
    }
    os << "\n";
  }
  return os.str();
}

inline std::string sci(double x, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*e", digits, x);
  return buf;
}

inline std::string fixed(double x, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

/// Minimal CSV reader for the files written by the pipeline (no quoting).
inline std::vector<std::map<std::string, std::string>> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("missing artifact " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty artifact " + path.string());
  const auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw ConfigError("malformed row in " + path.string());
    std::map<std::string, std::string> r;
    for (std::size_t j = 0; j < header.size(); ++j) r[header[j]] = cells[j];
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Per-iteration ranks of each eigenvector and inner iteration counts.
inline std::string ranks_table(const std::filesystem::path& dir) {
  const json cfg = read_json_file(dir / "config.json");
  const int ne = cfg.at("n_e").get<int>();
  const auto h = read_csv(dir / "convergence_history.csv");
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"Iteration"};
  for (const auto& r : h) head.push_back(r.at("iteration"));
  rows.push_back(head);
  for (int s = 1; s <= ne; ++s) {
    std::vector<std::string> row{"Rank u^" + std::to_string(s)};
    for (const auto& r : h) row.push_back(r.at("rank_" + std::to_string(s)));
    rows.push_back(row);
  }
  for (int s = 1; s <= ne; ++s) {
    std::vector<std::string> row{"it_inner u^" + std::to_string(s)};
    for (const auto& r : h) row.push_back(r.at("inner_iterations_" + std::to_string(s)));
    rows.push_back(row);
  }
  std::vector<std::string> th{"eps_theta"};
  for (const auto& r : h) th.push_back(sci(std::stod(r.at("eps_theta")), 2));
  rows.push_back(th);
  return render(rows);
}

/// Columns are runs (labelled by n_c); rows are eps_lambda^s and eps_u^s.
inline std::string errors_table(const std::vector<std::filesystem::path>& dirs, bool rr) {
  std::vector<json> docs;
  for (const auto& d : dirs) {
    docs.push_back(read_json_file(d / "errors.json"));
    if (!docs.back().contains("rayleigh_ritz")) throw ConfigError(d.string() + ": run has no error estimates (n_r = 0)");
  }
  const char* key = rr ? "rayleigh_ritz" : "plain";
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{rr ? "with Rayleigh-Ritz" : "without refinement"};
  for (const auto& d : docs) head.push_back("n_c=" + std::to_string(d.at("n_c").get<int>()));
  rows.push_back(head);
  std::size_t ne = 0;
  for (const auto& d : docs) ne = std::max(ne, d.at(key).at("eps_lambda").size());
  for (const char* name : {"eps_lambda", "eps_u"}) {
    for (std::size_t s = 0; s < ne; ++s) {
      std::vector<std::string> row{std::string(name) + "^" + std::to_string(s + 1)};
      for (const auto& d : docs) {
        const auto& v = d.at(key).at(name);
        row.push_back(s < v.size() ? sci(v[s].get<double>()) : "-");
      }
      rows.push_back(row);
    }
  }
  return render(rows);
}

/// Rows: low-rank SG, full-rank SG, Monte Carlo; columns: n_c. Several runs at
/// the same n_c and mode keep the last one given.
inline std::string timings_table(const std::vector<std::filesystem::path>& dirs) {
  std::map<int, std::map<std::string, double>> cell;
  for (const auto& d : dirs) {
    const json t = read_json_file(d / "timings.json");
    const int nc = t.at("n_c").get<int>();
    if (t.contains("t_solve")) cell[nc][t.at("full_rank").get<bool>() ? "full" : "low"] = t.at("t_solve").get<double>();
    if (t.contains("t_sample") && !t.at("full_rank").get<bool>()) cell[nc]["sample"] = t.at("t_sample").get<double>();
    if (t.contains("t_mc")) cell[nc]["mc"] = t.at("t_mc").get<double>();
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"time (s)"};
  for (const auto& [nc, _] : cell) head.push_back("n_c=" + std::to_string(nc));
  rows.push_back(head);
  const std::vector<std::pair<std::string, std::string>> labels{
      {"low", "low-rank SG t_solve"}, {"sample", "low-rank SG t_sample"}, {"full", "full-rank SG t_solve"},
      {"mc", "Monte Carlo"}};
  for (const auto& [k, label] : labels) {
    std::vector<std::string> row{label};
    for (const auto& [nc, m] : cell) row.push_back(m.contains(k) ? fixed(m.at(k)) : "-");
    rows.push_back(row);
  }
  return render(rows);
}

inline std::string table(TableKind kind, const std::vector<std::filesystem::path>& dirs) {
  if (dirs.empty()) throw ConfigError("table needs at least one run directory");
  switch (kind) {
    case TableKind::ranks:
      return ranks_table(dirs.front());
    case TableKind::errors:
      return errors_table(dirs, true) + "\n" + errors_table(dirs, false);
    case TableKind::timings:
      return timings_table(dirs);
  }
  return {};
}

}  // namespace sglr::cli
