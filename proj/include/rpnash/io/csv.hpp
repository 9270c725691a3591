#pragma once

// CSV files: market atoms, wealth profiles, Newton traces and sweep tables.
// Numbers are written with 17 significant digits.

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "rpnash/equilibrium.hpp"
#include "rpnash/io/toml.hpp"
#include "rpnash/market.hpp"
#include "rpnash/sweeps.hpp"

namespace rpnash::io {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return static_cast<int>(j);
    return -1;
  }
};

/// Numeric CSV with one header line. Every row must have as many fields as
/// the header.
inline CsvTable parse_csv(const std::string& text, const std::string& what) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ls(s);
    while (std::getline(ls, field, ',')) {
      const auto a = field.find_first_not_of(" \t\r");
      const auto b = field.find_last_not_of(" \t\r");
      out.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
    }
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ParseError(what + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(t.header.size()));
    }
    std::vector<double> row;
    for (const std::string& f : fields) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(f, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != f.size()) {
        throw ParseError(what + ": line " + std::to_string(line_no) + ": '" + f +
                         "' is not a number");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ParseError(what + ": file is empty");
  if (t.rows.empty()) throw ParseError(what + ": no data rows");
  return t;
}

/// Market from a CSV with columns p and z (other columns are ignored).
inline Market read_market_csv(const std::string& path) {
  const CsvTable t = parse_csv(read_file(path), path);
  const int pc = t.column("p"), zc = t.column("z");
  if (pc < 0 || zc < 0) throw ParseError(path + ": columns 'p' and 'z' are required");
  std::vector<double> p, z;
  for (const auto& r : t.rows) {
    p.push_back(r[pc]);
    z.push_back(r[zc]);
  }
  return Market(std::move(p), std::move(z));
}

inline std::string market_csv(const Market& m) {
  std::string s = "p,z\n";
  for (std::size_t k = 0; k < m.atom_count(); ++k) s += fmt17(m.p()[k]) + "," + fmt17(m.z()[k]) + "\n";
  return s;
}

inline std::string wealth_csv(const Market& m, const Matrix& wealth) {
  std::string s = "atom,p,z";
  for (std::size_t i = 0; i < wealth.cols(); ++i) s += ",X" + std::to_string(i + 1);
  s += "\n";
  for (std::size_t k = 0; k < wealth.rows(); ++k) {
    s += std::to_string(k) + "," + fmt17(m.p()[k]) + "," + fmt17(m.z()[k]);
    for (std::size_t i = 0; i < wealth.cols(); ++i) s += "," + fmt17(wealth(k, i));
    s += "\n";
  }
  return s;
}

/// Reads a wealth CSV written by wealth_csv and checks it against the
/// market: same atom count, same p and z per atom.
inline Matrix read_wealth_csv(const std::string& path, const Market& m, std::size_t agents) {
  const CsvTable t = parse_csv(read_file(path), path);
  std::vector<int> cols;
  for (std::size_t i = 0; i < agents; ++i) {
    const int c = t.column("X" + std::to_string(i + 1));
    if (c < 0) {
      throw ParseError(path + ": missing column X" + std::to_string(i + 1) + " (config has " +
                       std::to_string(agents) + " agents)");
    }
    cols.push_back(c);
  }
  if (t.column("X" + std::to_string(agents + 1)) >= 0) {
    throw ParseError(path + ": more wealth columns than the " + std::to_string(agents) +
                     " configured agents");
  }
  if (t.rows.size() != m.atom_count()) {
    throw ParseError(path + ": " + std::to_string(t.rows.size()) + " rows, market has " +
                     std::to_string(m.atom_count()) + " atoms");
  }
  const int pc = t.column("p"), zc = t.column("z");
  Matrix w(m.atom_count(), agents);
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& r = t.rows[k];
    auto differs = [](double a, double b) { return std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b)); };
    if ((pc >= 0 && differs(r[pc], m.p()[k])) || (zc >= 0 && differs(r[zc], m.z()[k]))) {
      throw ParseError(path + ": row " + std::to_string(k) + " does not match the configured market");
    }
    for (std::size_t i = 0; i < agents; ++i) w(k, i) = r[cols[i]];
  }
  return w;
}

inline std::string trace_csv(const std::vector<NewtonTraceRow>& trace) {
  std::string s = "iteration,residual,step\n";
  for (const auto& row : trace) {
    s += std::to_string(row.iteration) + "," + fmt17(row.residual) + "," + fmt17(row.step) + "\n";
  }
  return s;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string s =
      "epsilon,sup_dist,l1_dist,l2_dist,newton_iters,foc_residual,budget_residual,status\n";
  for (const SweepRow& r : rows) {
    s += fmt17(r.epsilon) + "," + fmt17(r.sup_dist) + "," + fmt17(r.l1_dist) + "," +
         fmt17(r.l2_dist) + "," + std::to_string(r.newton_iters) + "," + fmt17(r.foc_residual) +
         "," + fmt17(r.budget_residual) + "," + r.status + "\n";
  }
  return s;
}

}  // namespace rpnash::io
