/*
 * Copyright 2026 The seqfactor Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seqfactor/io.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace seqfactor {
namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

[[noreturn]] void fail(const std::string& path, int line,
                       const std::string& what) {
  throw InputError(path + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  return in;
}

double parse_double(const std::string& s, const std::string& path, int line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(path, line, "not a number: '" + s + "'");
  if (!std::isfinite(v)) fail(path, line, "non-finite value: '" + s + "'");
  return v;
}

int64_t parse_int(const std::string& s, const std::string& path, int line) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(path, line, "not an integer: '" + s + "'");
  return v;
}

}  // namespace

std::string hash_comment(const std::string& config_hash) {
  return config_hash.empty() ? "" : "# config_hash " + config_hash + "\n";
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<RawEvent> read_events_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  auto header = split_csv(line);
  if (header != std::vector<std::string>{"individual_id", "service",
                                         "timestamp_days"})
    fail(path, 1, "expected header individual_id,service,timestamp_days");
  std::vector<RawEvent> events;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 3)
      fail(path, lineno, "expected 3 fields, found " + std::to_string(f.size()));
    if (f[0].empty()) fail(path, lineno, "empty individual_id");
    if (f[1].empty()) fail(path, lineno, "empty service");
    int64_t day = parse_int(f[2], path, lineno);
    if (day < 0) fail(path, lineno, "negative timestamp_days");
    events.push_back({f[0], f[1], day});
  }
  return events;
}

IdTable read_id_table_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  auto header = split_csv(line);
  if (header.empty() || header[0] != "individual_id")
    fail(path, 1, "first column must be individual_id");
  IdTable t;
  t.columns.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != header.size())
      fail(path, lineno, "expected " + std::to_string(header.size()) +
                             " fields, found " + std::to_string(f.size()));
    if (f[0].empty()) fail(path, lineno, "empty individual_id");
    std::vector<double> row;
    for (size_t c = 1; c < f.size(); ++c)
      row.push_back(parse_double(f[c], path, lineno));
    t.ids.push_back(f[0]);
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(t.columns.size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c)
      t.values(r, c) = rows[r][c];
  return t;
}

FeatureMatrix features_from_table(const IdTable& table,
                                  const std::string& path) {
  if (table.columns.empty()) fail(path, 1, "no feature columns");
  if ((table.values.array() < 0.0).any())
    throw InputError(path + ": feature values must be >= 0");
  return {table.values, table.columns};
}

void write_events_csv(const std::string& path,
                      const std::vector<RawEvent>& events) {
  std::ostringstream os;
  os << "individual_id,service,timestamp_days\n";
  for (const auto& e : events)
    os << e.individual_id << ',' << e.service << ',' << e.day << '\n';
  write_file(path, os.str());
}

void write_id_table_csv(const std::string& path,
                        const std::vector<std::string>& ids,
                        const std::vector<std::string>& columns,
                        const Matrix& values) {
  std::ostringstream os;
  os << "individual_id";
  for (const auto& c : columns) os << ',' << c;
  os << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    os << ids[r];
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      os << ',' << format_double(values(r, c));
    os << '\n';
  }
  write_file(path, os.str());
}

json matrix_to_json(const std::string& name, const Matrix& m) {
  std::vector<double> v;
  v.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
  return json{{"name", name},
              {"rows", m.rows()},
              {"cols", m.cols()},
              {"row_major_values", v}};
}

Matrix matrix_from_json(const json& j) {
  try {
    auto rows = j.at("rows").get<Eigen::Index>();
    auto cols = j.at("cols").get<Eigen::Index>();
    const auto& vals = j.at("row_major_values");
    if (rows < 0 || cols < 0 ||
        static_cast<Eigen::Index>(vals.size()) != rows * cols)
      throw InputError("matrix '" + j.value("name", std::string("?")) +
                       "': value count does not match shape");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        m(r, c) = vals[r * cols + c].get<double>();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed matrix container: ") + e.what());
  }
}

Matrix find_matrix(const json& containers, const std::string& name) {
  for (const auto& c : containers)
    if (c.value("name", std::string()) == name) return matrix_from_json(c);
  throw InputError("matrix '" + name + "' not found");
}

json context_to_json(const ContextMatrices& ctx) {
  return json::array({matrix_to_json("D", ctx.D), matrix_to_json("T", ctx.T),
                      matrix_to_json("H", ctx.H),
                      matrix_to_json("Gamma", ctx.Gamma),
                      matrix_to_json("Diff", ctx.Diff)});
}

json factors_to_json(const FactorSet& f) {
  return json::array(
      {matrix_to_json("A", f.A), matrix_to_json("S", f.S),
       matrix_to_json("V", f.V), matrix_to_json("C", f.C),
       matrix_to_json("Rp", f.Rp), matrix_to_json("Rs", f.Rs),
       matrix_to_json("P", f.P), matrix_to_json("Q", f.Q),
       matrix_to_json("Lag_L", f.Lag_L), matrix_to_json("Lag_K", f.Lag_K),
       matrix_to_json("Lag_N", f.Lag_N)});
}

FactorSet factors_from_json(const json& j) {
  FactorSet f;
  f.A = find_matrix(j, "A");
  f.S = find_matrix(j, "S");
  f.V = find_matrix(j, "V");
  f.C = find_matrix(j, "C");
  f.Rp = find_matrix(j, "Rp");
  f.Rs = find_matrix(j, "Rs");
  f.P = find_matrix(j, "P");
  f.Q = find_matrix(j, "Q");
  f.Lag_L = find_matrix(j, "Lag_L");
  f.Lag_K = find_matrix(j, "Lag_K");
  f.Lag_N = find_matrix(j, "Lag_N");
  return f;
}

json network_to_json(const Network& net) {
  return json::array({matrix_to_json("W1", net.W1),
                      matrix_to_json("b1", net.b1.transpose()),
                      matrix_to_json("W2", net.W2),
                      matrix_to_json("b2", net.b2.transpose())});
}

Network network_from_json(const json& j) {
  Network net;
  net.W1 = find_matrix(j, "W1");
  net.b1 = find_matrix(j, "b1").transpose();
  net.W2 = find_matrix(j, "W2");
  net.b2 = find_matrix(j, "b2").transpose();
  if (net.b1.size() != net.W1.cols() || net.W2.rows() != net.W1.cols() ||
      net.b2.size() != net.W2.cols())
    throw InputError("network shapes are inconsistent");
  return net;
}

void write_trace_csv(const std::string& path, const SolveTrace& trace,
                     const std::string& config_hash) {
  std::ostringstream os;
  os << hash_comment(config_hash);
  os << "iteration,objective,term_temporal,term_functional,term_individual,"
        "term_sparsity,term_augmented\n";
  for (size_t i = 0; i < trace.objective.size(); ++i) {
    const auto& t = trace.terms[i];
    os << i + 1 << ',' << format_double(trace.objective[i]) << ','
       << format_double(t.temporal) << ',' << format_double(t.functional)
       << ',' << format_double(t.individual) << ','
       << format_double(t.sparsity) << ',' << format_double(t.augmented)
       << '\n';
  }
  write_file(path, os.str());
}

void write_features_csv(const std::string& path, const FeatureLayout& layout,
                        const Matrix& Z, const std::string& config_hash) {
  std::ostringstream os;
  os << "# config_hash " << config_hash << '\n';
  os << "# width " << layout.width() << '\n';
  for (const auto& b : layout.blocks())
    os << "# block " << b.name << ' ' << b.offset << ' ' << b.width << '\n';
  os << "window";
  for (int c = 0; c < Z.cols(); ++c) os << ",z" << c;
  os << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < Z.rows(); ++r) {
    os << r;
    for (Eigen::Index c = 0; c < Z.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", Z(r, c));
      os << ',' << buf;
    }
    os << '\n';
  }
  write_file(path, os.str());
}

Matrix read_features_csv(const std::string& path, std::string* config_hash) {
  auto in = open_in(path);
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> rows;
  size_t width = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# config_hash ";
      if (config_hash && line.rfind(key, 0) == 0)
        *config_hash = line.substr(key.size());
      continue;
    }
    auto f = split_csv(line);
    if (!header_seen) {
      header_seen = true;
      width = f.size() - 1;
      continue;
    }
    if (f.size() != width + 1)
      fail(path, lineno, "expected " + std::to_string(width + 1) + " fields");
    std::vector<double> row;
    for (size_t c = 1; c < f.size(); ++c)
      row.push_back(parse_double(f[c], path, lineno));
    rows.push_back(std::move(row));
  }
  Matrix Z(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(width));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < width; ++c) Z(r, c) = rows[r][c];
  return Z;
}

json metrics_to_json(const MetricsReport& r) {
  json per_class = json::array();
  for (size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& c = r.per_class[i];
    per_class.push_back({{"class", i},
                         {"support", c.support},
                         {"predicted", c.predicted},
                         {"precision", c.precision},
                         {"recall", c.recall},
                         {"f1", c.f1}});
  }
  return json{{"accuracy", r.accuracy}, {"precision", r.precision},
              {"recall", r.recall},     {"f1", r.f1},
              {"per_class", per_class}, {"confusion", r.confusion}};
}

namespace {
json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json("undefined");
}
std::string optional_csv(const std::optional<double>& v) {
  return v ? format_double(*v) : "undefined";
}
}  // namespace

json bias_to_json(const BiasReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back(
        {{"attribute", e.attribute},
         {"service", e.service},
         {"demographic_parity", optional_json(e.demographic_parity)},
         {"equal_opportunity", optional_json(e.equal_opportunity)},
         {"demographic_parity_balance",
          optional_json(e.demographic_parity_balance)},
         {"equal_opportunity_balance",
          optional_json(e.equal_opportunity_balance)},
         {"demographic_parity_flag", e.demographic_parity_flag},
         {"equal_opportunity_flag", e.equal_opportunity_flag}});
  return entries;
}

void write_bias_csv(const std::string& path, const BiasReport& r,
                    const std::string& config_hash) {
  std::ostringstream os;
  os << hash_comment(config_hash);
  os << "attribute,service,demographic_parity,equal_opportunity,"
        "demographic_parity_balance,equal_opportunity_balance,"
        "demographic_parity_flag,equal_opportunity_flag\n";
  for (const auto& e : r.entries)
    os << e.attribute << ',' << e.service << ','
       << optional_csv(e.demographic_parity) << ','
       << optional_csv(e.equal_opportunity) << ','
       << optional_csv(e.demographic_parity_balance) << ','
       << optional_csv(e.equal_opportunity_balance) << ','
       << e.demographic_parity_flag << ',' << e.equal_opportunity_flag
       << '\n';
  write_file(path, os.str());
}

void write_bias_plot_csv(const std::string& path, const BiasReport& r,
                         const std::string& config_hash) {
  std::ostringstream os;
  os << hash_comment(config_hash);
  os << "service,ratio,metric,attribute\n";
  for (const auto& e : r.entries) {
    os << e.service << ',' << optional_csv(e.demographic_parity)
       << ",demographic_parity," << e.attribute << '\n';
    os << e.service << ',' << optional_csv(e.equal_opportunity)
       << ",equal_opportunity," << e.attribute << '\n';
  }
  write_file(path, os.str());
}

std::string read_file(const std::string& path) {
  auto in = open_in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError(path + ": cannot write file");
  out << contents;
  if (!out) throw InputError(path + ": write failed");
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  write_file(path, j.dump(1) + "\n");
}

}  // namespace seqfactor
