#include "spin7/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spin7/rng.hpp"

namespace spin7 {

void ExperimentConfig::validate() const {
  if (tol_algebra <= 0 || rank_gap <= 0 || tol_newton <= 0)
    throw std::invalid_argument("config: tolerances must be positive");
  if (grid_n < 4) throw std::invalid_argument("config: grid n must be >= 4");
  if (k < -1 || k > 4) throw std::invalid_argument("config: k out of range");
  if (trials <= 0) throw std::invalid_argument("config: trials must be positive");
  for (double l : lengths)
    if (l <= 0) throw std::invalid_argument("config: lengths must be positive");
  if (format != "csv" && format != "json")
    throw std::invalid_argument("config: format must be csv or json");
}

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string ExperimentConfig::digest() const {
  std::ostringstream os;
  os << seed << '|' << fmt_double(tol_algebra) << '|' << fmt_double(rank_gap) << '|'
     << fmt_double(tol_newton) << '|' << grid_n << '|';
  for (double l : lengths) os << fmt_double(l) << ',';
  os << '|' << k << '|' << fmt_double(eps) << '|' << trials << '|';
  for (int h : h_ladder) os << h << ',';
  std::uint64_t h = fnv1a(os.str());
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  in >> j;
  ExperimentConfig c;
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    if (t.contains("algebra")) c.tol_algebra = t["algebra"].get<double>();
    if (t.contains("rank_gap")) c.rank_gap = t["rank_gap"].get<double>();
    if (t.contains("newton")) c.tol_newton = t["newton"].get<double>();
  }
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    if (g.contains("n")) c.grid_n = g["n"].get<int>();
    if (g.contains("lengths")) {
      auto v = g["lengths"].get<std::vector<double>>();
      if (v.size() != 4) throw std::invalid_argument("config: lengths needs 4 entries");
      std::copy(v.begin(), v.end(), c.lengths.begin());
    }
  }
  if (j.contains("k")) c.k = j["k"].get<int>();
  if (j.contains("eps")) c.eps = j["eps"].get<double>();
  if (j.contains("trials")) c.trials = j["trials"].get<int>();
  if (j.contains("h_ladder")) c.h_ladder = j["h_ladder"].get<std::vector<int>>();
  if (j.contains("out")) c.out_path = j["out"].get<std::string>();
  if (j.contains("format")) c.format = j["format"].get<std::string>();
  c.validate();
  return c;
}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != header_.size())
    throw std::invalid_argument("ResultTable: row width mismatch");
  rows_.push_back(std::move(row));
}

namespace {

std::string csv_quote(const std::string& s) {
  bool need = s.find_first_of(",\"\n\r") != std::string::npos;
  if (!need) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string cell_str(const ResultTable::Cell& c) {
  if (std::holds_alternative<std::int64_t>(c))
    return std::to_string(std::get<std::int64_t>(c));
  if (std::holds_alternative<double>(c)) return fmt_double(std::get<double>(c));
  if (std::holds_alternative<bool>(c)) return std::get<bool>(c) ? "true" : "false";
  return std::get<std::string>(c);
}

}  // namespace

void ResultTable::write_csv(std::ostream& os, const std::string& digest) const {
  os << "# config-digest: " << digest << "\r\n";
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) os << ',';
    os << csv_quote(header_[i]);
  }
  os << "\r\n";
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << csv_quote(cell_str(row[i]));
    }
    os << "\r\n";
  }
}

void ResultTable::write_json(std::ostream& os, const std::string& digest) const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json obj;
    for (std::size_t i = 0; i < row.size(); ++i) {
      const Cell& c = row[i];
      if (std::holds_alternative<std::int64_t>(c))
        obj[header_[i]] = std::get<std::int64_t>(c);
      else if (std::holds_alternative<double>(c))
        obj[header_[i]] = std::get<double>(c);
      else if (std::holds_alternative<bool>(c))
        obj[header_[i]] = std::get<bool>(c);
      else
        obj[header_[i]] = std::get<std::string>(c);
    }
    out.push_back(obj);
  }
  nlohmann::json doc;
  doc["config_digest"] = digest;
  doc["rows"] = out;
  os << doc.dump(2) << '\n';
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman: need matched samples");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) r[idx[i]] = (double)i;
    return r;
  };
  std::vector<double> rx = ranks(x), ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= rx.size();
  my /= ry.size();
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

}  // namespace spin7
