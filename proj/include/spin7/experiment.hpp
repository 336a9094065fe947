#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace spin7 {

// Experiment description: seed, tolerances, grid and per-experiment
// parameters. Loaded from a JSON document; command-line flags override
// individual fields.
struct ExperimentConfig {
  std::uint64_t seed = 12345;

  double tol_algebra = 1e-10;
  double rank_gap = 1e6;
  double tol_newton = 1e-10;

  int grid_n = 5;
  std::array<double, 4> lengths{1.0, 1.0, 1.0, 1.0};

  int k = -1;  // -1: run all k in 0..4 where applicable
  double eps = 1e-2;
  int trials = 10000;
  std::vector<int> h_ladder{8, 12, 16, 24};

  std::string out_path;       // empty: stdout
  std::string format = "csv"; // csv | json

  void validate() const;
  std::string digest() const;  // stable content hash of all fields

  static ExperimentConfig from_json_file(const std::string& path);
};

// Tabular result record with deterministic row ordering.
class ResultTable {
 public:
  using Cell = std::variant<std::int64_t, double, std::string, bool>;

  explicit ResultTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row);
  std::size_t rows() const { return rows_.size(); }

  void write_csv(std::ostream& os, const std::string& digest) const;
  void write_json(std::ostream& os, const std::string& digest) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// Rank correlation for the volume-vs-defect statistics.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace spin7
