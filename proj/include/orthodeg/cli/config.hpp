#pragma once

#include "orthodeg/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace orthodeg::cli {

/// Parse failure carrying the 1-based line number.
class LineError : public ParseError {
 public:
  LineError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids = {"convergence",  "homotopy", "stability0",   "stability1",
                                               "inequalities", "liouville", "closed_forms", "doubling"};
  return ids;
}

struct ExperimentConfig {
  std::string experiment;
  std::vector<std::string> parts;  // empty: every check group of the experiment

  // domain / grid
  int d = 2;
  int n = 1;
  double L = 1.0;
  std::vector<int> cells;  // empty: experiment default
  std::string grading = "auto";
  double ratio = 0.7;
  std::vector<int> refinements = {16, 32, 64};

  // weight
  Eigen::VectorXd a;
  Eigen::VectorXd eps;
  bool supersingular = false;

  // coefficients and data
  std::string coefficients = "identity";
  double theta = 2.0943951023931957;  // 2 pi / 3
  std::string data = "manufactured";

  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::string out_dir;

  std::vector<double> sweep_eps = {0.2, 0.1, 0.05, 0.025, 0.0};
  double alpha = -1.0;  // < 0: experiment default
  std::vector<double> corner_radii = {0.5, 0.25, 0.125, 0.0625, 0.03125};

  double homotopy_base = 0.4;
  int homotopy_steps = 5;
  double tol_conv = 0.05;

  int members = 50;
  int calibration = 200;
  std::vector<double> ineq_eps = {0.0, 0.1, 0.5, 1.0};
  std::vector<double> hardy_a = {-0.5, 0.5, 1.0, 2.0};
  double q = -1.0;  // < 0: default exponent

  std::vector<double> liouville_sizes = {1.0, 2.0, 4.0};
  int matrices = 5;

  int samples = 200;
  int head = 50;
  int draws = 10;

  std::vector<double> reflection_a = {0.5, 1.0};

  std::set<std::string> explicit_keys;
  std::vector<std::pair<std::string, std::string>> echo;  // as parsed, in file order

  bool has(const std::string& key) const { return explicit_keys.count(key) > 0; }
  bool wants(const std::string& part) const;
};

/// Every key the parser accepts, with a one-line description.
const std::map<std::string, std::string>& config_keys();

/// Strict "key = value" parser; '#' starts a comment, lists are comma
/// separated. Unknown keys and malformed lines throw LineError; violated
/// preconditions throw ValidationError.
ExperimentConfig parse_config(const std::string& text);

/// Checks the preconditions of the owning module.
void validate(ExperimentConfig& cfg);

}  // namespace orthodeg::cli
