#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace rpool::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kFeasibilityTol = 1e-6;
inline constexpr double kIntegralityTol = 1e-6;

enum class VarType { Continuous, Integer, Binary };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Minimize, Maximize };

using VarId = std::int32_t;

struct Term {
  VarId var;
  double coef;
};

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  VarType type = VarType::Continuous;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::LessEqual;
  double rhs = 0.0;
};

/// Sparse linear model with optional integrality. Variable ids are dense and
/// assigned in creation order; that order is also the solver's tie-break order.
class LinearModel {
 public:
  VarId add_variable(double lower, double upper, VarType type, std::string name = {});
  VarId add_binary(std::string name = {}) { return add_variable(0.0, 1.0, VarType::Binary, std::move(name)); }

  /// Terms referencing the same variable are merged; zero coefficients dropped.
  std::size_t add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name = {});

  void set_objective(std::vector<Term> terms, Sense sense, double constant = 0.0);
  void set_objective_coef(VarId v, double coef);

  std::size_t num_variables() const { return vars_.size(); }
  std::size_t num_constraints() const { return cons_.size(); }
  const std::vector<Variable>& variables() const { return vars_; }
  std::vector<Variable>& variables() { return vars_; }
  const std::vector<Constraint>& constraints() const { return cons_; }
  const std::vector<double>& objective() const { return obj_; }
  double objective_constant() const { return obj_const_; }
  Sense sense() const { return sense_; }

  /// Throws std::invalid_argument on dangling variable references or lower > upper.
  void validate() const;

  double evaluate_objective(const std::vector<double>& x) const;
  /// Largest absolute violation of any constraint or bound.
  double max_violation(const std::vector<double>& x) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> cons_;
  std::vector<double> obj_;
  double obj_const_ = 0.0;
  Sense sense_ = Sense::Minimize;
};

enum class Status { Optimal, Infeasible, Unbounded, Limit };

const char* to_string(Status s);

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> values;
  double objective = 0.0;
  /// Best proven bound (relaxation value) when branch-and-bound was used.
  double bound = 0.0;
  std::size_t nodes = 0;

  bool has_values() const { return !values.empty(); }
  double value(VarId v) const { return values.at(static_cast<std::size_t>(v)); }
};

struct Limits {
  double time_seconds = 30.0;
  double relative_gap = 0.0;
  std::size_t max_nodes = std::numeric_limits<std::size_t>::max();
};

/// Solves the continuous relaxation (integrality dropped).
Solution solve_relaxation(const LinearModel& m);

/// Exact branch-and-bound on top of a bounded-variable simplex. Deterministic
/// for a fixed model.
Solution solve(const LinearModel& m, const Limits& limits = {});

/// CPLEX LP text format.
std::string export_model(const LinearModel& m);
/// Parses the subset of the LP format written by export_model.
LinearModel import_model(const std::string& text);

}  // namespace rpool::milp
