#include "rpool/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace rpool::milp {

VarId LinearModel::add_variable(double lower, double upper, VarType type, std::string name) {
  if (type == VarType::Binary) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  auto id = static_cast<VarId>(vars_.size());
  if (name.empty()) name = "x" + std::to_string(id);
  vars_.push_back({std::move(name), lower, upper, type});
  obj_.push_back(0.0);
  return id;
}

std::size_t LinearModel::add_constraint(std::vector<Term> terms, Relation rel, double rhs, std::string name) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
  std::vector<Term> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back().coef += t.coef;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  if (name.empty()) name = "c" + std::to_string(cons_.size());
  cons_.push_back({std::move(name), std::move(merged), rel, rhs});
  return cons_.size() - 1;
}

void LinearModel::set_objective(std::vector<Term> terms, Sense sense, double constant) {
  std::fill(obj_.begin(), obj_.end(), 0.0);
  for (const auto& t : terms) {
    if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
      throw std::invalid_argument("objective references unknown variable");
    obj_[static_cast<std::size_t>(t.var)] += t.coef;
  }
  sense_ = sense;
  obj_const_ = constant;
}

void LinearModel::set_objective_coef(VarId v, double coef) { obj_.at(static_cast<std::size_t>(v)) = coef; }

void LinearModel::validate() const {
  for (const auto& v : vars_) {
    if (v.lower > v.upper) throw std::invalid_argument("variable " + v.name + " has lower > upper");
    if (std::isnan(v.lower) || std::isnan(v.upper)) throw std::invalid_argument("NaN bound on " + v.name);
  }
  for (const auto& c : cons_) {
    for (const auto& t : c.terms) {
      if (t.var < 0 || static_cast<std::size_t>(t.var) >= vars_.size())
        throw std::invalid_argument("constraint " + c.name + " references unknown variable");
      if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite coefficient in " + c.name);
    }
    if (!std::isfinite(c.rhs)) throw std::invalid_argument("non-finite rhs in " + c.name);
  }
}

double LinearModel::evaluate_objective(const std::vector<double>& x) const {
  double z = obj_const_;
  for (std::size_t j = 0; j < obj_.size(); ++j) z += obj_[j] * x[j];
  return z;
}

double LinearModel::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (const auto& c : cons_) {
    double lhs = 0.0;
    for (const auto& t : c.terms) lhs += t.coef * x[static_cast<std::size_t>(t.var)];
    switch (c.relation) {
      case Relation::LessEqual: worst = std::max(worst, lhs - c.rhs); break;
      case Relation::GreaterEqual: worst = std::max(worst, c.rhs - lhs); break;
      case Relation::Equal: worst = std::max(worst, std::abs(lhs - c.rhs)); break;
    }
  }
  return worst;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::Limit: return "limit";
  }
  return "?";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kZeroTol = 1e-12;

// How one original variable maps onto nonnegative simplex columns.
struct ColumnMap {
  enum Kind { Shifted, Mirrored, Split } kind = Shifted;
  double offset = 0.0;
  int col = -1;
  int col2 = -1;
};

struct LpResult {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

// Dense bounded-variable two-phase primal simplex on
//   min c'x  s.t.  A x = b,  0 <= x <= u.
class BoundedSimplex {
 public:
  BoundedSimplex(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), tab_(rows * cols, 0.0), upper_(cols, kInf), cost_(cols, 0.0),
        beta_(rows, 0.0), basis_(rows, -1), at_upper_(cols, false), is_basic_(cols, false) {}

  double& a(std::size_t i, std::size_t j) { return tab_[i * n_ + j]; }
  double a(std::size_t i, std::size_t j) const { return tab_[i * n_ + j]; }
  std::vector<double>& upper() { return upper_; }
  std::vector<double>& beta() { return beta_; }

  void set_basic(std::size_t row, int col) {
    basis_[row] = col;
    is_basic_[static_cast<std::size_t>(col)] = true;
  }

  // Returns Optimal, Unbounded or Limit.
  Status optimize(const std::vector<double>& cost, std::size_t iter_cap) {
    cost_ = cost;
    reduced_.assign(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) reduced_[j] = cost_[j];
    for (std::size_t i = 0; i < m_; ++i) {
      double cb = cost_[static_cast<std::size_t>(basis_[i])];
      if (cb == 0.0) continue;
      const double* row = &tab_[i * n_];
      for (std::size_t j = 0; j < n_; ++j) reduced_[j] -= cb * row[j];
    }
    std::size_t degenerate_run = 0;
    std::vector<double> alpha(m_);
    for (std::size_t iter = 0; iter < iter_cap; ++iter) {
      const bool bland = degenerate_run > 50;
      int enter = -1;
      double best = 0.0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[j] || upper_[j] <= 0.0) continue;
        double score = at_upper_[j] ? reduced_[j] : -reduced_[j];
        if (score <= kCostTol) continue;
        if (bland) {
          enter = static_cast<int>(j);
          break;
        }
        if (score > best) {
          best = score;
          enter = static_cast<int>(j);
        }
      }
      if (enter < 0) return Status::Optimal;
      const auto je = static_cast<std::size_t>(enter);
      const double dir = at_upper_[je] ? -1.0 : 1.0;

      double theta = upper_[je];
      int leave = -1;
      bool leave_to_upper = false;
      double leave_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        alpha[i] = a(i, je);
        double delta = -dir * alpha[i];
        if (std::abs(alpha[i]) <= kPivotTol) continue;
        double ratio;
        bool to_upper;
        const auto bcol = static_cast<std::size_t>(basis_[i]);
        if (delta < 0.0) {
          ratio = std::max(beta_[i], 0.0) / -delta;
          to_upper = false;
        } else {
          if (!std::isfinite(upper_[bcol])) continue;
          ratio = std::max(upper_[bcol] - beta_[i], 0.0) / delta;
          to_upper = true;
        }
        bool take = false;
        if (ratio < theta - kZeroTol) {
          take = true;
        } else if (leave >= 0 && std::abs(ratio - theta) <= kZeroTol) {
          take = bland ? basis_[i] < basis_[static_cast<std::size_t>(leave)]
                       : std::abs(alpha[i]) > std::abs(leave_pivot);
        }
        if (take) {
          theta = ratio;
          leave = static_cast<int>(i);
          leave_to_upper = to_upper;
          leave_pivot = alpha[i];
        }
      }
      if (!std::isfinite(theta)) return Status::Unbounded;
      degenerate_run = theta <= kZeroTol ? degenerate_run + 1 : 0;

      for (std::size_t i = 0; i < m_; ++i) beta_[i] -= dir * theta * alpha[i];
      if (leave < 0) {
        at_upper_[je] = !at_upper_[je];
        continue;
      }
      const auto r = static_cast<std::size_t>(leave);
      const double entering_value = (at_upper_[je] ? upper_[je] : 0.0) + dir * theta;
      const auto lcol = static_cast<std::size_t>(basis_[r]);
      is_basic_[lcol] = false;
      at_upper_[lcol] = leave_to_upper;
      pivot(r, je);
      is_basic_[je] = true;
      at_upper_[je] = false;
      basis_[r] = enter;
      beta_[r] = entering_value;
    }
    return Status::Limit;
  }

  // Drives basic columns in `banned` out of the basis where possible.
  void evict(const std::vector<bool>& banned) {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!banned[static_cast<std::size_t>(basis_[r])]) continue;
      int best = -1;
      double best_abs = 1e-7;
      for (std::size_t j = 0; j < n_; ++j) {
        if (is_basic_[j] || banned[j]) continue;
        if (std::abs(a(r, j)) > best_abs) {
          best_abs = std::abs(a(r, j));
          best = static_cast<int>(j);
        }
      }
      if (best < 0) continue;
      const auto je = static_cast<std::size_t>(best);
      const auto lcol = static_cast<std::size_t>(basis_[r]);
      const double value = at_upper_[je] ? upper_[je] : 0.0;
      is_basic_[lcol] = false;
      at_upper_[lcol] = false;
      pivot(r, je);
      is_basic_[je] = true;
      at_upper_[je] = false;
      basis_[r] = best;
      beta_[r] = value;
    }
  }

  std::vector<double> values() const {
    std::vector<double> x(n_, 0.0);
    for (std::size_t j = 0; j < n_; ++j)
      if (!is_basic_[j] && at_upper_[j]) x[j] = upper_[j];
    for (std::size_t i = 0; i < m_; ++i) x[static_cast<std::size_t>(basis_[i])] = beta_[i];
    return x;
  }

 private:
  void pivot(std::size_t r, std::size_t je) {
    double* prow = &tab_[r * n_];
    const double inv = 1.0 / prow[je];
    for (std::size_t j = 0; j < n_; ++j) prow[j] *= inv;
    prow[je] = 1.0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row = &tab_[i * n_];
      const double f = row[je];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) row[j] -= f * prow[j];
      row[je] = 0.0;
    }
    const double f = reduced_[je];
    if (f != 0.0) {
      for (std::size_t j = 0; j < n_; ++j) reduced_[j] -= f * prow[j];
      reduced_[je] = 0.0;
    }
  }

  std::size_t m_, n_;
  std::vector<double> tab_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<double> reduced_;
  std::vector<double> beta_;
  std::vector<int> basis_;
  std::vector<bool> at_upper_;
  std::vector<bool> is_basic_;
};

// Solves the LP relaxation of `m` with variable bounds replaced by lo/hi.
LpResult solve_lp(const LinearModel& m, const std::vector<double>& lo, const std::vector<double>& hi) {
  const auto& vars = m.variables();
  const std::size_t nv = vars.size();
  for (std::size_t j = 0; j < nv; ++j)
    if (lo[j] > hi[j] + kFeasibilityTol) return {Status::Infeasible, {}, 0.0};

  std::vector<ColumnMap> cmap(nv);
  int ncols = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    if (std::isfinite(lo[j])) {
      cmap[j] = {ColumnMap::Shifted, lo[j], ncols++, -1};
    } else if (std::isfinite(hi[j])) {
      cmap[j] = {ColumnMap::Mirrored, hi[j], ncols++, -1};
    } else {
      cmap[j] = {ColumnMap::Split, 0.0, ncols, ncols + 1};
      ncols += 2;
    }
  }

  const auto& cons = m.constraints();
  const std::size_t rows = cons.size();
  // Row coefficients over structural columns and adjusted rhs.
  std::vector<std::vector<std::pair<int, double>>> row_terms(rows);
  std::vector<double> rhs(rows);
  std::vector<int> slack_sign(rows, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    double b = cons[i].rhs;
    for (const auto& t : cons[i].terms) {
      const auto& cm = cmap[static_cast<std::size_t>(t.var)];
      switch (cm.kind) {
        case ColumnMap::Shifted:
          b -= t.coef * cm.offset;
          row_terms[i].emplace_back(cm.col, t.coef);
          break;
        case ColumnMap::Mirrored:
          b -= t.coef * cm.offset;
          row_terms[i].emplace_back(cm.col, -t.coef);
          break;
        case ColumnMap::Split:
          row_terms[i].emplace_back(cm.col, t.coef);
          row_terms[i].emplace_back(cm.col2, -t.coef);
          break;
      }
    }
    rhs[i] = b;
    if (cons[i].relation == Relation::LessEqual) slack_sign[i] = 1;
    if (cons[i].relation == Relation::GreaterEqual) slack_sign[i] = -1;
  }

  // Column layout: structural | slacks | artificials.
  std::vector<int> slack_col(rows, -1);
  for (std::size_t i = 0; i < rows; ++i)
    if (slack_sign[i] != 0) slack_col[i] = ncols++;
  std::vector<double> flip(rows, 1.0);
  std::vector<int> art_col(rows, -1);
  for (std::size_t i = 0; i < rows; ++i) {
    if (rhs[i] < 0.0) flip[i] = -1.0;
    bool slack_basic = slack_sign[i] != 0 && slack_sign[i] * flip[i] > 0.0;
    if (!slack_basic) art_col[i] = ncols++;
  }

  BoundedSimplex lp(rows, static_cast<std::size_t>(ncols));
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& cm = cmap[j];
    if (cm.kind == ColumnMap::Shifted) lp.upper()[static_cast<std::size_t>(cm.col)] = hi[j] - lo[j];
  }
  std::vector<bool> artificial(static_cast<std::size_t>(ncols), false);
  for (std::size_t i = 0; i < rows; ++i) {
    for (const auto& [c, v] : row_terms[i]) lp.a(i, static_cast<std::size_t>(c)) += flip[i] * v;
    if (slack_col[i] >= 0) lp.a(i, static_cast<std::size_t>(slack_col[i])) = flip[i] * slack_sign[i];
    if (art_col[i] >= 0) {
      lp.a(i, static_cast<std::size_t>(art_col[i])) = 1.0;
      lp.set_basic(i, art_col[i]);
      artificial[static_cast<std::size_t>(art_col[i])] = true;
    } else {
      lp.set_basic(i, slack_col[i]);
    }
    lp.beta()[i] = flip[i] * rhs[i];
  }

  const std::size_t iter_cap = 50 * (rows + static_cast<std::size_t>(ncols)) + 1000;
  bool has_art = std::any_of(art_col.begin(), art_col.end(), [](int c) { return c >= 0; });
  if (has_art) {
    std::vector<double> phase1(static_cast<std::size_t>(ncols), 0.0);
    for (std::size_t j = 0; j < phase1.size(); ++j)
      if (artificial[j]) phase1[j] = 1.0;
    Status st = lp.optimize(phase1, iter_cap);
    if (st == Status::Limit) return {Status::Limit, {}, 0.0};
    auto x = lp.values();
    double infeas = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j)
      if (artificial[j]) infeas += x[j];
    if (infeas > kFeasibilityTol) return {Status::Infeasible, {}, 0.0};
    lp.evict(artificial);
    for (std::size_t j = 0; j < artificial.size(); ++j)
      if (artificial[j]) lp.upper()[j] = 0.0;
  }

  const double sense = m.sense() == Sense::Maximize ? -1.0 : 1.0;
  std::vector<double> cost(static_cast<std::size_t>(ncols), 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    const double c = sense * m.objective()[j];
    const auto& cm = cmap[j];
    switch (cm.kind) {
      case ColumnMap::Shifted: cost[static_cast<std::size_t>(cm.col)] = c; break;
      case ColumnMap::Mirrored: cost[static_cast<std::size_t>(cm.col)] = -c; break;
      case ColumnMap::Split:
        cost[static_cast<std::size_t>(cm.col)] = c;
        cost[static_cast<std::size_t>(cm.col2)] = -c;
        break;
    }
  }
  Status st = lp.optimize(cost, iter_cap);
  if (st != Status::Optimal) return {st, {}, 0.0};

  auto cols = lp.values();
  std::vector<double> x(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& cm = cmap[j];
    switch (cm.kind) {
      case ColumnMap::Shifted: x[j] = cm.offset + cols[static_cast<std::size_t>(cm.col)]; break;
      case ColumnMap::Mirrored: x[j] = cm.offset - cols[static_cast<std::size_t>(cm.col)]; break;
      case ColumnMap::Split:
        x[j] = cols[static_cast<std::size_t>(cm.col)] - cols[static_cast<std::size_t>(cm.col2)];
        break;
    }
    x[j] = std::clamp(x[j], lo[j], hi[j]);
  }
  return {Status::Optimal, x, m.evaluate_objective(x)};
}

bool is_integral_type(VarType t) { return t != VarType::Continuous; }

struct Node {
  double bound;  // in minimization sense
  std::size_t id;
  std::vector<double> lo, hi;
  std::vector<double> x;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id > b.id;
  }
};

}  // namespace

Solution solve_relaxation(const LinearModel& m) {
  m.validate();
  std::vector<double> lo, hi;
  for (const auto& v : m.variables()) {
    lo.push_back(v.lower);
    hi.push_back(v.upper);
  }
  auto r = solve_lp(m, lo, hi);
  Solution s;
  s.status = r.status;
  s.values = std::move(r.x);
  s.objective = r.objective;
  s.bound = r.objective;
  return s;
}

Solution solve(const LinearModel& m, const Limits& limits) {
  m.validate();
  const auto start = std::chrono::steady_clock::now();
  const auto& vars = m.variables();
  const std::size_t nv = vars.size();
  const double sense = m.sense() == Sense::Maximize ? -1.0 : 1.0;

  std::vector<double> lo(nv), hi(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    lo[j] = vars[j].lower;
    hi[j] = vars[j].upper;
    if (is_integral_type(vars[j].type)) {
      if (std::isfinite(lo[j])) lo[j] = std::ceil(lo[j] - kIntegralityTol);
      if (std::isfinite(hi[j])) hi[j] = std::floor(hi[j] + kIntegralityTol);
    }
  }

  Solution best;
  best.status = Status::Infeasible;
  double incumbent = kInf;  // minimization sense
  std::size_t next_id = 0;
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;

  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  auto root = solve_lp(m, lo, hi);
  if (root.status == Status::Infeasible) return best;
  if (root.status == Status::Unbounded) {
    best.status = Status::Unbounded;
    return best;
  }
  if (root.status == Status::Limit) {
    best.status = Status::Limit;
    return best;
  }
  open.push({sense * root.objective, next_id++, lo, hi, std::move(root.x)});

  bool hit_limit = false;
  double best_bound = sense * root.objective;
  std::size_t explored = 0;
  while (!open.empty()) {
    if (elapsed() > limits.time_seconds || explored >= limits.max_nodes) {
      hit_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    best_bound = node.bound;
    if (std::isfinite(incumbent)) {
      double gap_abs = limits.relative_gap * std::max(1.0, std::abs(incumbent));
      if (node.bound >= incumbent - gap_abs - 1e-9 * std::max(1.0, std::abs(incumbent))) {
        best_bound = std::min(node.bound, incumbent);
        open = {};
        break;
      }
    }
    ++explored;

    int branch = -1;
    double best_frac = kIntegralityTol;
    for (std::size_t j = 0; j < nv; ++j) {
      if (!is_integral_type(vars[j].type)) continue;
      double f = std::abs(node.x[j] - std::round(node.x[j]));
      if (f > best_frac + 1e-12) {
        best_frac = f;
        branch = static_cast<int>(j);
      }
    }
    if (branch < 0) {
      std::vector<double> x = node.x;
      for (std::size_t j = 0; j < nv; ++j)
        if (is_integral_type(vars[j].type)) x[j] = std::round(x[j]);
      if (m.max_violation(x) > 10 * kFeasibilityTol) x = node.x;
      double z = sense * m.evaluate_objective(x);
      if (z < incumbent - 1e-12) {
        incumbent = z;
        best.values = std::move(x);
      }
      continue;
    }
    const auto jb = static_cast<std::size_t>(branch);
    const double v = node.x[jb];
    for (int side = 0; side < 2; ++side) {
      std::vector<double> clo = node.lo, chi = node.hi;
      if (side == 0) {
        chi[jb] = std::floor(v);
      } else {
        clo[jb] = std::ceil(v);
      }
      auto r = solve_lp(m, clo, chi);
      if (r.status == Status::Limit) {
        hit_limit = true;
        continue;
      }
      if (r.status != Status::Optimal) continue;
      double b = sense * r.objective;
      if (b >= incumbent - 1e-9 * std::max(1.0, std::abs(incumbent))) continue;
      open.push({b, next_id++, std::move(clo), std::move(chi), std::move(r.x)});
    }
  }

  best.nodes = explored;
  if (!best.values.empty()) {
    best.objective = m.evaluate_objective(best.values);
    if (hit_limit) {
      double b = open.empty() ? best_bound : std::min(best_bound, open.top().bound);
      best.bound = sense * b;
      best.status = Status::Limit;
    } else {
      best.bound = best.objective;
      best.status = Status::Optimal;
    }
  } else {
    best.status = hit_limit ? Status::Limit : Status::Infeasible;
  }
  return best;
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_terms(std::ostringstream& os, const LinearModel& m, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    const auto& name = m.variables()[static_cast<std::size_t>(t.var)].name;
    double c = t.coef;
    if (first) {
      if (c < 0) os << " - " << format_number(-c) << " " << name;
      else os << " " << format_number(c) << " " << name;
    } else {
      os << (c < 0 ? " - " : " + ") << format_number(std::abs(c)) << " " << name;
    }
    first = false;
  }
  if (first) os << " 0";
}

}  // namespace

std::string export_model(const LinearModel& m) {
  std::ostringstream os;
  os << "\\ rpool linear model\n";
  os << (m.sense() == Sense::Maximize ? "Maximize\n" : "Minimize\n");
  std::vector<Term> obj;
  for (std::size_t j = 0; j < m.num_variables(); ++j)
    if (m.objective()[j] != 0.0) obj.push_back({static_cast<VarId>(j), m.objective()[j]});
  os << " obj:";
  write_terms(os, m, obj);
  if (m.objective_constant() != 0.0)
    os << (m.objective_constant() < 0 ? " - " : " + ") << format_number(std::abs(m.objective_constant()));
  os << "\nSubject To\n";
  for (const auto& c : m.constraints()) {
    os << " " << c.name << ":";
    write_terms(os, m, c.terms);
    switch (c.relation) {
      case Relation::LessEqual: os << " <= "; break;
      case Relation::GreaterEqual: os << " >= "; break;
      case Relation::Equal: os << " = "; break;
    }
    os << format_number(c.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : m.variables()) {
    if (v.type == VarType::Binary) continue;
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      os << " " << v.name << " free\n";
      continue;
    }
    os << " ";
    if (std::isinf(v.lower)) os << "-inf";
    else os << format_number(v.lower);
    os << " <= " << v.name << " <= ";
    if (std::isinf(v.upper)) os << "+inf";
    else os << format_number(v.upper);
    os << "\n";
  }
  os << "Generals\n";
  for (const auto& v : m.variables())
    if (v.type == VarType::Integer) os << " " << v.name << "\n";
  os << "Binaries\n";
  for (const auto& v : m.variables())
    if (v.type == VarType::Binary) os << " " << v.name << "\n";
  os << "End\n";
  return os.str();
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else if (ch == '<' || ch == '>' || ch == '=') {
      flush();
      std::string op(1, ch);
      if (i + 1 < line.size() && line[i + 1] == '=') {
        op += '=';
        ++i;
      }
      if (op == "=<") op = "<=";
      if (op == "=>") op = ">=";
      out.push_back(op);
    } else if ((ch == '+' || ch == '-') && cur.empty()) {
      // Sign token unless it starts a number exponent, handled by the number itself.
      out.emplace_back(1, ch);
    } else if (ch == ':') {
      cur += ch;
      flush();
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s == "inf" || s == "+inf" || s == "infinity") {
    v = kInf;
    return true;
  }
  if (s == "-inf" || s == "-infinity") {
    v = -kInf;
    return true;
  }
  try {
    std::size_t pos = 0;
    v = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

LinearModel import_model(const std::string& text) {
  LinearModel m;
  std::map<std::string, VarId> ids;
  auto var = [&](const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    VarId id = m.add_variable(0.0, kInf, VarType::Continuous, name);
    ids.emplace(name, id);
    return id;
  };

  enum class Section { None, Objective, Constraints, Bounds, Generals, Binaries };
  Section section = Section::None;
  Sense sense = Sense::Minimize;
  std::vector<Term> obj;
  double obj_const = 0.0;

  // Parses "[name:] terms [rel rhs]" into terms; returns relation/rhs if present.
  auto parse_linear = [&](const std::vector<std::string>& toks, std::size_t from, std::vector<Term>& terms,
                          double& constant, std::string& rel, double& rhs) {
    double sign = 1.0;
    double coef = 1.0;
    bool have_coef = false;
    for (std::size_t i = from; i < toks.size(); ++i) {
      const auto& t = toks[i];
      if (t == "<=" || t == ">=" || t == "=" || t == "<" || t == ">") {
        if (have_coef) constant += sign * coef;
        rel = t;
        double r = 0.0;
        double rs = 1.0;
        std::size_t k = i + 1;
        if (k < toks.size() && (toks[k] == "-" || toks[k] == "+")) {
          rs = toks[k] == "-" ? -1.0 : 1.0;
          ++k;
        }
        if (k >= toks.size() || !parse_double(toks[k], r)) throw std::invalid_argument("bad rhs");
        rhs = rs * r;
        return;
      }
      if (t == "+" || t == "-") {
        if (have_coef) constant += sign * coef;
        sign = t == "-" ? -1.0 : 1.0;
        coef = 1.0;
        have_coef = false;
        continue;
      }
      double v;
      if (parse_double(t, v)) {
        coef = v;
        have_coef = true;
      } else {
        terms.push_back({var(t), sign * coef});
        sign = 1.0;
        coef = 1.0;
        have_coef = false;
      }
    }
    if (have_coef) constant += sign * coef;
  };

  std::istringstream in(text);
  std::string line;
  std::string pending;
  std::vector<std::pair<std::string, std::vector<std::string>>> bounds;
  std::vector<std::string> generals, binaries;

  auto lower = [](std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };

  while (std::getline(in, line)) {
    auto bs = line.find('\\');
    if (bs != std::string::npos) line = line.substr(0, bs);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    std::string head = lower(toks[0]);
    if (head == "minimize" || head == "min" || head == "minimum") {
      section = Section::Objective;
      sense = Sense::Minimize;
      continue;
    }
    if (head == "maximize" || head == "max" || head == "maximum") {
      section = Section::Objective;
      sense = Sense::Maximize;
      continue;
    }
    if (head == "subject" || head == "st" || head == "s.t.") {
      section = Section::Constraints;
      continue;
    }
    if (head == "bounds") {
      section = Section::Bounds;
      continue;
    }
    if (head == "generals" || head == "general") {
      section = Section::Generals;
      continue;
    }
    if (head == "binaries" || head == "binary") {
      section = Section::Binaries;
      continue;
    }
    if (head == "end") break;

    std::size_t from = 0;
    std::string name;
    if (!toks[0].empty() && toks[0].back() == ':') {
      name = toks[0].substr(0, toks[0].size() - 1);
      from = 1;
    }
    switch (section) {
      case Section::Objective: {
        std::string rel;
        double rhs = 0.0;
        parse_linear(toks, from, obj, obj_const, rel, rhs);
        break;
      }
      case Section::Constraints: {
        std::vector<Term> terms;
        double constant = 0.0;
        std::string rel;
        double rhs = 0.0;
        parse_linear(toks, from, terms, constant, rel, rhs);
        if (rel.empty()) throw std::invalid_argument("constraint without relation: " + line);
        Relation r = rel[0] == '<' ? Relation::LessEqual : rel[0] == '>' ? Relation::GreaterEqual : Relation::Equal;
        m.add_constraint(std::move(terms), r, rhs - constant, name);
        break;
      }
      case Section::Bounds: bounds.emplace_back(line, toks); break;
      case Section::Generals:
        for (auto& t : toks) generals.push_back(t);
        break;
      case Section::Binaries:
        for (auto& t : toks) binaries.push_back(t);
        break;
      case Section::None: throw std::invalid_argument("content outside of a section: " + line);
    }
  }

  for (auto& [raw, toks] : bounds) {
    // Forms: "l <= x <= u", "x free", "x >= l", "x <= u", "-inf <= x <= u".
    std::vector<std::string> t;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      if ((toks[i] == "-" || toks[i] == "+") && i + 1 < toks.size()) {
        t.push_back(toks[i] + toks[i + 1]);
        ++i;
      } else {
        t.push_back(toks[i]);
      }
    }
    double v;
    if (t.size() == 2 && lower(t[1]) == "free") {
      auto id = var(t[0]);
      m.variables()[static_cast<std::size_t>(id)].lower = -kInf;
      m.variables()[static_cast<std::size_t>(id)].upper = kInf;
    } else if (t.size() == 5 && parse_double(t[0], v)) {
      auto id = var(t[2]);
      double u;
      if (!parse_double(t[4], u)) throw std::invalid_argument("bad bound: " + raw);
      m.variables()[static_cast<std::size_t>(id)].lower = v;
      m.variables()[static_cast<std::size_t>(id)].upper = u;
    } else if (t.size() == 3 && !parse_double(t[0], v)) {
      auto id = var(t[0]);
      if (!parse_double(t[2], v)) throw std::invalid_argument("bad bound: " + raw);
      auto& var_ref = m.variables()[static_cast<std::size_t>(id)];
      if (t[1] == "<=") var_ref.upper = v;
      else if (t[1] == ">=") var_ref.lower = v;
      else var_ref.lower = var_ref.upper = v;
    } else {
      throw std::invalid_argument("unsupported bound line: " + raw);
    }
  }
  for (const auto& g : generals) m.variables()[static_cast<std::size_t>(var(g))].type = VarType::Integer;
  for (const auto& b : binaries) {
    auto& v = m.variables()[static_cast<std::size_t>(var(b))];
    v.type = VarType::Binary;
    v.lower = 0.0;
    v.upper = 1.0;
  }
  m.set_objective(std::move(obj), sense, obj_const);
  return m;
}

}  // namespace rpool::milp
