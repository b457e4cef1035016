#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coflowhpn {

struct LpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Relation { le, eq, ge };
enum class LpStatus { optimal, infeasible, unbounded };

/// Sparse minimization LP over non-negative variables. Rows keep their
/// construction order; the solver is deterministic for identical row and
/// column order.
struct LinearProgram {
  struct Row {
    std::string name;
    std::vector<std::pair<int, double>> coeffs;  // (column, value), column unique
    Relation rel = Relation::le;
    double rhs = 0.0;
  };

  std::vector<std::string> variables;
  std::vector<std::pair<int, double>> objective;  // sparse, minimize
  std::vector<Row> rows;

  int add_variable(std::string name) {
    variables.push_back(std::move(name));
    return static_cast<int>(variables.size()) - 1;
  }

  void set_objective(int col, double coeff) {
    if (coeff != 0.0) objective.emplace_back(col, coeff);
  }

  void add_row(std::string name, std::vector<std::pair<int, double>> coeffs,
               Relation rel, double rhs) {
    rows.push_back(Row{std::move(name), std::move(coeffs), rel, rhs});
  }

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  void check_well_formed() const {
    const int n = num_variables();
    if (n == 0) throw LpError("LP has no variables");
    for (const auto& [col, coeff] : objective) {
      if (col < 0 || col >= n) throw LpError("objective references unknown column");
      if (!std::isfinite(coeff)) throw LpError("non-finite objective coefficient");
    }
    for (const Row& row : rows) {
      if (row.coeffs.empty())
        throw LpError("row " + row.name + " has no coefficients");
      if (!std::isfinite(row.rhs))
        throw LpError("row " + row.name + " has non-finite rhs");
      for (const auto& [col, coeff] : row.coeffs) {
        if (col < 0 || col >= n)
          throw LpError("row " + row.name + " references unknown column");
        if (!std::isfinite(coeff))
          throw LpError("row " + row.name + " has non-finite coefficient");
      }
    }
  }
};

struct LpSolution {
  LpStatus status = LpStatus::optimal;
  double objective_value = 0.0;
  std::vector<double> primal;            // by column, status == optimal only
  std::map<std::string, double> values;  // variable name -> value
  long iterations = 0;

  double value(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) throw LpError("unknown variable " + name);
    return it->second;
  }
};

struct SimplexOptions {
  double feas_tol = 1e-7;  // accepted constraint violation, scaled by max(1, |rhs|)
  double cost_tol = 1e-9;  // reduced-cost threshold for entering columns
  double pivot_tol = 1e-9;
  long max_pivots = 1'000'000;
  int refresh_every = 256;  // exact recompute cadence for x_B and reduced costs
};

/// Optional warm start: one basic column per row, either a structural column
/// or `num_variables() + r` for the slack of row r. The solver accepts the
/// hint only if it is permuted-triangular and primal feasible; otherwise it
/// silently falls back to the usual two-phase start.
struct BasisHint {
  std::vector<int> basic;
};

/// Re-substitutes a solution into every constraint; returns the largest
/// violation scaled by max(1, |rhs|). Used by solve_lp's exit check and by
/// tests as an independent feasibility probe.
inline double max_constraint_violation(const LinearProgram& lp,
                                       const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& row : lp.rows) {
    double lhs = 0.0;
    for (const auto& [col, coeff] : row.coeffs) lhs += coeff * x[col];
    double viol = 0.0;
    switch (row.rel) {
      case Relation::le: viol = lhs - row.rhs; break;
      case Relation::ge: viol = row.rhs - lhs; break;
      case Relation::eq: viol = std::abs(lhs - row.rhs); break;
    }
    worst = std::max(worst, viol / std::max(1.0, std::abs(row.rhs)));
  }
  for (double v : x) worst = std::max(worst, -v);
  return worst;
}

namespace detail {

// Two-phase revised simplex with an explicit dense basis inverse.
// Column ids: [0, n) structural, [n, n+m) slack/surplus, [n+m, n+2m)
// artificial. Reduced costs are maintained incrementally and recomputed
// exactly on a fixed cadence and before declaring optimality.
class SimplexSolver {
 public:
  SimplexSolver(const LinearProgram& lp, const SimplexOptions& opt,
                const BasisHint* hint)
      : lp_(lp), opt_(opt), n_(lp.num_variables()), m_(lp.num_rows()) {
    build();
    if (hint != nullptr && m_ > 0 && try_hint(*hint)) hinted_ = true;
  }

  LpSolution run() {
    LpSolution sol;
    if (m_ == 0) return solve_unconstrained();

    long budget = opt_.max_pivots;

    // Phase 1: minimize the sum of artificials. A validated hint starts
    // feasible, so it skips straight to phase 2.
    if (!hinted_ && num_artificials_ > 0) {
      set_phase_costs(/*phase1=*/true);
      const PhaseExit exit1 = iterate(budget);
      if (exit1 == PhaseExit::pivot_budget)
        throw LpError("pivot budget exhausted in phase 1");
      double infeas = 0.0;
      for (int r = 0; r < m_; ++r)
        if (basis_[r] >= n_ + m_) infeas += std::max(0.0, x_basic_[r]);
      if (infeas > 1e-7 * std::max(1.0, rhs_scale_)) {
        sol.status = LpStatus::infeasible;
        sol.iterations = iterations_;
        return sol;
      }
      expel_artificials();
    }

    // Phase 2: minimize the real objective from the feasible basis.
    set_phase_costs(/*phase1=*/false);
    const PhaseExit exit2 = iterate(budget);
    sol.iterations = iterations_;
    if (exit2 == PhaseExit::pivot_budget)
      throw LpError("pivot budget exhausted in phase 2");
    if (exit2 == PhaseExit::unbounded) {
      sol.status = LpStatus::unbounded;
      return sol;
    }

    extract(sol);
    if (max_constraint_violation(lp_, sol.primal) > opt_.feas_tol) {
      // One shot at numerical recovery: rebuild the inverse from scratch,
      // refresh the iterate, and continue pivoting.
      reinvert();
      refresh_exact();
      const PhaseExit retry = iterate(budget);
      if (retry == PhaseExit::unbounded) {
        sol.status = LpStatus::unbounded;
        return sol;
      }
      if (retry == PhaseExit::pivot_budget)
        throw LpError("pivot budget exhausted after reinversion");
      extract(sol);
      sol.iterations = iterations_;
      if (max_constraint_violation(lp_, sol.primal) > opt_.feas_tol)
        throw LpError("simplex lost feasibility beyond tolerance");
    }
    return sol;
  }

 private:
  enum class PhaseExit { optimal, unbounded, pivot_budget };

  const LinearProgram& lp_;
  SimplexOptions opt_;
  int n_ = 0;  // structural columns
  int m_ = 0;  // rows
  int num_artificials_ = 0;
  double rhs_scale_ = 1.0;

  // Scaled constraint matrix, stored by column (structural only).
  std::vector<std::vector<std::pair<int, double>>> cols_;
  std::vector<double> rhs_;         // scaled, non-negative
  std::vector<double> slack_sign_;  // +1 for <=, -1 for >=, 0 for ==
  std::vector<int> art_col_;        // row -> artificial column id or -1

  std::vector<double> cost_;     // current phase cost by column id
  std::vector<double> dj_;       // reduced costs by column id
  std::vector<double> devex_;    // Devex reference weights by column id
  std::vector<int> basis_;       // row -> column id
  std::vector<char> in_basis_;   // column id -> 1 if basic
  std::vector<double> x_basic_;  // row -> value of basic variable
  std::vector<double> binv_;     // dense m x m, row-major
  long iterations_ = 0;
  long degenerate_streak_ = 0;
  bool bland_ = false;
  bool phase1_ = false;
  bool hinted_ = false;

  int total_cols() const { return n_ + 2 * m_; }

  void build() {
    cols_.assign(n_, {});
    rhs_.resize(m_);
    slack_sign_.resize(m_);
    art_col_.assign(m_, -1);

    for (int r = 0; r < m_; ++r) {
      const auto& row = lp_.rows[r];
      double maxabs = 0.0;
      for (const auto& [col, coeff] : row.coeffs)
        maxabs = std::max(maxabs, std::abs(coeff));
      if (maxabs == 0.0) maxabs = 1.0;
      double scale = 1.0 / maxabs;

      // Normalize to non-negative rhs so the slack-or-artificial start is
      // immediate.
      Relation rel = row.rel;
      double rhs = row.rhs * scale;
      if (rhs < 0.0) {
        scale = -scale;
        rhs = -rhs;
        if (rel == Relation::le) rel = Relation::ge;
        else if (rel == Relation::ge) rel = Relation::le;
      }
      for (const auto& [col, coeff] : row.coeffs) {
        const double v = coeff * scale;
        if (v != 0.0) cols_[col].emplace_back(r, v);
      }
      rhs_[r] = rhs;
      rhs_scale_ = std::max(rhs_scale_, rhs);
      slack_sign_[r] = (rel == Relation::le) ? 1.0 : (rel == Relation::ge ? -1.0 : 0.0);
    }

    basis_.resize(m_);
    x_basic_ = rhs_;
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) binv_[static_cast<std::size_t>(r) * m_ + r] = 1.0;

    in_basis_.assign(total_cols(), 0);
    for (int r = 0; r < m_; ++r) {
      const bool slack_start =
          slack_sign_[r] > 0.0 || (slack_sign_[r] < 0.0 && rhs_[r] <= 0.0);
      if (slack_start) {
        basis_[r] = n_ + r;
        if (slack_sign_[r] < 0.0) {
          // Surplus column is -1; seed the inverse so B^{-1} matches.
          binv_[static_cast<std::size_t>(r) * m_ + r] = -1.0;
          x_basic_[r] = -rhs_[r];  // == 0 here
        }
      } else {
        basis_[r] = n_ + m_ + r;
        art_col_[r] = n_ + m_ + r;
        ++num_artificials_;
      }
      in_basis_[basis_[r]] = 1;
    }
  }

  // Accepts a basis hint when it is permuted-triangular and feasible. The
  // triangular order lets B^{-1} be assembled by plain forward elimination
  // with original-matrix multipliers, far below the cost of a general
  // inversion.
  bool try_hint(const BasisHint& hint) {
    if (static_cast<int>(hint.basic.size()) != m_) return false;

    std::vector<char> used(n_ + m_, 0);
    std::vector<std::vector<int>> col_rows(m_);   // hint position -> rows hit
    std::vector<std::vector<int>> row_cols(m_);   // row -> hint positions
    for (int pos = 0; pos < m_; ++pos) {
      const int col = hint.basic[pos];
      if (col < 0 || col >= n_ + m_ || used[col]) return false;
      if (col >= n_ && slack_sign_[col - n_] == 0.0) return false;  // = row slack
      used[col] = 1;
      for_column(col, [&](int r, double) {
        col_rows[pos].push_back(r);
        row_cols[r].push_back(pos);
      });
    }

    // Peel rows touched by exactly one remaining hinted column.
    std::vector<int> remaining(m_);
    std::vector<char> col_done(m_, 0), row_done(m_, 0);
    std::vector<int> queue;
    for (int r = 0; r < m_; ++r) {
      remaining[r] = static_cast<int>(row_cols[r].size());
      if (remaining[r] == 1) queue.push_back(r);
      if (remaining[r] == 0) return false;
    }
    std::vector<std::pair<int, int>> order;  // (row, hint position)
    order.reserve(m_);
    while (!queue.empty()) {
      const int r = queue.back();
      queue.pop_back();
      if (row_done[r] || remaining[r] != 1) continue;
      int pos = -1;
      for (int p : row_cols[r])
        if (!col_done[p]) pos = p;
      if (pos < 0) return false;
      row_done[r] = 1;
      col_done[pos] = 1;
      order.emplace_back(r, pos);
      for (int rr : col_rows[pos]) {
        if (row_done[rr]) continue;
        if (--remaining[rr] == 1) queue.push_back(rr);
      }
    }
    if (static_cast<int>(order.size()) != m_) return false;

    // Forward elimination in peel order. Pivot entries are original matrix
    // values: later columns have no entries in earlier pivot rows.
    std::vector<int> new_basis(m_);
    std::vector<double> binv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r) binv[static_cast<std::size_t>(r) * m_ + r] = 1.0;
    std::vector<char> eliminated(m_, 0);
    std::vector<double> pivots(m_, 0.0);
    for (const auto& [row, pos] : order) {
      const int col = hint.basic[pos];
      new_basis[row] = col;
      double piv = 0.0;
      for_column(col, [&](int r, double v) {
        if (r == row) piv = v;
      });
      if (std::abs(piv) < 1e-11) return false;
      pivots[row] = piv;
      const double* prow = &binv[static_cast<std::size_t>(row) * m_];
      for_column(col, [&](int r, double v) {
        if (r == row || eliminated[r]) return;
        const double factor = v / piv;
        double* target = &binv[static_cast<std::size_t>(r) * m_];
        for (int c = 0; c < m_; ++c) target[c] -= factor * prow[c];
      });
      eliminated[row] = 1;
    }
    for (int r = 0; r < m_; ++r) {
      double* row = &binv[static_cast<std::size_t>(r) * m_];
      const double inv = 1.0 / pivots[r];
      for (int c = 0; c < m_; ++c) row[c] *= inv;
    }

    // Must be primal feasible, within round-off.
    std::vector<double> xb(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double* row = &binv[static_cast<std::size_t>(r) * m_];
      double acc = 0.0;
      for (int c = 0; c < m_; ++c) acc += row[c] * rhs_[c];
      xb[r] = acc;
    }
    for (double v : xb)
      if (v < -1e-9 * std::max(1.0, rhs_scale_)) return false;

    binv_ = std::move(binv);
    x_basic_ = std::move(xb);
    basis_ = std::move(new_basis);
    in_basis_.assign(total_cols(), 0);
    for (int r = 0; r < m_; ++r) in_basis_[basis_[r]] = 1;
    return true;
  }

  // Column entries of the full (structural + slack + artificial) matrix.
  template <typename Fn>
  void for_column(int col, Fn&& fn) const {
    if (col < n_) {
      for (const auto& [r, v] : cols_[col]) fn(r, v);
    } else if (col < n_ + m_) {
      const int r = col - n_;
      if (slack_sign_[r] != 0.0) fn(r, slack_sign_[r]);
    } else {
      fn(col - n_ - m_, 1.0);
    }
  }

  void set_phase_costs(bool phase1) {
    phase1_ = phase1;
    bland_ = false;
    degenerate_streak_ = 0;
    cost_.assign(total_cols(), 0.0);
    devex_.assign(total_cols(), 1.0);
    if (phase1) {
      for (int r = 0; r < m_; ++r)
        if (art_col_[r] >= 0) cost_[art_col_[r]] = 1.0;
    } else {
      for (const auto& [col, coeff] : lp_.objective) cost_[col] += coeff;
    }
    recompute_reduced_costs();
  }

  void recompute_reduced_costs() {
    // y = c_B B^{-1}, then d_j = c_j - y a_j for every column.
    std::vector<double> y(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double cb = cost_[basis_[r]];
      if (cb == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(r) * m_];
      for (int c = 0; c < m_; ++c) y[c] += cb * row[c];
    }
    dj_.assign(total_cols(), 0.0);
    for (int col = 0; col < total_cols(); ++col) {
      if (in_basis_[col]) continue;
      double d = cost_[col];
      for_column(col, [&](int r, double v) { d -= y[r] * v; });
      dj_[col] = d;
    }
  }

  void refresh_basic_values() {
    for (int r = 0; r < m_; ++r) {
      const double* row = &binv_[static_cast<std::size_t>(r) * m_];
      double acc = 0.0;
      for (int c = 0; c < m_; ++c) acc += row[c] * rhs_[c];
      x_basic_[r] = acc;
    }
  }

  void refresh_exact() {
    refresh_basic_values();
    recompute_reduced_costs();
  }

  // Entering column: Devex by default, Bland while escaping a degenerate
  // streak. Artificials never enter.
  int choose_entering() const {
    const int limit = n_ + m_;
    if (bland_) {
      for (int col = 0; col < limit; ++col)
        if (!in_basis_[col] && dj_[col] < -opt_.cost_tol) return col;
      return -1;
    }
    int best = -1;
    double best_score = 0.0;
    for (int col = 0; col < limit; ++col) {
      if (in_basis_[col]) continue;
      const double d = dj_[col];
      if (d >= -opt_.cost_tol) continue;
      const double score = d * d / devex_[col];
      if (score > best_score) {
        best_score = score;
        best = col;
      }
    }
    return best;
  }

  // B^{-1} a_q for a sparse column.
  void ftran(int col, std::vector<double>& w) const {
    std::fill(w.begin(), w.end(), 0.0);
    for_column(col, [&](int r, double v) {
      const double* bc = &binv_[r];  // column r of row-major binv_, strided
      for (int i = 0; i < m_; ++i) w[i] += v * bc[static_cast<std::size_t>(i) * m_];
    });
  }

  PhaseExit iterate(long& budget) {
    std::vector<double> w(m_), rho(m_);
    int since_refresh = 0;
    while (true) {
      int q = choose_entering();
      if (q < 0) {
        // Confirm optimality against exactly recomputed reduced costs.
        recompute_reduced_costs();
        q = choose_entering();
        if (q < 0) return PhaseExit::optimal;
      }

      ftran(q, w);

      // In phase 2 a basic artificial must stay at zero: if the entering
      // direction touches one, kick it out at ratio zero.
      int leave = -1;
      if (!phase1_) {
        double best = opt_.pivot_tol;
        for (int r = 0; r < m_; ++r) {
          if (basis_[r] >= n_ + m_ && std::abs(w[r]) > best) {
            best = std::abs(w[r]);
            leave = r;
          }
        }
      }

      double step = 0.0;
      if (leave < 0) {
        double best_ratio = std::numeric_limits<double>::infinity();
        double best_piv = 0.0;
        for (int r = 0; r < m_; ++r) {
          if (w[r] <= opt_.pivot_tol) continue;
          const double ratio = std::max(0.0, x_basic_[r]) / w[r];
          bool take;
          if (leave < 0 || ratio < best_ratio - 1e-10) {
            take = true;
          } else if (ratio <= best_ratio + 1e-10) {
            // Tie: Bland wants the smallest leaving variable index, the
            // default prefers the numerically largest pivot.
            take = bland_ ? basis_[r] < basis_[leave] : w[r] > best_piv;
          } else {
            take = false;
          }
          if (take) {
            best_ratio = std::min(ratio, leave < 0 ? ratio : best_ratio);
            best_piv = w[r];
            leave = r;
          }
        }
        if (leave < 0) {
          if (phase1_) throw LpError("phase 1 reported an unbounded ray");
          return PhaseExit::unbounded;
        }
        step = std::max(0.0, x_basic_[leave]) / w[leave];
      }

      if (--budget < 0) return PhaseExit::pivot_budget;
      ++iterations_;

      pivot(q, leave, w, rho, step);

      if (step <= 1e-11) {
        if (++degenerate_streak_ > 10L * (m_ + n_)) bland_ = true;
      } else {
        degenerate_streak_ = 0;
        bland_ = false;
      }

      if (++since_refresh >= opt_.refresh_every) {
        refresh_exact();
        since_refresh = 0;
      }
    }
  }

  void pivot(int q, int leave, const std::vector<double>& w,
             std::vector<double>& rho, double step) {
    const int out_col = basis_[leave];
    const double piv = w[leave];

    // Save row `leave` of the old inverse for the reduced-cost update.
    const double* old_row = &binv_[static_cast<std::size_t>(leave) * m_];
    std::copy(old_row, old_row + m_, rho.begin());

    // Update basic values along the direction, then B^{-1} by row operations.
    for (int r = 0; r < m_; ++r) x_basic_[r] -= step * w[r];
    x_basic_[leave] = step;

    double* prow = &binv_[static_cast<std::size_t>(leave) * m_];
    const double inv_piv = 1.0 / piv;
    for (int c = 0; c < m_; ++c) prow[c] *= inv_piv;
    for (int r = 0; r < m_; ++r) {
      if (r == leave) continue;
      const double factor = w[r];
      if (std::abs(factor) < 1e-14) continue;
      double* row = &binv_[static_cast<std::size_t>(r) * m_];
      for (int c = 0; c < m_; ++c) row[c] -= factor * prow[c];
    }

    basis_[leave] = q;
    in_basis_[q] = 1;
    in_basis_[out_col] = 0;

    // d_j <- d_j - (d_q / piv) * (rho . a_j) for all nonbasic columns, with
    // the Devex reference weights riding on the same alpha values.
    const double theta = dj_[q] * inv_piv;
    const double devex_q = devex_[q];
    double devex_max = 1.0;
    if (theta != 0.0) {
      const int limit = total_cols();
      for (int col = 0; col < limit; ++col) {
        if (in_basis_[col]) continue;
        double alpha = 0.0;
        for_column(col, [&](int r, double v) { alpha += rho[r] * v; });
        if (alpha == 0.0) continue;
        dj_[col] -= theta * alpha;
        const double ref = alpha * inv_piv;
        const double cand = ref * ref * devex_q;
        if (cand > devex_[col]) devex_[col] = cand;
        if (devex_[col] > devex_max) devex_max = devex_[col];
      }
    }
    dj_[q] = 0.0;
    dj_[out_col] = -theta;  // rho . a_out == 1 by construction
    devex_[out_col] = std::max(devex_q * inv_piv * inv_piv, 1.0);
    if (devex_max > 1e12) devex_.assign(total_cols(), 1.0);  // new framework
  }

  // After phase 1, pivot basic artificials onto any usable structural or
  // slack column; rows that admit none are redundant and keep their
  // artificial pinned at zero.
  void expel_artificials() {
    std::vector<double> w(m_), rho(m_);
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_ + m_) continue;
      const double* row = &binv_[static_cast<std::size_t>(r) * m_];
      int found = -1;
      for (int col = 0; col < n_ + m_ && found < 0; ++col) {
        if (in_basis_[col]) continue;
        double alpha = 0.0;
        for_column(col, [&](int rr, double v) { alpha += row[rr] * v; });
        if (std::abs(alpha) > 1e-7) found = col;
      }
      if (found >= 0) {
        ftran(found, w);
        pivot(found, r, w, rho, 0.0);
      }
    }
  }

  void reinvert() {
    // Dense Gauss-Jordan on the basis columns; only used for recovery.
    std::vector<double> B(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int r = 0; r < m_; ++r)
      for_column(basis_[r], [&](int rr, double v) {
        B[static_cast<std::size_t>(rr) * m_ + r] = v;
      });
    std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    for (int c = 0; c < m_; ++c) {
      int p = -1;
      double best = 1e-12;
      for (int r = c; r < m_; ++r) {
        const double v = std::abs(B[static_cast<std::size_t>(r) * m_ + c]);
        if (v > best) {
          best = v;
          p = r;
        }
      }
      if (p < 0) throw LpError("singular basis during reinversion");
      if (p != c) {
        for (int k = 0; k < m_; ++k) {
          std::swap(B[static_cast<std::size_t>(p) * m_ + k],
                    B[static_cast<std::size_t>(c) * m_ + k]);
          std::swap(inv[static_cast<std::size_t>(p) * m_ + k],
                    inv[static_cast<std::size_t>(c) * m_ + k]);
        }
        std::swap(basis_[p], basis_[c]);
      }
      const double d = 1.0 / B[static_cast<std::size_t>(c) * m_ + c];
      for (int k = 0; k < m_; ++k) {
        B[static_cast<std::size_t>(c) * m_ + k] *= d;
        inv[static_cast<std::size_t>(c) * m_ + k] *= d;
      }
      for (int r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = B[static_cast<std::size_t>(r) * m_ + c];
        if (f == 0.0) continue;
        for (int k = 0; k < m_; ++k) {
          B[static_cast<std::size_t>(r) * m_ + k] -=
              f * B[static_cast<std::size_t>(c) * m_ + k];
          inv[static_cast<std::size_t>(r) * m_ + k] -=
              f * inv[static_cast<std::size_t>(c) * m_ + k];
        }
      }
    }
    binv_ = std::move(inv);
  }

  LpSolution solve_unconstrained() {
    LpSolution sol;
    for (const auto& [col, coeff] : lp_.objective) {
      if (coeff < 0.0) {
        sol.status = LpStatus::unbounded;
        return sol;
      }
    }
    sol.status = LpStatus::optimal;
    sol.primal.assign(n_, 0.0);
    sol.objective_value = 0.0;
    for (int c = 0; c < n_; ++c) sol.values[lp_.variables[c]] = 0.0;
    return sol;
  }

  void extract(LpSolution& sol) const {
    sol.status = LpStatus::optimal;
    sol.primal.assign(n_, 0.0);
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) {
        double v = x_basic_[r];
        if (v < 0.0 && v > -1e-9) v = 0.0;  // clip round-off only
        sol.primal[basis_[r]] = v;
      }
    }
    double obj = 0.0;
    for (const auto& [col, coeff] : lp_.objective) obj += coeff * sol.primal[col];
    sol.objective_value = obj;
    sol.values.clear();
    for (int c = 0; c < n_; ++c) sol.values[lp_.variables[c]] = sol.primal[c];
  }
};

}  // namespace detail

/// Solves the LP to optimality (two-phase revised simplex with Devex
/// pricing). Infeasible and unbounded inputs come back as statuses; an
/// exhausted pivot budget throws LpError. Deterministic for identical
/// inputs. A BasisHint skips phase 1 when it checks out.
inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {},
                           const BasisHint* hint = nullptr) {
  lp.check_well_formed();
  detail::SimplexSolver solver(lp, opt, hint);
  return solver.run();
}

// ---- textual export / import (LP file format) -----------------------------

namespace detail {

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void append_terms(std::string& out,
                         const std::vector<std::pair<int, double>>& terms,
                         const std::vector<std::string>& names) {
  bool first = true;
  for (const auto& [col, coeff] : terms) {
    if (coeff == 0.0) continue;
    if (first) {
      out += (coeff < 0.0) ? "- " : "";
    } else {
      out += (coeff < 0.0) ? " - " : " + ";
    }
    const double mag = std::abs(coeff);
    if (mag != 1.0) {
      out += format_number(mag);
      out += ' ';
    }
    out += names[col];
    first = false;
  }
  if (first) out += "0 " + names[0];
}

}  // namespace detail

/// Serializes to the industry LP text format (minimize objective, named
/// constraint rows, default x >= 0 bounds); parse_lp reads it back.
inline std::string export_lp(const LinearProgram& lp) {
  lp.check_well_formed();
  std::string out;
  out += "\\ coflow-hpn LP export\n";
  out += "Minimize\n obj: ";
  detail::append_terms(out, lp.objective, lp.variables);
  out += "\nSubject To\n";
  for (const auto& row : lp.rows) {
    out += ' ';
    out += row.name;
    out += ": ";
    detail::append_terms(out, row.coeffs, lp.variables);
    switch (row.rel) {
      case Relation::le: out += " <= "; break;
      case Relation::ge: out += " >= "; break;
      case Relation::eq: out += " = "; break;
    }
    out += detail::format_number(row.rhs);
    out += '\n';
  }
  out += "Bounds\nEnd\n";
  return out;
}

inline LinearProgram parse_lp(const std::string& text) {
  LinearProgram lp;
  std::map<std::string, int> col_of;
  auto intern = [&](const std::string& name) {
    auto it = col_of.find(name);
    if (it != col_of.end()) return it->second;
    const int col = lp.add_variable(name);
    col_of.emplace(name, col);
    return col;
  };

  // Strip comments, join into a token stream with section markers.
  std::vector<std::string> tokens;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const auto cut = line.find('\\');
      if (cut != std::string::npos) line.erase(cut);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
    }
  }

  enum class Section { none, objective, constraints, bounds, end };
  Section section = Section::none;
  std::size_t pos = 0;
  auto peek_keyword = [&](Section& next) {
    if (pos >= tokens.size()) return false;
    std::string low = tokens[pos];
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (low == "minimize" || low == "min") { next = Section::objective; return true; }
    if (low == "maximize" || low == "max")
      throw LpError("only minimization LPs are supported");
    if (low == "subject") {
      if (pos + 1 < tokens.size()) {
        std::string low2 = tokens[pos + 1];
        std::transform(low2.begin(), low2.end(), low2.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (low2 == "to") { next = Section::constraints; ++pos; return true; }
      }
      throw LpError("malformed Subject To header");
    }
    if (low == "st" || low == "s.t." || low == "st:") { next = Section::constraints; return true; }
    if (low == "bounds") { next = Section::bounds; return true; }
    if (low == "end") { next = Section::end; return true; }
    return false;
  };

  auto is_number = [](const std::string& s) {
    char* end = nullptr;
    std::strtod(s.c_str(), &end);
    return end != s.c_str() && *end == '\0';
  };

  // Parses "name:"-prefixed linear expression up to a relation token or the
  // next section keyword.
  std::string pending_name;
  std::vector<std::pair<int, double>> terms;
  auto flush_objective = [&]() {
    lp.objective = terms;
    terms.clear();
  };

  while (pos < tokens.size()) {
    Section next;
    if (peek_keyword(next)) {
      if (section == Section::objective) flush_objective();
      section = next;
      ++pos;
      if (section == Section::end) break;
      pending_name.clear();
      continue;
    }
    if (section == Section::objective || section == Section::constraints) {
      double sign = 1.0;
      std::string tok = tokens[pos];
      if (!tok.empty() && tok.back() == ':' && terms.empty()) {
        pending_name = tok.substr(0, tok.size() - 1);
        ++pos;
        continue;
      }
      if (tok == "<=" || tok == "=<" || tok == ">=" || tok == "=>" || tok == "=") {
        if (section != Section::constraints)
          throw LpError("relation token outside constraint section");
        Relation rel = (tok == "=") ? Relation::eq
                       : (tok[0] == '<' || tok[1] == '<') ? Relation::le
                                                          : Relation::ge;
        ++pos;
        if (pos >= tokens.size() || !is_number(tokens[pos]))
          throw LpError("constraint missing numeric rhs");
        const double rhs = std::strtod(tokens[pos].c_str(), nullptr);
        ++pos;
        std::string name = pending_name.empty()
                               ? "c" + std::to_string(lp.rows.size())
                               : pending_name;
        lp.add_row(std::move(name), terms, rel, rhs);
        terms.clear();
        pending_name.clear();
        continue;
      }
      while (tok == "+" || tok == "-") {
        if (tok == "-") sign = -sign;
        ++pos;
        if (pos >= tokens.size()) throw LpError("dangling sign in expression");
        tok = tokens[pos];
      }
      double coeff = sign;
      if (is_number(tok)) {
        coeff *= std::strtod(tok.c_str(), nullptr);
        ++pos;
        if (pos >= tokens.size()) throw LpError("numeric term without variable");
        tok = tokens[pos];
      }
      terms.emplace_back(intern(tok), coeff);
      ++pos;
      continue;
    }
    if (section == Section::bounds) {
      // Only the default-reinforcing "x >= number" form is accepted.
      if (pos + 2 < tokens.size() && tokens[pos + 1] == ">=" &&
          is_number(tokens[pos + 2])) {
        if (std::strtod(tokens[pos + 2].c_str(), nullptr) != 0.0)
          throw LpError("unsupported bound (variables are non-negative)");
        intern(tokens[pos]);
        pos += 3;
        continue;
      }
      throw LpError("unsupported bounds syntax near token '" + tokens[pos] + "'");
    }
    throw LpError("unexpected token '" + tokens[pos] + "' before any section");
  }

  // Merge duplicate columns within each row for a canonical representation.
  auto canonicalize = [](std::vector<std::pair<int, double>>& v) {
    std::map<int, double> acc;
    for (const auto& [c, x] : v) acc[c] += x;
    v.assign(acc.begin(), acc.end());
  };
  canonicalize(lp.objective);
  for (auto& row : lp.rows) canonicalize(row.coeffs);
  lp.check_well_formed();
  return lp;
}

}  // namespace coflowhpn
