#pragma once

#include "efpo/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efpo {

/// Sign tests for the simplex. Rationals are exact; doubles use an absolute
/// tolerance of 1e-9.
template <class Scalar>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
    static bool zero(const Rational& x) { return x.sign() == 0; }
    static bool positive(const Rational& x) { return x.sign() > 0; }
    static bool negative(const Rational& x) { return x.sign() < 0; }
    static std::string str(const Rational& x) { return to_string(x); }
};

template <>
struct ScalarTraits<double> {
    static constexpr double tolerance = 1e-9;
    static bool zero(double x) { return std::abs(x) <= tolerance; }
    static bool positive(double x) { return x > tolerance; }
    static bool negative(double x) { return x < -tolerance; }
    static std::string str(double x) {
        std::ostringstream os;
        os.precision(17);
        os << x;
        return os.str();
    }
};

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Sense { Maximize, Minimize, Feasibility };
enum class LPStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
    }
    return "?";
}

template <class Scalar>
struct BasicTerm {
    std::size_t var;
    Scalar coef;
};

template <class Scalar>
struct BasicConstraint {
    std::vector<BasicTerm<Scalar>> row;
    Relation relation;
    Scalar rhs;
    std::string name;
};

template <class Scalar>
struct VariableSpec {
    std::string name;
    std::optional<Scalar> lower;
    std::optional<Scalar> upper;
};

template <class Scalar>
class BasicLinearProgram {
public:
    using Term = BasicTerm<Scalar>;
    using Constraint = BasicConstraint<Scalar>;

    /// New variable, nonnegative unless told otherwise. Returns its index.
    std::size_t add_variable(std::string name, std::optional<Scalar> lower = Scalar(0),
                             std::optional<Scalar> upper = std::nullopt) {
        variables_.push_back({std::move(name), std::move(lower), std::move(upper)});
        return variables_.size() - 1;
    }

    std::size_t add_free_variable(std::string name) {
        return add_variable(std::move(name), std::nullopt, std::nullopt);
    }

    void set_objective(Sense sense, std::vector<Term> terms = {}) {
        if (sense == Sense::Feasibility && !terms.empty())
            throw std::invalid_argument("feasibility programs carry no objective");
        check_terms(terms);
        sense_ = sense;
        objective_ = std::move(terms);
    }

    void add_constraint(std::vector<Term> row, Relation relation, Scalar rhs, std::string name = {}) {
        check_terms(row);
        constraints_.push_back({std::move(row), relation, std::move(rhs), std::move(name)});
    }

    void add_constraint(Constraint c) {
        check_terms(c.row);
        constraints_.push_back(std::move(c));
    }

    std::size_t num_variables() const { return variables_.size(); }
    const std::vector<VariableSpec<Scalar>>& variables() const { return variables_; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const std::vector<Term>& objective() const { return objective_; }
    Sense sense() const { return sense_; }

    /// Human-readable dump in an LP-file style, for debugging only.
    std::string to_text() const {
        using T = ScalarTraits<Scalar>;
        std::ostringstream os;
        auto expr = [&](const std::vector<Term>& terms) {
            if (terms.empty()) {
                os << "0";
                return;
            }
            bool first = true;
            for (const auto& t : terms) {
                if (!first) os << (T::negative(t.coef) ? " - " : " + ");
                else if (T::negative(t.coef)) os << "-";
                first = false;
                Scalar mag = T::negative(t.coef) ? Scalar(-t.coef) : t.coef;
                os << T::str(mag) << " " << variables_[t.var].name;
            }
        };
        os << (sense_ == Sense::Maximize ? "maximize" : sense_ == Sense::Minimize ? "minimize" : "feasible")
           << "\n obj: ";
        expr(objective_);
        os << "\nsubject to\n";
        for (std::size_t r = 0; r < constraints_.size(); ++r) {
            const auto& c = constraints_[r];
            os << " " << (c.name.empty() ? "c" + std::to_string(r + 1) : c.name) << ": ";
            expr(c.row);
            os << (c.relation == Relation::LessEqual ? " <= " : c.relation == Relation::Equal ? " = " : " >= ")
               << T::str(c.rhs) << "\n";
        }
        os << "bounds\n";
        for (const auto& v : variables_) {
            os << " ";
            if (v.lower) os << T::str(*v.lower) << " <= ";
            else if (!v.upper) os << "-inf <= ";
            os << v.name;
            if (v.upper) os << " <= " << T::str(*v.upper);
            os << "\n";
        }
        os << "end\n";
        return os.str();
    }

private:
    void check_terms(const std::vector<Term>& terms) const {
        for (const auto& t : terms)
            if (t.var >= variables_.size())
                throw std::invalid_argument("constraint references undeclared variable " +
                                            std::to_string(t.var));
    }

    std::vector<VariableSpec<Scalar>> variables_;
    std::vector<Term> objective_;
    Sense sense_ = Sense::Feasibility;
    std::vector<Constraint> constraints_;
};

template <class Scalar>
struct BasicLPOutcome {
    LPStatus status = LPStatus::Infeasible;
    std::vector<Scalar> solution;  // indexed by variable; empty unless optimal
    Scalar objective_value{};
    std::size_t pivots = 0;

    bool optimal() const { return status == LPStatus::Optimal; }
};

using LinearProgram = BasicLinearProgram<Rational>;
using LPOutcome = BasicLPOutcome<Rational>;
using Term = BasicTerm<Rational>;
using Constraint = BasicConstraint<Rational>;

namespace detail {

/// Dense simplex tableau in maximization form. Row r holds the constraint
/// coefficients with the right-hand side in the last slot; `profit` holds the
/// reduced costs c_j - z_j and, in its last slot, minus the current objective.
template <class Scalar>
class Tableau {
public:
    using T = ScalarTraits<Scalar>;

    Tableau(std::size_t cols, std::vector<std::vector<Scalar>> rows, std::vector<std::size_t> basis)
        : cols_(cols), rows_(std::move(rows)), basis_(std::move(basis)), blocked_(cols, false) {}

    std::size_t cols() const { return cols_; }
    std::size_t pivots() const { return pivots_; }
    std::vector<std::vector<Scalar>>& rows() { return rows_; }
    std::vector<std::size_t>& basis() { return basis_; }
    void block(std::size_t col) { blocked_[col] = true; }

    /// Recomputes reduced costs for objective `cost` (one entry per column).
    void load_objective(const std::vector<Scalar>& cost) {
        profit_.assign(cols_ + 1, Scalar(0));
        for (std::size_t j = 0; j < cols_; ++j) profit_[j] = cost[j];
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const Scalar& cb = cost[basis_[r]];
            if (T::zero(cb)) continue;
            for (std::size_t j = 0; j <= cols_; ++j)
                if (!T::zero(rows_[r][j])) profit_[j] -= cb * rows_[r][j];
        }
    }

    Scalar objective() const { return -profit_[cols_]; }

    void pivot(std::size_t pr, std::size_t pc) {
        ++pivots_;
        auto& prow = rows_[pr];
        const Scalar inv = Scalar(1) / prow[pc];
        support_.clear();
        for (std::size_t j = 0; j <= cols_; ++j) {
            if (T::zero(prow[j])) {
                prow[j] = Scalar(0);
                continue;
            }
            prow[j] *= inv;
            support_.push_back(j);
        }
        prow[pc] = Scalar(1);
        auto eliminate = [&](std::vector<Scalar>& row) {
            if (T::zero(row[pc])) return;
            const Scalar factor = row[pc];
            for (std::size_t j : support_) row[j] -= factor * prow[j];
            row[pc] = Scalar(0);
        };
        for (std::size_t r = 0; r < rows_.size(); ++r)
            if (r != pr) eliminate(rows_[r]);
        eliminate(profit_);
        basis_[pr] = pc;
    }

    /// Bland's rule: lowest-index improving column enters; among minimum-ratio
    /// rows the one whose basic variable has the lowest index leaves.
    LPStatus optimize() {
        for (;;) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j)
                if (!blocked_[j] && T::positive(profit_[j])) {
                    enter = j;
                    break;
                }
            if (enter == cols_) return LPStatus::Optimal;
            std::size_t leave = rows_.size();
            Scalar best{};
            for (std::size_t r = 0; r < rows_.size(); ++r) {
                const Scalar& a = rows_[r][enter];
                if (!T::positive(a)) continue;
                Scalar ratio = rows_[r][cols_] / a;
                if (leave == rows_.size()) {
                    leave = r;
                    best = std::move(ratio);
                    continue;
                }
                const Scalar diff = ratio - best;
                if (T::negative(diff) || (T::zero(diff) && basis_[r] < basis_[leave])) {
                    leave = r;
                    best = std::move(ratio);
                }
            }
            if (leave == rows_.size()) return LPStatus::Unbounded;
            pivot(leave, enter);
        }
    }

    /// Removes rows by index (ascending order not required).
    void erase_rows(std::vector<std::size_t> doomed) {
        std::sort(doomed.rbegin(), doomed.rend());
        for (std::size_t r : doomed) {
            rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(r));
            basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        }
    }

private:
    std::size_t cols_;
    std::vector<std::vector<Scalar>> rows_;
    std::vector<std::size_t> basis_;
    std::vector<bool> blocked_;
    std::vector<Scalar> profit_;
    std::vector<std::size_t> support_;
    std::size_t pivots_ = 0;
};

}  // namespace detail

/// Exact two-phase primal simplex with Bland's rule. Deterministic for a fixed
/// program; an optimal result is a basic feasible solution (a vertex).
template <class Scalar>
BasicLPOutcome<Scalar> solve(const BasicLinearProgram<Scalar>& lp) {
    using T = ScalarTraits<Scalar>;

    // Map each variable onto nonnegative columns: x = offset + sign * col (- neg).
    struct Column {
        Scalar offset{};
        std::size_t col = 0;
        bool flipped = false;
        std::optional<std::size_t> negative_part;
    };
    struct Row {
        std::vector<std::pair<std::size_t, Scalar>> coef;
        Relation relation;
        Scalar rhs;
    };

    std::vector<Column> map(lp.num_variables());
    std::vector<Row> rows;
    std::size_t structural = 0;
    for (std::size_t v = 0; v < lp.num_variables(); ++v) {
        const auto& spec = lp.variables()[v];
        Column& c = map[v];
        c.col = structural++;
        if (spec.lower) {
            c.offset = *spec.lower;
            if (spec.upper) rows.push_back({{{c.col, Scalar(1)}}, Relation::LessEqual, *spec.upper - *spec.lower});
        } else if (spec.upper) {
            c.offset = *spec.upper;
            c.flipped = true;
        } else {
            c.negative_part = structural++;
        }
    }
    for (const auto& con : lp.constraints()) {
        Row row{{}, con.relation, con.rhs};
        for (const auto& t : con.row) {
            if (T::zero(t.coef)) continue;
            const Column& c = map[t.var];
            row.rhs -= t.coef * c.offset;
            row.coef.emplace_back(c.col, c.flipped ? Scalar(-t.coef) : t.coef);
            if (c.negative_part) row.coef.emplace_back(*c.negative_part, Scalar(-t.coef));
        }
        rows.push_back(std::move(row));
    }

    std::size_t slack_count = 0;
    std::size_t artificial_count = 0;
    for (auto& row : rows) {
        if (T::negative(row.rhs)) {
            row.rhs = -row.rhs;
            for (auto& [col, a] : row.coef) a = -a;
            if (row.relation == Relation::LessEqual) row.relation = Relation::GreaterEqual;
            else if (row.relation == Relation::GreaterEqual) row.relation = Relation::LessEqual;
        }
        if (row.relation != Relation::Equal) ++slack_count;
        if (row.relation != Relation::LessEqual) ++artificial_count;
    }

    const std::size_t first_artificial = structural + slack_count;
    const std::size_t cols = first_artificial + artificial_count;
    std::vector<std::vector<Scalar>> dense(rows.size(), std::vector<Scalar>(cols + 1));
    std::vector<std::size_t> basis(rows.size());
    std::size_t next_slack = structural;
    std::size_t next_artificial = first_artificial;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto& d = dense[r];
        for (const auto& [col, a] : rows[r].coef) d[col] += a;
        d[cols] = rows[r].rhs;
        switch (rows[r].relation) {
            case Relation::LessEqual:
                d[next_slack] = Scalar(1);
                basis[r] = next_slack++;
                break;
            case Relation::GreaterEqual:
                d[next_slack++] = Scalar(-1);
                d[next_artificial] = Scalar(1);
                basis[r] = next_artificial++;
                break;
            case Relation::Equal:
                d[next_artificial] = Scalar(1);
                basis[r] = next_artificial++;
                break;
        }
    }

    detail::Tableau<Scalar> tab(cols, std::move(dense), std::move(basis));
    BasicLPOutcome<Scalar> out;

    if (artificial_count > 0) {
        std::vector<Scalar> phase1(cols, Scalar(0));
        for (std::size_t j = first_artificial; j < cols; ++j) phase1[j] = Scalar(-1);
        tab.load_objective(phase1);
        tab.optimize();
        if (T::negative(tab.objective())) {
            out.status = LPStatus::Infeasible;
            out.pivots = tab.pivots();
            return out;
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        std::vector<std::size_t> redundant;
        for (std::size_t r = 0; r < tab.rows().size(); ++r) {
            if (tab.basis()[r] < first_artificial) continue;
            std::size_t col = first_artificial;
            for (std::size_t j = 0; j < first_artificial; ++j)
                if (!T::zero(tab.rows()[r][j])) {
                    col = j;
                    break;
                }
            if (col == first_artificial) redundant.push_back(r);
            else tab.pivot(r, col);
        }
        tab.erase_rows(std::move(redundant));
        for (std::size_t j = first_artificial; j < cols; ++j) tab.block(j);
    }

    std::vector<Scalar> cost(cols, Scalar(0));
    if (lp.sense() != Sense::Feasibility) {
        const bool minimize = lp.sense() == Sense::Minimize;
        for (const auto& t : lp.objective()) {
            const Column& c = map[t.var];
            Scalar a = minimize ? Scalar(-t.coef) : t.coef;
            cost[c.col] += c.flipped ? Scalar(-a) : a;
            if (c.negative_part) cost[*c.negative_part] -= a;
        }
    }
    tab.load_objective(cost);
    out.status = tab.optimize();
    out.pivots = tab.pivots();
    if (out.status != LPStatus::Optimal) return out;

    std::vector<Scalar> value(cols, Scalar(0));
    for (std::size_t r = 0; r < tab.rows().size(); ++r) value[tab.basis()[r]] = tab.rows()[r][cols];
    out.solution.resize(lp.num_variables());
    for (std::size_t v = 0; v < lp.num_variables(); ++v) {
        const Column& c = map[v];
        Scalar x = c.flipped ? Scalar(c.offset - value[c.col]) : Scalar(c.offset + value[c.col]);
        if (c.negative_part) x -= value[*c.negative_part];
        out.solution[v] = std::move(x);
    }
    out.objective_value = Scalar(0);
    for (const auto& t : lp.objective()) out.objective_value += t.coef * out.solution[t.var];
    return out;
}

/// Evaluates a row at a point.
template <class Scalar>
Scalar evaluate(const std::vector<BasicTerm<Scalar>>& row, const std::vector<Scalar>& x) {
    Scalar s{};
    for (const auto& t : row) s += t.coef * x[t.var];
    return s;
}

/// True if `x` satisfies every constraint and bound of `lp` (exactly, for
/// rationals).
template <class Scalar>
bool satisfies(const BasicLinearProgram<Scalar>& lp, const std::vector<Scalar>& x) {
    using T = ScalarTraits<Scalar>;
    if (x.size() != lp.num_variables()) return false;
    for (std::size_t v = 0; v < x.size(); ++v) {
        const auto& spec = lp.variables()[v];
        if (spec.lower && T::negative(x[v] - *spec.lower)) return false;
        if (spec.upper && T::positive(x[v] - *spec.upper)) return false;
    }
    for (const auto& c : lp.constraints()) {
        const Scalar lhs = evaluate(c.row, x) - c.rhs;
        if (c.relation == Relation::LessEqual && T::positive(lhs)) return false;
        if (c.relation == Relation::GreaterEqual && T::negative(lhs)) return false;
        if (c.relation == Relation::Equal && !T::zero(lhs)) return false;
    }
    return true;
}

/// A constraint that applies only when its guard, evaluated by the caller,
/// is strictly positive.
struct ConditionalConstraint {
    Rational guard;
    std::vector<Term> row;
    Relation relation;
    Rational rhs;
};

/// Solves `plain` together with exactly those conditionals whose guard > 0.
inline LPOutcome solve_conditional_feasibility(const LinearProgram& plain,
                                               const std::vector<ConditionalConstraint>& conditional) {
    LinearProgram lp = plain;
    for (const auto& c : conditional)
        if (is_positive(c.guard)) lp.add_constraint(c.row, c.relation, c.rhs);
    return solve(lp);
}

}  // namespace efpo
