#pragma once

#include "efpo/instance.hpp"
#include "efpo/lottery_program.hpp"
#include "efpo/lp.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

namespace efpo {

struct EnvyPair {
    std::size_t envious = 0;  // 0-based agents
    std::size_t envied = 0;
    Rational own;             // u_l(q; l)
    Rational other;           // u_l(q; h) > own
};

struct EnvyFreeReport {
    bool envy_free = true;
    std::vector<EnvyPair> pairs;  // sorted by (envious, envied)
};

/// Exact envy-freeness check. Throws StructuralError on an invalid lottery.
inline EnvyFreeReport verify_ef(const Instance& inst, const Lottery& lot) {
    require_valid(inst, lot);
    const auto e = utility_matrix(inst, lot);
    EnvyFreeReport rep;
    for (std::size_t l = 0; l < inst.agents(); ++l)
        for (std::size_t h = 0; h < inst.agents(); ++h)
            if (l != h && e[l][l] < e[l][h]) rep.pairs.push_back({l, h, e[l][l], e[l][h]});
    rep.envy_free = rep.pairs.empty();
    return rep;
}

enum class VerifyMode { Auto, Exact, Approx };

struct VerifyOptions {
    VerifyMode mode = VerifyMode::Auto;
    /// Auto switches to floating point above this many q variables (m n^2).
    std::size_t exact_variable_limit = 50000;
    /// Dense tableau cells the floating-point backend may allocate.
    std::size_t approx_cell_limit = 40'000'000;
};

/// Result of maximizing the total excess utility sum_i t_i over lotteries q~
/// with u_i(q~; i) >= u_i(q; i) + t_i and t >= 0.
struct ParetoCertificate {
    bool dominated = false;
    bool approximate = false;
    Rational objective;                      // exact mode
    double approx_objective = 0;             // approximate mode
    RationalVector excess;                   // exact mode, iff dominated
    std::optional<Lottery> dominating_lottery;  // exact mode, iff dominated
    std::vector<double> approx_excess;       // approximate mode, iff dominated
};

namespace detail {

template <class Scalar>
struct ParetoProgram {
    BasicLinearProgram<Scalar> lp;
    LotteryLayout layout;
    std::size_t first_excess = 0;
};

template <class Scalar>
ParetoProgram<Scalar> pareto_program(const Instance& inst, const RationalVector& current) {
    ParetoProgram<Scalar> prog;
    auto& lp = prog.lp;
    prog.layout = add_lottery_polytope(lp, inst.agents(), inst.partitions());
    prog.first_excess = lp.num_variables();
    for (std::size_t i = 0; i < inst.agents(); ++i) lp.add_variable("t" + std::to_string(i + 1));
    std::vector<BasicTerm<Scalar>> objective;
    for (std::size_t i = 0; i < inst.agents(); ++i) {
        std::vector<BasicTerm<Scalar>> row;
        append_utility_terms(row, inst, prog.layout, i, i);
        row.push_back({prog.first_excess + i, Scalar(-1)});
        lp.add_constraint(compact(std::move(row)), Relation::GreaterEqual, scalar_from<Scalar>(current[i]),
                          "gain" + std::to_string(i + 1));
        objective.push_back({prog.first_excess + i, Scalar(1)});
    }
    lp.set_objective(Sense::Maximize, std::move(objective));
    return prog;
}

/// Upper bound on the dense tableau the solver would build for `lp`.
template <class Scalar>
std::size_t tableau_cells(const BasicLinearProgram<Scalar>& lp) {
    std::size_t rows = lp.constraints().size();
    std::size_t cols = lp.num_variables();
    for (const auto& v : lp.variables())
        if (v.lower && v.upper) ++rows;
        else if (!v.lower && !v.upper) ++cols;
    cols += 2 * rows;  // at most one slack and one artificial per row
    return rows * (cols + 1);
}

}  // namespace detail

inline bool use_exact_backend(const Instance& inst, const VerifyOptions& opts) {
    switch (opts.mode) {
        case VerifyMode::Exact: return true;
        case VerifyMode::Approx: return false;
        case VerifyMode::Auto: break;
    }
    return inst.partitions() * inst.agents() * inst.agents() <= opts.exact_variable_limit;
}

/// The total-excess LP at `lot`, in exact form, for inspection.
inline LinearProgram pareto_lp(const Instance& inst, const Lottery& lot) {
    return detail::pareto_program<Rational>(inst, own_utilities(inst, lot)).lp;
}

/// Decides Pareto dominance of `lot`. The exact backend is authoritative; the
/// floating-point backend treats |objective| <= 1e-9 as zero and marks the
/// certificate approximate. Throws StructuralError on an invalid lottery and
/// CapExceededError when the floating-point tableau would be too large.
inline ParetoCertificate verify_pareto(const Instance& inst, const Lottery& lot, const VerifyOptions& opts = {}) {
    require_valid(inst, lot);
    const RationalVector current = own_utilities(inst, lot);
    ParetoCertificate cert;
    if (use_exact_backend(inst, opts)) {
        auto prog = detail::pareto_program<Rational>(inst, current);
        LPOutcome r = solve(prog.lp);
        if (!r.optimal())
            throw InternalError(std::string("excess LP with the lottery itself feasible reported ") +
                                to_string(r.status));
        cert.objective = r.objective_value;
        cert.dominated = is_positive(r.objective_value);
        if (cert.dominated) {
            cert.excess.assign(r.solution.begin() + static_cast<std::ptrdiff_t>(prog.first_excess),
                               r.solution.begin() + static_cast<std::ptrdiff_t>(prog.first_excess + inst.agents()));
            cert.dominating_lottery = extract_lottery(prog.layout, r.solution);
        }
        return cert;
    }

    cert.approximate = true;
    auto prog = detail::pareto_program<double>(inst, current);
    const std::size_t cells = detail::tableau_cells(prog.lp);
    if (cells > opts.approx_cell_limit)
        throw CapExceededError("floating-point excess LP needs about " + std::to_string(cells) +
                               " tableau cells, above the limit of " + std::to_string(opts.approx_cell_limit));
    BasicLPOutcome<double> r = solve(prog.lp);
    if (!r.optimal())
        throw InternalError(std::string("floating-point excess LP reported ") + to_string(r.status));
    cert.approx_objective = ScalarTraits<double>::zero(r.objective_value) ? 0.0 : r.objective_value;
    cert.dominated = ScalarTraits<double>::positive(r.objective_value);
    if (cert.dominated)
        cert.approx_excess.assign(r.solution.begin() + static_cast<std::ptrdiff_t>(prog.first_excess),
                                  r.solution.begin() + static_cast<std::ptrdiff_t>(prog.first_excess + inst.agents()));
    return cert;
}

struct VerificationReport {
    EnvyFreeReport ef;
    ParetoCertificate pareto;
    Rational social_welfare;

    bool ef_and_po() const { return ef.envy_free && !pareto.dominated; }
};

inline VerificationReport verify_all(const Instance& inst, const Lottery& lot, const VerifyOptions& opts = {}) {
    VerificationReport rep;
    rep.ef = verify_ef(inst, lot);
    rep.pareto = verify_pareto(inst, lot, opts);
    rep.social_welfare = social_welfare(inst, lot);
    return rep;
}

/// EF, undominated and social welfare at least k.
inline bool verify_threshold(const Instance& inst, const Lottery& lot, const Rational& k,
                             const VerifyOptions& opts = {}) {
    if (!verify_ef(inst, lot).envy_free) return false;
    if (social_welfare(inst, lot) < k) return false;
    return !verify_pareto(inst, lot, opts).dominated;
}

}  // namespace efpo
