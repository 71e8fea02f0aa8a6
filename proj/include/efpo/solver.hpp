#pragma once

#include "efpo/envy.hpp"
#include "efpo/instance.hpp"
#include "efpo/lottery_program.hpp"
#include "efpo/lp.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efpo {

inline constexpr std::size_t default_agent_cap = 6;

// ---------------------------------------------------------------------------
// Weighted sum of utilities

struct WeightedSumOptimum {
    Lottery lottery;
    Rational objective;
};

/// Maximizes sum_i w_i u_i(q; i) over the lottery polytope. The result is the
/// vertex the simplex reaches; with w > 0 it is Pareto-optimal.
inline WeightedSumOptimum weighted_sum_optimum(const Instance& inst, const WeightVector& w) {
    if (w.size() != inst.agents()) throw StructuralError("weight vector has wrong length");
    for (const auto& x : w)
        if (!is_positive(x)) throw std::invalid_argument("weights must be strictly positive");
    LinearProgram lp;
    const LotteryLayout L = add_lottery_polytope(lp, inst.agents(), inst.partitions());
    lp.set_objective(Sense::Maximize, welfare_terms<Rational>(inst, L, w));
    LPOutcome r = solve(lp);
    if (!r.optimal()) throw InternalError("weighted-sum LP is bounded and feasible but solver reported " +
                                          std::string(to_string(r.status)));
    return {extract_lottery(L, r.solution), r.objective_value};
}

inline Lottery weighted_sum_lp(const Instance& inst, const WeightVector& w) {
    return weighted_sum_optimum(inst, w).lottery;
}

// ---------------------------------------------------------------------------
// Utility profiles and Pareto faces

struct UtilityProfile {
    std::size_t partition = 0;
    std::vector<std::size_t> assignment;  // agent i receives bundle assignment[i]
    RationalVector values;                // values[i] = u^k_{i, assignment[i]}
};

/// All m * n! deterministic allocations with their utility vectors, partition
/// major and permutations in lexicographic order. Duplicates are kept.
inline std::vector<UtilityProfile> enumerate_profiles(const Instance& inst,
                                                      std::size_t agent_cap = default_agent_cap) {
    const std::size_t n = inst.agents();
    if (n > agent_cap)
        throw CapExceededError("profile enumeration needs m*n! allocations; n = " + std::to_string(n) +
                               " exceeds the cap of " + std::to_string(agent_cap) +
                               " agents, use the fixpoint method");
    std::vector<UtilityProfile> out;
    for (std::size_t k = 0; k < inst.partitions(); ++k) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            UtilityProfile p{k, perm, RationalVector(n)};
            for (std::size_t i = 0; i < n; ++i) p.values[i] = inst.utility(k, i, perm[i]);
            out.push_back(std::move(p));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return out;
}

/// Supporting hyperplane {x : normal . x = offset} of the profile hull with a
/// strictly positive normal, scaled so normal[0] == 1. `support` lists the
/// indices of the profiles on it.
struct ParetoFace {
    RationalVector normal;
    Rational offset;
    std::vector<std::size_t> support;
};

inline Rational dot(const RationalVector& a, const RationalVector& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!is_zero(a[i]) && !is_zero(b[i])) s += a[i] * b[i];
    return s;
}

namespace detail {

inline bool weakly_dominates(const RationalVector& a, const RationalVector& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] < b[i]) return false;
    return a != b;
}

/// Finds (w, w0) with w_i >= 1, w . v = w0 on `subset` and w . v <= w0 on
/// every other point, or nothing.
inline std::optional<std::pair<RationalVector, Rational>> supporting_normal(
    const std::vector<RationalVector>& points, const std::vector<std::size_t>& subset) {
    const std::size_t n = points.front().size();
    LinearProgram lp;
    for (std::size_t i = 0; i < n; ++i) lp.add_variable("w" + std::to_string(i + 1), Rational(1));
    const std::size_t w0 = lp.add_free_variable("w0");
    for (std::size_t s = 0; s < points.size(); ++s) {
        std::vector<Term> row;
        for (std::size_t i = 0; i < n; ++i)
            if (!is_zero(points[s][i])) row.push_back({i, points[s][i]});
        row.push_back({w0, -1});
        const bool on_face = std::find(subset.begin(), subset.end(), s) != subset.end();
        lp.add_constraint(std::move(row), on_face ? Relation::Equal : Relation::LessEqual, 0);
    }
    lp.set_objective(Sense::Feasibility);
    LPOutcome r = solve(lp);
    if (!r.optimal()) return std::nullopt;
    RationalVector w(r.solution.begin(), r.solution.begin() + static_cast<std::ptrdiff_t>(n));
    Rational offset = r.solution[w0];
    const Rational scale = w.front();
    for (auto& x : w) x /= scale;
    offset /= scale;
    return std::make_pair(std::move(w), std::move(offset));
}

/// Calls f(subset) for every subset of {0..count-1} of size 1..max_size in
/// size-then-lexicographic order.
template <class F>
void for_each_subset(std::size_t count, std::size_t max_size, F&& f) {
    for (std::size_t size = 1; size <= std::min(count, max_size); ++size) {
        std::vector<std::size_t> idx(size);
        std::iota(idx.begin(), idx.end(), 0);
        for (;;) {
            f(idx);
            std::size_t pos = size;
            while (pos > 0 && idx[pos - 1] == count - size + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t t = pos; t < size; ++t) idx[t] = idx[t - 1] + 1;
        }
    }
}

}  // namespace detail

/// Supporting hyperplanes with strictly positive normals covering every
/// Pareto-optimal point of the convex hull of the profiles.
///
/// Distinct undominated profile points are the only candidates (a dominated
/// point never maximizes a positive weighting). Every Pareto-optimal point is
/// a convex combination of at most n candidates on a common positive-normal
/// face, so each candidate subset of size <= n gets one exact LP; subsets
/// already inside a found face's support are skipped since that face covers
/// their hull. Faces come back sorted by (normal, offset).
inline std::vector<ParetoFace> pareto_faces(const std::vector<UtilityProfile>& profiles) {
    if (profiles.empty()) throw std::invalid_argument("pareto_faces needs at least one profile");
    const std::size_t n = profiles.front().values.size();

    std::vector<RationalVector> distinct;
    for (const auto& p : profiles) distinct.push_back(p.values);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<RationalVector> candidates;
    for (const auto& v : distinct) {
        bool dominated = std::any_of(distinct.begin(), distinct.end(),
                                     [&](const RationalVector& o) { return detail::weakly_dominates(o, v); });
        if (!dominated) candidates.push_back(v);
    }

    std::map<std::pair<RationalVector, Rational>, std::vector<bool>> found;  // -> candidate support
    detail::for_each_subset(candidates.size(), n, [&](const std::vector<std::size_t>& subset) {
        for (const auto& [face, on] : found)
            if (std::all_of(subset.begin(), subset.end(), [&](std::size_t s) { return on[s]; })) return;
        auto normal = detail::supporting_normal(candidates, subset);
        if (!normal) return;
        std::vector<bool> on(candidates.size());
        for (std::size_t s = 0; s < candidates.size(); ++s)
            on[s] = dot(normal->first, candidates[s]) == normal->second;
        found.emplace(std::move(*normal), std::move(on));
    });

    std::vector<ParetoFace> faces;
    for (const auto& [key, on] : found) {
        ParetoFace f{key.first, key.second, {}};
        for (std::size_t idx = 0; idx < profiles.size(); ++idx)
            if (dot(f.normal, profiles[idx].values) == f.offset) f.support.push_back(idx);
        faces.push_back(std::move(f));
    }
    return faces;  // std::map iteration order is already (normal, offset)
}

// ---------------------------------------------------------------------------
// Solving

enum class SolveMethod { Hull, Fixpoint };

inline const char* to_string(SolveMethod m) { return m == SolveMethod::Hull ? "hull" : "fixpoint"; }

struct SolveReport {
    Lottery lottery;
    SolveMethod method = SolveMethod::Hull;
    WeightVector weights;  // face normal (hull) or certifying weights (fixpoint)
    std::optional<Rational> face_offset;
    std::size_t iterations = 0;
    std::size_t faces_examined = 0;
    bool from_fallback = false;
};

/// Lottery polytope + envy-freeness + sum_i w_i u_i(q; i) = w0. Optionally
/// maximizes social welfare instead of pure feasibility.
inline LinearProgram face_program(const Instance& inst, const RationalVector& normal, const Rational& offset,
                                  bool maximize_welfare, LotteryLayout* layout = nullptr) {
    LinearProgram lp;
    const LotteryLayout L = add_lottery_polytope(lp, inst.agents(), inst.partitions());
    add_envy_free_constraints(lp, inst, L);
    lp.add_constraint(welfare_terms<Rational>(inst, L, normal), Relation::Equal, offset, "face");
    if (maximize_welfare) lp.set_objective(Sense::Maximize, welfare_terms<Rational>(inst, L));
    else lp.set_objective(Sense::Feasibility);
    if (layout) *layout = L;
    return lp;
}

/// An envy-free lottery on the face {sum_i w_i u_i(q; i) = offset}, if any.
inline std::optional<Lottery> envy_free_on_face(const Instance& inst, const RationalVector& normal,
                                                const Rational& offset) {
    LotteryLayout L;
    LPOutcome r = solve(face_program(inst, normal, offset, false, &L));
    if (!r.optimal()) return std::nullopt;
    return extract_lottery(L, r.solution);
}

/// Exact algorithm for small n: the first Pareto face (in face order) that
/// contains an envy-free lottery.
inline SolveReport hull_solve(const Instance& inst, std::size_t agent_cap = default_agent_cap) {
    const auto faces = pareto_faces(enumerate_profiles(inst, agent_cap));
    SolveReport report;
    report.method = SolveMethod::Hull;
    for (const auto& face : faces) {
        ++report.faces_examined;
        if (auto lot = envy_free_on_face(inst, face.normal, face.offset)) {
            report.lottery = std::move(*lot);
            report.weights = face.normal;
            report.face_offset = face.offset;
            return report;
        }
    }
    throw InternalError("no Pareto face admits an envy-free lottery (" + std::to_string(faces.size()) +
                        " faces examined); existence guarantees one");
}

struct WelfareResult {
    Lottery lottery;
    Rational welfare;
    RationalVector normal;
    Rational offset;
};

/// Maximum social welfare over envy-free lotteries lying on some Pareto face.
/// Ties keep the earliest face.
inline WelfareResult max_welfare_ef_po(const Instance& inst, std::size_t agent_cap = default_agent_cap) {
    const auto faces = pareto_faces(enumerate_profiles(inst, agent_cap));
    std::optional<WelfareResult> best;
    for (const auto& face : faces) {
        LotteryLayout L;
        LPOutcome r = solve(face_program(inst, face.normal, face.offset, true, &L));
        if (r.status == LPStatus::Unbounded) throw InternalError("welfare LP over a bounded polytope is unbounded");
        if (!r.optimal()) continue;
        if (!best || r.objective_value > best->welfare)
            best = WelfareResult{extract_lottery(L, r.solution), r.objective_value, face.normal, face.offset};
    }
    if (!best) throw InternalError("no Pareto face admits an envy-free lottery");
    return *best;
}

/// Decision version: is there an EF and PO lottery with welfare >= k?
inline bool welfare_at_least(const Instance& inst, const Rational& k, std::size_t agent_cap = default_agent_cap) {
    return max_welfare_ef_po(inst, agent_cap).welfare >= k;
}

// ---------------------------------------------------------------------------
// Fixed-point iteration

struct FixpointOptions {
    std::size_t max_iters = 100;
    /// Upper bound on the n^n depth vectors tried once iteration gives up.
    std::size_t fallback_limit = 50000;
};

struct FixpointStep {
    WeightVector weights;
    std::vector<Arc> arcs;  // envy graph of the LP vertex at these weights
};

struct FixpointOutcome {
    std::optional<SolveReport> report;
    std::vector<FixpointStep> trace;
    bool cycled = false;           // weights repeated before max_iters
    std::size_t fallback_tried = 0;
    bool fallback_skipped = false; // n^n above fallback_limit

    bool converged() const { return report.has_value(); }
};

/// Searches for (q, w) with q optimal for the weighted sum at w and w solving
/// the conditional weight program at q.
///
/// Each round solves the weighted-sum LP at w. If the vertex is envy-free it is
/// returned. Otherwise the optimal face at w is searched for an envy-free
/// lottery (ties matter: when every EF lottery is interior to an optimal face
/// no vertex can certify). Failing that, w is replaced by the depth weights of
/// the vertex's envy graph. When rounds run out or weights repeat, depth
/// vectors in {0..n-1}^n are tried in lexicographic order the same way.
inline FixpointOutcome fixpoint_solve(const Instance& inst, const FixpointOptions& opts = {}) {
    if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    const std::size_t n = inst.agents();
    const RhoEpsilon re = compute_rho(inst);
    FixpointOutcome out;

    auto certify = [&](const WeightVector& w, std::size_t iteration, bool fallback) -> bool {
        const WeightedSumOptimum opt = weighted_sum_optimum(inst, w);
        const EnvyGraph g = envy_graph(inst, opt.lottery);
        if (!fallback) out.trace.push_back({w, g.arcs});
        SolveReport rep;
        rep.method = SolveMethod::Fixpoint;
        rep.weights = w;
        rep.iterations = iteration;
        rep.from_fallback = fallback;
        if (g.empty()) {
            rep.lottery = opt.lottery;
            out.report = std::move(rep);
            return true;
        }
        if (satisfies_arc_conditions(g, w, re.rho))
            throw InternalError("weighted-sum optimum has envy although the weights satisfy every arc condition");
        if (auto lot = envy_free_on_face(inst, w, opt.objective)) {
            rep.lottery = std::move(*lot);
            out.report = std::move(rep);
            return true;
        }
        return false;
    };

    WeightVector w(n, Rational(1, static_cast<long>(n)));
    std::vector<WeightVector> seen{w};
    for (std::size_t it = 1; it <= opts.max_iters; ++it) {
        if (certify(w, it, false)) return out;
        const EnvyGraph g{n, out.trace.back().arcs};
        if (!is_acyclic(g)) throw InternalError("envy graph of a Pareto-optimal lottery has a cycle");
        w = synthesize_weights(g, re);
        if (std::find(seen.begin(), seen.end(), w) != seen.end()) {
            out.cycled = true;
            break;
        }
        seen.push_back(w);
    }

    std::size_t combos = 1;
    for (std::size_t i = 0; i < n && combos <= opts.fallback_limit; ++i) combos *= n;
    if (combos > opts.fallback_limit) {
        out.fallback_skipped = true;
        return out;
    }
    std::vector<unsigned> depth(n, 0);
    for (std::size_t c = 0; c < combos; ++c) {
        std::size_t code = c;
        for (std::size_t i = n; i-- > 0;) {
            depth[i] = static_cast<unsigned>(code % n);
            code /= n;
        }
        // Shifting every depth by a constant gives the same weights.
        if (*std::min_element(depth.begin(), depth.end()) != 0) continue;
        ++out.fallback_tried;
        if (certify(weights_from_depths(depth, re.rho), out.trace.size(), true)) return out;
    }
    return out;
}

}  // namespace efpo
