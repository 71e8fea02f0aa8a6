#pragma once

#include "efpo/instance.hpp"
#include "efpo/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efpo {

using WeightVector = RationalVector;
using Arc = std::pair<std::size_t, std::size_t>;

/// Directed graph on agents with arc (l, h) iff l strictly envies h.
struct EnvyGraph {
    std::size_t n = 0;
    std::vector<Arc> arcs;  // sorted, no self-loops

    bool has_arc(std::size_t l, std::size_t h) const {
        return std::binary_search(arcs.begin(), arcs.end(), Arc{l, h});
    }
    bool empty() const { return arcs.empty(); }
};

struct RhoEpsilon {
    Rational rho;
    Rational epsilon;
    std::size_t j_size = 0;
};

/// rho = 1/2 * min over (k, l, h, a, b) with u^k_{la} < u^k_{lb} and
/// u^k_{ha} < u^k_{hb} of (u^k_{lb} - u^k_{la}) / (u^k_{hb} - u^k_{ha}), or 1/2
/// when no such tuple exists; epsilon = rho^n / n.
///
/// For fixed (k, a, b) the tuple set is a product of the agents with a
/// positive difference d = u_b - u_a, so the minimum ratio is
/// min(d) / max(d) and |J| gains count^2. This is O(m n^3) rather than the
/// O(m n^4) tuple scan, with identical results.
inline RhoEpsilon compute_rho(const Instance& inst) {
    const std::size_t n = inst.agents();
    std::optional<Rational> min_ratio;
    std::size_t j_size = 0;
    for (std::size_t k = 0; k < inst.partitions(); ++k) {
        const SquareMatrix& u = inst.utilities(k);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b) continue;
                std::optional<Rational> lo, hi;
                std::size_t count = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    Rational d = u(i, b) - u(i, a);
                    if (!is_positive(d)) continue;
                    ++count;
                    if (!lo || d < *lo) lo = d;
                    if (!hi || d > *hi) hi = d;
                }
                if (count == 0) continue;
                assert(is_positive(*hi));
                j_size += count * count;
                Rational ratio = *lo / *hi;
                if (!min_ratio || ratio < *min_ratio) min_ratio = std::move(ratio);
            }
    }
    RhoEpsilon out;
    out.rho = min_ratio ? Rational(*min_ratio / 2) : Rational(1, 2);
    out.epsilon = pow(out.rho, static_cast<unsigned>(n)) / n;
    out.j_size = j_size;
    return out;
}

inline EnvyGraph envy_graph_from_utilities(const std::vector<RationalVector>& e) {
    EnvyGraph g;
    g.n = e.size();
    for (std::size_t l = 0; l < g.n; ++l)
        for (std::size_t h = 0; h < g.n; ++h)
            if (l != h && e[l][l] < e[l][h]) g.arcs.emplace_back(l, h);
    return g;
}

inline EnvyGraph envy_graph(const Instance& inst, const Lottery& lot) {
    return envy_graph_from_utilities(utility_matrix(inst, lot));
}

struct AcyclicityResult {
    bool acyclic = true;
    std::vector<std::size_t> cycle;  // l_1 -> l_2 -> ... -> l_1 when cyclic

    explicit operator bool() const { return acyclic; }
};

inline AcyclicityResult is_acyclic(const EnvyGraph& g) {
    std::vector<std::vector<std::size_t>> out(g.n);
    for (const auto& [l, h] : g.arcs) out[l].push_back(h);
    enum Color : unsigned char { White, Grey, Black };
    std::vector<Color> color(g.n, White);
    std::vector<std::size_t> parent(g.n, g.n);

    // Iterative DFS; a grey successor closes a cycle.
    for (std::size_t root = 0; root < g.n; ++root) {
        if (color[root] != White) continue;
        std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
        color[root] = Grey;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next == out[v].size()) {
                color[v] = Black;
                stack.pop_back();
                continue;
            }
            const std::size_t w = out[v][next++];
            if (color[w] == Grey) {
                AcyclicityResult r{false, {}};
                for (std::size_t x = v; x != w; x = parent[x]) r.cycle.push_back(x);
                r.cycle.push_back(w);
                std::reverse(r.cycle.begin(), r.cycle.end());
                return r;
            }
            if (color[w] == White) {
                color[w] = Grey;
                parent[w] = v;
                stack.emplace_back(w, 0);
            }
        }
    }
    return {};
}

class CyclicGraphError : public std::runtime_error {
public:
    explicit CyclicGraphError(std::vector<std::size_t> cycle)
        : std::runtime_error("envy graph has a cycle; no weights exist"), cycle_(std::move(cycle)) {}
    const std::vector<std::size_t>& cycle() const { return cycle_; }

private:
    std::vector<std::size_t> cycle_;
};

/// d_i = number of arcs on a longest path ending at i. Arc (l, h) forces
/// d_h >= d_l + 1, which is the direction the weight condition needs.
inline std::vector<unsigned> longest_path_depths(const EnvyGraph& g) {
    if (auto r = is_acyclic(g); !r) throw CyclicGraphError(r.cycle);
    std::vector<std::vector<std::size_t>> out(g.n);
    std::vector<std::size_t> indegree(g.n, 0);
    for (const auto& [l, h] : g.arcs) {
        out[l].push_back(h);
        ++indegree[h];
    }
    std::vector<unsigned> depth(g.n, 0);
    std::vector<std::size_t> ready;
    for (std::size_t v = 0; v < g.n; ++v)
        if (indegree[v] == 0) ready.push_back(v);
    while (!ready.empty()) {
        const std::size_t v = ready.back();
        ready.pop_back();
        for (std::size_t h : out[v]) {
            depth[h] = std::max(depth[h], depth[v] + 1);
            if (--indegree[h] == 0) ready.push_back(h);
        }
    }
    return depth;
}

/// w_i = rho^{d_i} / sum_j rho^{d_j}.
inline WeightVector weights_from_depths(const std::vector<unsigned>& depth, const Rational& rho) {
    WeightVector w(depth.size());
    Rational total = 0;
    for (std::size_t i = 0; i < depth.size(); ++i) {
        w[i] = pow(rho, depth[i]);
        total += w[i];
    }
    for (auto& x : w) x /= total;
    return w;
}

/// Weights in W_epsilon with w_h <= rho * w_l on every arc (l, h). Throws
/// CyclicGraphError (with a witness cycle) if `g` has a cycle.
inline WeightVector synthesize_weights(const EnvyGraph& g, const RhoEpsilon& re) {
    return weights_from_depths(longest_path_depths(g), re.rho);
}

/// True if w_h <= rho * w_l holds on every arc of `g`.
inline bool satisfies_arc_conditions(const EnvyGraph& g, const WeightVector& w, const Rational& rho) {
    return std::all_of(g.arcs.begin(), g.arcs.end(),
                       [&](const Arc& a) { return w[a.second] <= rho * w[a.first]; });
}

inline bool in_weight_simplex(const WeightVector& w, const Rational& epsilon) {
    Rational total = 0;
    for (const auto& x : w) {
        if (x < epsilon) return false;
        total += x;
    }
    return total == 1;
}

/// The conditional feasibility program on weights: sum w = 1, w_i >= epsilon,
/// and w_h - rho w_l <= 0 guarded by u_l(q; h) - u_l(q; l).
inline LPOutcome solve_weight_program(const Instance& inst, const Lottery& lot, const RhoEpsilon& re) {
    const std::size_t n = inst.agents();
    LinearProgram plain;
    for (std::size_t i = 0; i < n; ++i) plain.add_variable("w" + std::to_string(i + 1), re.epsilon);
    std::vector<Term> sum;
    for (std::size_t i = 0; i < n; ++i) sum.push_back({i, 1});
    plain.add_constraint(std::move(sum), Relation::Equal, 1, "simplex");
    plain.set_objective(Sense::Feasibility);

    const auto e = utility_matrix(inst, lot);
    std::vector<ConditionalConstraint> conditional;
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t h = 0; h < n; ++h)
            if (l != h)
                conditional.push_back({e[l][h] - e[l][l], {{h, 1}, {l, -re.rho}}, Relation::LessEqual, 0});
    return solve_conditional_feasibility(plain, conditional);
}

}  // namespace efpo
