#pragma once

#include "efpo/instance.hpp"
#include "efpo/lp.hpp"

#include <algorithm>
#include <cstddef>
#include <string>
#include <type_traits>
#include <vector>

namespace efpo {

template <class Scalar>
Scalar scalar_from(const Rational& x) {
    if constexpr (std::is_same_v<Scalar, Rational>) return x;
    else return to_double(x);
}

/// Variable indices of a lottery (q, p) embedded in a larger program.
struct LotteryLayout {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t base = 0;

    std::size_t q(std::size_t k, std::size_t i, std::size_t j) const { return base + (k * n + i) * n + j; }
    std::size_t p(std::size_t k) const { return base + m * n * n + k; }
    std::size_t end() const { return base + m * n * n + m; }
};

/// Declares q and p (all nonnegative) and adds the row/column sum and total
/// probability constraints.
template <class Scalar>
LotteryLayout add_lottery_polytope(BasicLinearProgram<Scalar>& lp, std::size_t n, std::size_t m) {
    LotteryLayout L{n, m, lp.num_variables()};
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                lp.add_variable("q" + std::to_string(k + 1) + "_" + std::to_string(i + 1) + "_" +
                                std::to_string(j + 1));
    for (std::size_t k = 0; k < m; ++k) lp.add_variable("p" + std::to_string(k + 1));

    using TermS = BasicTerm<Scalar>;
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<TermS> row;
            for (std::size_t i = 0; i < n; ++i) row.push_back({L.q(k, i, j), Scalar(1)});
            row.push_back({L.p(k), Scalar(-1)});
            lp.add_constraint(std::move(row), Relation::Equal, Scalar(0),
                              "bundle" + std::to_string(j + 1) + "_p" + std::to_string(k + 1));
        }
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<TermS> row;
            for (std::size_t j = 0; j < n; ++j) row.push_back({L.q(k, i, j), Scalar(1)});
            row.push_back({L.p(k), Scalar(-1)});
            lp.add_constraint(std::move(row), Relation::Equal, Scalar(0),
                              "agent" + std::to_string(i + 1) + "_p" + std::to_string(k + 1));
        }
    }
    std::vector<TermS> total;
    for (std::size_t k = 0; k < m; ++k) total.push_back({L.p(k), Scalar(1)});
    lp.add_constraint(std::move(total), Relation::Equal, Scalar(1), "total");
    return L;
}

/// Terms of u_i(q; other) = sum_k sum_j u^k_{ij} q^k_{other,j}, scaled by `scale`.
template <class Scalar>
void append_utility_terms(std::vector<BasicTerm<Scalar>>& row, const Instance& inst, const LotteryLayout& L,
                          std::size_t i, std::size_t other, const Rational& scale = Rational(1)) {
    if (is_zero(scale)) return;
    for (std::size_t k = 0; k < inst.partitions(); ++k)
        for (std::size_t j = 0; j < inst.agents(); ++j) {
            const Rational& u = inst.utility(k, i, j);
            if (!is_zero(u)) row.push_back({L.q(k, other, j), scalar_from<Scalar>(u * scale)});
        }
}

/// Merges duplicate variable entries so rows stay sparse and canonical.
template <class Scalar>
std::vector<BasicTerm<Scalar>> compact(std::vector<BasicTerm<Scalar>> row) {
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.var < b.var; });
    std::vector<BasicTerm<Scalar>> out;
    for (auto& t : row) {
        if (!out.empty() && out.back().var == t.var) out.back().coef += t.coef;
        else out.push_back(std::move(t));
    }
    std::erase_if(out, [](const auto& t) { return ScalarTraits<Scalar>::zero(t.coef); });
    return out;
}

/// u_i(q; i) >= u_i(q; other) for every ordered pair.
inline void add_envy_free_constraints(LinearProgram& lp, const Instance& inst, const LotteryLayout& L) {
    for (std::size_t i = 0; i < inst.agents(); ++i)
        for (std::size_t other = 0; other < inst.agents(); ++other) {
            if (other == i) continue;
            std::vector<Term> row;
            append_utility_terms(row, inst, L, i, i);
            append_utility_terms(row, inst, L, i, other, Rational(-1));
            lp.add_constraint(compact(std::move(row)), Relation::GreaterEqual, 0,
                              "ef" + std::to_string(i + 1) + "_" + std::to_string(other + 1));
        }
}

/// Terms of the social welfare sum_i u_i(q; i), each agent weighted by w_i
/// (all ones when `weights` is empty).
template <class Scalar>
std::vector<BasicTerm<Scalar>> welfare_terms(const Instance& inst, const LotteryLayout& L,
                                             const RationalVector& weights = {}) {
    std::vector<BasicTerm<Scalar>> row;
    for (std::size_t i = 0; i < inst.agents(); ++i)
        append_utility_terms(row, inst, L, i, i, weights.empty() ? Rational(1) : weights[i]);
    return compact(std::move(row));
}

inline Lottery extract_lottery(const LotteryLayout& L, const RationalVector& x) {
    Lottery lot;
    lot.p.resize(L.m);
    lot.q.assign(L.m, SquareMatrix(L.n));
    for (std::size_t k = 0; k < L.m; ++k) {
        lot.p[k] = x[L.p(k)];
        for (std::size_t i = 0; i < L.n; ++i)
            for (std::size_t j = 0; j < L.n; ++j) lot.q[k](i, j) = x[L.q(k, i, j)];
    }
    return lot;
}

}  // namespace efpo
