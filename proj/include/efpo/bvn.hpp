#pragma once

#include "efpo/instance.hpp"

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efpo {

using Permutation = std::vector<std::size_t>;  // agent i receives bundle perm[i]

struct BvnTerm {
    Permutation perm;
    Rational alpha;

    friend bool operator==(const BvnTerm&, const BvnTerm&) = default;
};

struct BvnPartition {
    std::size_t partition = 0;  // 0-based index into the lottery
    std::vector<BvnTerm> terms;  // alphas > 0, summing to 1

    friend bool operator==(const BvnPartition&, const BvnPartition&) = default;
};

/// A lottery as a distribution over deterministic allocations: partition k
/// with probability p[k], then permutation perm with probability alpha.
/// Partitions with p_k = 0 have no entry.
struct BvnDecomposition {
    std::size_t n = 0;
    RationalVector p;
    std::vector<BvnPartition> partitions;

    friend bool operator==(const BvnDecomposition&, const BvnDecomposition&) = default;
};

namespace detail {

/// Kuhn's augmenting-path matching on the nonzero entries of `a`. Rows are
/// matched in order, each trying columns in ascending order. Returns the
/// row-to-column assignment, or an empty vector if no perfect matching exists.
inline Permutation perfect_matching(const SquareMatrix& a) {
    const std::size_t n = a.size();
    std::vector<std::size_t> row_of(n, n);
    std::vector<char> visited(n);
    auto augment = [&](auto&& self, std::size_t row) -> bool {
        for (std::size_t col = 0; col < n; ++col) {
            if (is_zero(a(row, col)) || visited[col]) continue;
            visited[col] = 1;
            if (row_of[col] == n || self(self, row_of[col])) {
                row_of[col] = row;
                return true;
            }
        }
        return false;
    };
    for (std::size_t row = 0; row < n; ++row) {
        std::fill(visited.begin(), visited.end(), 0);
        if (!augment(augment, row)) return {};
    }
    Permutation perm(n);
    for (std::size_t col = 0; col < n; ++col) perm[row_of[col]] = col;
    return perm;
}

}  // namespace detail

/// Greedy peeling of a doubly stochastic matrix into permutation matrices.
/// Each peel empties a support entry, so the residual moves to a strictly
/// lower-dimensional face of the Birkhoff polytope and at most (n-1)^2 + 1
/// terms result.
inline std::vector<BvnTerm> decompose_bistochastic(SquareMatrix a) {
    const std::size_t n = a.size();
    std::vector<BvnTerm> terms;
    Rational remaining = 1;
    while (is_positive(remaining)) {
        Permutation perm = detail::perfect_matching(a);
        if (perm.empty()) throw InternalError("doubly stochastic residual has no perfect matching");
        Rational alpha = a(0, perm[0]);
        for (std::size_t i = 1; i < n; ++i)
            if (a(i, perm[i]) < alpha) alpha = a(i, perm[i]);
        for (std::size_t i = 0; i < n; ++i) a(i, perm[i]) -= alpha;
        remaining -= alpha;
        terms.push_back({std::move(perm), std::move(alpha)});
    }
    return terms;
}

/// Throws StructuralError on an invalid lottery.
inline BvnDecomposition decompose(const Instance& inst, const Lottery& lot) {
    require_valid(inst, lot);
    BvnDecomposition dec;
    dec.n = inst.agents();
    dec.p = lot.p;
    for (std::size_t k = 0; k < lot.partitions(); ++k) {
        if (is_zero(lot.p[k])) continue;
        SquareMatrix scaled = lot.q[k];
        for (std::size_t i = 0; i < dec.n; ++i)
            for (std::size_t j = 0; j < dec.n; ++j) scaled(i, j) /= lot.p[k];
        dec.partitions.push_back({k, decompose_bistochastic(std::move(scaled))});
    }
    return dec;
}

/// q^k_ij = p_k * sum of alpha over permutations sending i to j.
inline Lottery reconstruct(const BvnDecomposition& dec) {
    Lottery lot;
    lot.p = dec.p;
    lot.q.assign(dec.p.size(), SquareMatrix(dec.n));
    for (const auto& part : dec.partitions)
        for (const auto& term : part.terms)
            for (std::size_t i = 0; i < dec.n; ++i) lot.q[part.partition](i, term.perm[i]) += dec.p[part.partition] * term.alpha;
    return lot;
}

inline bool is_permutation_of(const Permutation& perm, std::size_t n) {
    if (perm.size() != n) return false;
    std::vector<char> seen(n);
    for (std::size_t j : perm) {
        if (j >= n || seen[j]) return false;
        seen[j] = 1;
    }
    return true;
}

/// Throws StructuralError unless `dec` describes a probability distribution
/// over allocations with one entry for every partition of positive probability.
inline void validate_decomposition(const BvnDecomposition& dec) {
    if (dec.n == 0 || dec.p.empty()) throw StructuralError("decomposition needs n >= 1 and m >= 1");
    Rational total = 0;
    for (const auto& pk : dec.p) {
        if (is_negative(pk)) throw StructuralError("negative partition probability " + to_string(pk));
        total += pk;
    }
    if (total != 1) throw StructuralError("partition probabilities sum to " + to_string(total) + " != 1");
    std::vector<char> listed(dec.p.size());
    for (const auto& part : dec.partitions) {
        const std::string where = "partition " + std::to_string(part.partition + 1);
        if (part.partition >= dec.p.size()) throw StructuralError(where + " does not exist");
        if (listed[part.partition]) throw StructuralError(where + " listed twice");
        listed[part.partition] = 1;
        if (!is_positive(dec.p[part.partition])) throw StructuralError(where + " has probability 0 but is listed");
        Rational sum = 0;
        for (const auto& term : part.terms) {
            if (!is_permutation_of(term.perm, dec.n)) throw StructuralError(where + " has a malformed permutation");
            if (!is_positive(term.alpha)) throw StructuralError(where + " has a nonpositive coefficient");
            sum += term.alpha;
        }
        if (sum != 1) throw StructuralError(where + " coefficients sum to " + to_string(sum) + " != 1");
    }
    for (std::size_t k = 0; k < dec.p.size(); ++k)
        if (is_positive(dec.p[k]) && !listed[k])
            throw StructuralError("partition " + std::to_string(k + 1) + " has positive probability but no terms");
}

struct Draw {
    std::size_t partition = 0;  // 0-based
    Permutation perm;

    friend bool operator==(const Draw&, const Draw&) = default;
};

/// Seeded sampler over a decomposition. Each draw takes two 53-bit uniforms
/// u in [0, 1) from mt19937_64 and picks the first entry whose cumulative
/// probability exceeds u, compared exactly.
class BvnSampler {
public:
    BvnSampler(const BvnDecomposition& dec, std::uint64_t seed) : dec_(dec), rng_(seed) {
        validate_decomposition(dec_);
        entry_of_.assign(dec_.p.size(), dec_.partitions.size());
        for (std::size_t e = 0; e < dec_.partitions.size(); ++e) entry_of_[dec_.partitions[e].partition] = e;
    }

    Draw draw() {
        Rational u = uniform();
        Rational cumulative = 0;
        std::size_t k = last_positive();
        for (std::size_t i = 0; i < dec_.p.size(); ++i) {
            cumulative += dec_.p[i];
            if (u < cumulative) {
                k = i;
                break;
            }
        }
        const auto& terms = dec_.partitions[entry_of_[k]].terms;
        u = uniform();
        cumulative = 0;
        for (const auto& term : terms) {
            cumulative += term.alpha;
            if (u < cumulative) return {k, term.perm};
        }
        return {k, terms.back().perm};
    }

private:
    Rational uniform() {
        static const Rational scale = Rational(1) / Rational(Integer(1) << 53);
        return Rational(Integer(rng_() >> 11)) * scale;
    }

    std::size_t last_positive() const {
        std::size_t k = 0;
        for (std::size_t i = 0; i < dec_.p.size(); ++i)
            if (is_positive(dec_.p[i])) k = i;
        return k;
    }

    BvnDecomposition dec_;
    std::mt19937_64 rng_;
    std::vector<std::size_t> entry_of_;
};

inline Draw sample(const BvnDecomposition& dec, std::uint64_t seed) { return BvnSampler(dec, seed).draw(); }

inline std::vector<Draw> sample(const BvnDecomposition& dec, std::uint64_t seed, std::size_t count) {
    BvnSampler sampler(dec, seed);
    std::vector<Draw> out;
    out.reserve(count);
    for (std::size_t c = 0; c < count; ++c) out.push_back(sampler.draw());
    return out;
}

}  // namespace efpo
