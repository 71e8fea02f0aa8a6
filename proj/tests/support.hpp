#pragma once

#include "efpo/efpo.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace efpo::testing {

using Rng = std::mt19937_64;

inline long uniform_int(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

inline Instance random_instance(Rng& rng, std::size_t n, std::size_t m, long lo = -3, long hi = 3) {
    std::vector<SquareMatrix> u(m, SquareMatrix(n));
    for (auto& mat : u)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) mat(i, j) = uniform_int(rng, lo, hi);
    return Instance(n, std::move(u));
}

/// Rational in (0, 1] with denominator at most `den`.
inline Rational random_fraction(Rng& rng, long den = 12) {
    const long d = uniform_int(rng, 1, den);
    return Rational(uniform_int(rng, 1, d), d);
}

inline WeightVector random_positive_weights(Rng& rng, std::size_t n) {
    WeightVector w(n);
    for (auto& x : w) x = random_fraction(rng, 20);
    return w;
}

inline std::vector<std::size_t> random_permutation(Rng& rng, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    return perm;
}

/// Mixture of `pieces` random deterministic allocations with random rational
/// weights; always a valid lottery.
inline Lottery random_lottery(Rng& rng, std::size_t n, std::size_t m, std::size_t pieces = 3) {
    RationalVector weight(pieces);
    Rational total = 0;
    for (auto& x : weight) {
        x = random_fraction(rng);
        total += x;
    }
    Lottery lot;
    lot.p.assign(m, Rational(0));
    lot.q.assign(m, SquareMatrix(n));
    for (std::size_t s = 0; s < pieces; ++s) {
        const Rational a = weight[s] / total;
        const std::size_t k = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(m) - 1));
        const auto perm = random_permutation(rng, n);
        lot.p[k] += a;
        for (std::size_t i = 0; i < n; ++i) lot.q[k](i, perm[i]) += a;
    }
    return lot;
}

/// Random DAG on n nodes: arcs only from a hidden order's earlier to later node.
inline EnvyGraph random_dag(Rng& rng, std::size_t n, double density = 0.4) {
    const auto order = random_permutation(rng, n);
    std::bernoulli_distribution coin(density);
    EnvyGraph g{n, {}};
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            if (coin(rng)) g.arcs.emplace_back(order[a], order[b]);
    std::sort(g.arcs.begin(), g.arcs.end());
    return g;
}

/// rho by scanning every (k, l, h, a, b) tuple; the reference for compute_rho.
inline RhoEpsilon brute_force_rho(const Instance& inst) {
    const std::size_t n = inst.agents();
    std::optional<Rational> best;
    std::size_t count = 0;
    for (std::size_t k = 0; k < inst.partitions(); ++k)
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t h = 0; h < n; ++h)
                for (std::size_t a = 0; a < n; ++a)
                    for (std::size_t b = 0; b < n; ++b) {
                        const Rational dl = inst.utility(k, l, b) - inst.utility(k, l, a);
                        const Rational dh = inst.utility(k, h, b) - inst.utility(k, h, a);
                        if (!is_positive(dl) || !is_positive(dh)) continue;
                        ++count;
                        const Rational ratio = dl / dh;
                        if (!best || ratio < *best) best = ratio;
                    }
    RhoEpsilon re;
    re.rho = best ? Rational(*best / 2) : Rational(1, 2);
    re.epsilon = pow(re.rho, static_cast<unsigned>(n)) / n;
    re.j_size = count;
    return re;
}

inline Instance make_instance(std::initializer_list<std::vector<RationalVector>> partitions) {
    std::vector<SquareMatrix> u;
    for (const auto& rows : partitions) u.push_back(SquareMatrix::from_rows(rows));
    const std::size_t n = u.front().size();
    return Instance(n, std::move(u));
}

inline Lottery single_partition_lottery(const std::vector<RationalVector>& q) {
    return Lottery{{Rational(1)}, {SquareMatrix::from_rows(q)}};
}

}  // namespace efpo::testing
