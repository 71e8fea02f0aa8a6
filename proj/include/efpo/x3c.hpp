#pragma once

#include "efpo/instance.hpp"

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efpo {

class X3cError : public std::invalid_argument {
public:
    explicit X3cError(const std::string& what) : std::invalid_argument(what) {}
};

class InvalidCoverError : public X3cError {
public:
    using X3cError::X3cError;
};

using Triple = std::array<std::size_t, 3>;  // 0-based elements

/// Exact cover by 3-sets: universe {0..r-1}, family of triples.
struct X3cInstance {
    std::size_t r = 0;
    std::vector<Triple> triples;

    std::size_t t() const { return triples.size(); }

    friend bool operator==(const X3cInstance&, const X3cInstance&) = default;
};

/// Throws X3cError unless r is a positive multiple of 3, there is at least one
/// triple, and every triple has three distinct elements below r.
inline void validate_x3c(const X3cInstance& phi) {
    if (phi.r == 0 || phi.r % 3 != 0)
        throw X3cError("element count r = " + std::to_string(phi.r) + " must be a positive multiple of 3");
    if (phi.triples.empty()) throw X3cError("need at least one triple");
    for (std::size_t j = 0; j < phi.t(); ++j) {
        const Triple& s = phi.triples[j];
        const std::string where = "triple " + std::to_string(j + 1);
        for (std::size_t e : s)
            if (e >= phi.r)
                throw X3cError(where + " contains element " + std::to_string(e + 1) + " outside 1.." +
                               std::to_string(phi.r));
        if (s[0] == s[1] || s[0] == s[2] || s[1] == s[2]) throw X3cError(where + " repeats an element");
    }
}

/// f_i = number of triples containing element i.
inline std::vector<std::size_t> frequencies(const X3cInstance& phi) {
    std::vector<std::size_t> f(phi.r, 0);
    for (const auto& s : phi.triples)
        for (std::size_t e : s) ++f[e];
    return f;
}

/// Agent (= bundle) numbering of the reduction: base agents b_0..b_t, then set
/// agents h_{j,1..2t} grouped by j, then (v_i, w_i, z_i) per element.
/// Arguments are 0-based: j < t, l < 2t, i < r, c < 3.
struct X3cLayout {
    std::size_t t = 0;
    std::size_t r = 0;

    std::size_t agents() const { return t + 1 + 2 * t * t + 3 * r; }
    std::size_t partitions() const { return 3 * t; }
    std::size_t base(std::size_t k) const { return k; }
    std::size_t set(std::size_t j, std::size_t l) const { return t + 1 + j * 2 * t + l; }
    std::size_t v(std::size_t i) const { return t + 1 + 2 * t * t + 3 * i; }
    std::size_t w(std::size_t i) const { return v(i) + 1; }
    std::size_t z(std::size_t i) const { return v(i) + 2; }
    std::size_t partition(std::size_t j, std::size_t c) const { return 3 * j + c; }

    /// Names with 1-based subscripts: b0, b1, h1_1, v1, w1, z1, ...
    std::vector<std::string> agent_names() const {
        std::vector<std::string> names;
        names.reserve(agents());
        for (std::size_t k = 0; k <= t; ++k) names.push_back("b" + std::to_string(k));
        for (std::size_t j = 0; j < t; ++j)
            for (std::size_t l = 0; l < 2 * t; ++l)
                names.push_back("h" + std::to_string(j + 1) + "_" + std::to_string(l + 1));
        for (std::size_t i = 0; i < r; ++i)
            for (const char* family : {"v", "w", "z"}) names.push_back(family + std::to_string(i + 1));
        return names;
    }
};

struct ReductionOutput {
    X3cInstance phi;
    X3cLayout layout;
    Instance instance;
    Rational epsilon;
    Rational R;
    Rational Q;
    Rational K;
    std::vector<std::string> warnings;
};

/// Builds the fair division instance of the reduction. Fails on malformed
/// triples and on elements that appear in no triple (1/f_i is undefined).
inline ReductionOutput generate(const X3cInstance& phi) {
    validate_x3c(phi);
    const auto f = frequencies(phi);
    for (std::size_t i = 0; i < phi.r; ++i)
        if (f[i] == 0)
            throw X3cError("element " + std::to_string(i + 1) + " appears in no triple; the X3C instance has no cover");

    const std::size_t t = phi.t();
    const X3cLayout L{t, phi.r};
    const Rational tr(static_cast<unsigned long>(t));
    const Rational eps = 1 / (12 * tr * tr);
    const Rational R = 6 * tr * tr * tr / eps;
    const Rational Q = 6 * tr / eps;
    const Rational K = R + R / tr + Q + 6 + Rational(static_cast<unsigned long>(phi.r)) / tr;

    std::vector<std::string> warnings;
    if (t < 9)
        warnings.push_back("t = " + std::to_string(t) + " < 9: the reduction's correctness is not guaranteed");
    if (phi.r > 3 * t)
        warnings.push_back("r = " + std::to_string(phi.r) + " > 3t = " + std::to_string(3 * t) +
                           ": the reduction's correctness is not guaranteed");

    const std::size_t n = L.agents();
    std::vector<SquareMatrix> utilities(L.partitions(), SquareMatrix(n));
    for (std::size_t j = 0; j < t; ++j) {
        const Triple& s = phi.triples[j];
        for (std::size_t c = 0; c < 3; ++c) {
            SquareMatrix& u = utilities[L.partition(j, c)];
            const std::size_t bj = L.base(j + 1);
            u(L.base(0), L.base(0)) = R / tr;
            u(L.base(0), bj) = R;
            u(bj, bj) = R;
            if (c == 0) u(L.set(j, 0), L.set(j, 0)) = Q;
            if (c == 1) u(L.set(j, 1), L.set(j, 1)) = Q;
            for (std::size_t i : s) {
                const Rational fi(static_cast<unsigned long>(f[i]));
                u(L.z(i), L.z(i)) = 1 / fi;
                if (c != 1) {  // first and third partition of the triple
                    u(L.v(i), L.v(i)) = 2;
                    u(L.z(i), L.v(i)) = Rational(2, 3);
                }
                if (c != 0) {  // second and third
                    u(L.w(i), L.w(i)) = 2;
                    u(L.z(i), L.w(i)) = (1 + 1 / fi) / fi;
                }
            }
            if (c == 2) {
                u(L.set(j, 0), L.set(j, 0)) = Q * (1 - eps);
                u(L.set(j, 1), L.set(j, 1)) = Q * (1 - eps);
                for (std::size_t l = 2; l <= t; ++l) u(L.set(j, l), L.set(j, 0)) = eps;
                for (std::size_t l = t + 1; l < 2 * t; ++l) u(L.set(j, l), L.set(j, 1)) = eps;
            }
        }
    }
    return {phi, L, Instance(n, std::move(utilities)), eps, R, Q, K, std::move(warnings)};
}

/// The canonical allocation of partition (j, c), 0-based. Bundles are numbered
/// like their agents, so it is the identity.
inline std::vector<std::size_t> canonical_allocation(const ReductionOutput& out, std::size_t j, std::size_t c) {
    if (j >= out.layout.t || c >= 3)
        throw std::out_of_range("partition (" + std::to_string(j + 1) + ", " + std::to_string(c + 1) +
                                ") does not exist");
    std::vector<std::size_t> perm(out.layout.agents());
    std::iota(perm.begin(), perm.end(), 0);
    return perm;
}

namespace detail {

/// Empty string if `cover` is an exact cover, else the reason it is not.
inline std::string cover_defect(const X3cInstance& phi, const std::vector<std::size_t>& cover) {
    std::vector<std::size_t> hits(phi.r, 0);
    for (std::size_t j : cover) {
        if (j >= phi.t())
            return "triple " + std::to_string(j + 1) + " does not exist (t = " + std::to_string(phi.t()) + ")";
        for (std::size_t e : phi.triples[j]) ++hits[e];
    }
    for (std::size_t e = 0; e < phi.r; ++e)
        if (hits[e] > 1) return "element " + std::to_string(e + 1) + " is covered " + std::to_string(hits[e]) + " times";
    for (std::size_t e = 0; e < phi.r; ++e)
        if (hits[e] == 0) return "element " + std::to_string(e + 1) + " is not covered";
    return {};
}

}  // namespace detail

/// Triple indices are 0-based.
inline bool is_exact_cover(const X3cInstance& phi, const std::vector<std::size_t>& cover) {
    return detail::cover_defect(phi, cover).empty();
}

/// Probability 1/t on the canonical allocation of (j, 1) for j in the cover
/// and of (j, 2) otherwise. Throws InvalidCoverError naming the offending
/// element when `cover` is not an exact cover.
inline Lottery witness_lottery(const ReductionOutput& out, const std::vector<std::size_t>& cover) {
    if (auto defect = detail::cover_defect(out.phi, cover); !defect.empty())
        throw InvalidCoverError("not an exact cover: " + defect);
    const X3cLayout& L = out.layout;
    const std::size_t n = L.agents();
    const Rational share = Rational(1) / Rational(static_cast<unsigned long>(L.t));
    std::vector<char> chosen(L.t, 0);
    for (std::size_t j : cover) chosen[j] = 1;
    Lottery lot;
    lot.p.assign(L.partitions(), Rational(0));
    lot.q.assign(L.partitions(), SquareMatrix(n));
    for (std::size_t j = 0; j < L.t; ++j) {
        const std::size_t k = L.partition(j, chosen[j] ? 0 : 1);
        lot.p[k] = share;
        const auto perm = canonical_allocation(out, j, chosen[j] ? 0 : 1);
        for (std::size_t i = 0; i < n; ++i) lot.q[k](i, perm[i]) = share;
    }
    return lot;
}

struct PlantedX3c {
    X3cInstance phi;
    std::vector<std::size_t> cover;  // 0-based triple indices, ascending
};

/// Shuffles {0..r-1} into r/3 cover triples, adds `decoys` random triples and
/// shuffles the family. Deterministic for a fixed seed.
inline PlantedX3c plant_cover(std::size_t r, std::size_t decoys, std::uint64_t seed) {
    if (r == 0 || r % 3 != 0) throw X3cError("r must be a positive multiple of 3");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> elems(r);
    std::iota(elems.begin(), elems.end(), 0);
    std::shuffle(elems.begin(), elems.end(), rng);
    std::vector<std::pair<Triple, bool>> family;
    for (std::size_t e = 0; e < r; e += 3) family.push_back({{elems[e], elems[e + 1], elems[e + 2]}, true});
    for (std::size_t d = 0; d < decoys; ++d) {
        std::shuffle(elems.begin(), elems.end(), rng);
        family.push_back({{elems[0], elems[1], elems[2]}, false});
    }
    std::shuffle(family.begin(), family.end(), rng);
    PlantedX3c out;
    out.phi.r = r;
    for (std::size_t j = 0; j < family.size(); ++j) {
        auto s = family[j].first;
        std::sort(s.begin(), s.end());
        out.phi.triples.push_back(s);
        if (family[j].second) out.cover.push_back(j);
    }
    return out;
}

}  // namespace efpo
