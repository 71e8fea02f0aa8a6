#pragma once

#include "efpo/rational.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efpo {

/// Shape mismatch between objects that must agree on n and m. Distinct from a
/// constraint violation so validators can assume shape once this passes.
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an outcome the theory guarantees does not materialize.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

/// A problem is too large for the requested exact or approximate method.
class CapExceededError : public std::runtime_error {
public:
    explicit CapExceededError(const std::string& what) : std::runtime_error(what) {}
};

/// Dense row-major n x n matrix of rationals.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n) : n_(n), data_(n * n) {}

    static SquareMatrix from_rows(const std::vector<RationalVector>& rows) {
        SquareMatrix m(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != rows.size())
                throw StructuralError("matrix row " + std::to_string(i + 1) + " has " +
                                      std::to_string(rows[i].size()) + " entries, expected " +
                                      std::to_string(rows.size()));
            for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    static SquareMatrix identity(std::size_t n) {
        SquareMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    std::size_t size() const { return n_; }
    Rational& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<Rational> data_;
};

/// A fair division instance with partition-based utilities: utilities[k](i, j)
/// is agent i's value for bundle j of partition k.
class Instance {
public:
    Instance(std::size_t n, std::vector<SquareMatrix> utilities,
             std::vector<std::vector<std::string>> labels = {})
        : n_(n), utilities_(std::move(utilities)), labels_(std::move(labels)) {
        if (n_ == 0) throw StructuralError("instance needs at least one agent");
        if (utilities_.empty()) throw StructuralError("instance needs at least one partition");
        for (std::size_t k = 0; k < utilities_.size(); ++k)
            if (utilities_[k].size() != n_)
                throw StructuralError("partition " + std::to_string(k + 1) +
                                      " utility matrix is not " + std::to_string(n_) + "x" +
                                      std::to_string(n_));
        if (std::all_of(labels_.begin(), labels_.end(), [](const auto& l) { return l.empty(); }))
            labels_.clear();
        if (!labels_.empty()) {
            if (labels_.size() != utilities_.size())
                throw StructuralError("labels given for some partitions only");
            for (const auto& l : labels_)
                if (!l.empty() && l.size() != n_)
                    throw StructuralError("partition labels must name all n bundles");
        }
    }

    std::size_t agents() const { return n_; }
    std::size_t partitions() const { return utilities_.size(); }
    const Rational& utility(std::size_t k, std::size_t i, std::size_t j) const {
        return utilities_[k](i, j);
    }
    const SquareMatrix& utilities(std::size_t k) const { return utilities_[k]; }
    const std::vector<SquareMatrix>& all_utilities() const { return utilities_; }
    const std::vector<std::vector<std::string>>& labels() const { return labels_; }

    friend bool operator==(const Instance&, const Instance&) = default;

private:
    std::size_t n_;
    std::vector<SquareMatrix> utilities_;
    std::vector<std::vector<std::string>> labels_;
};

/// Compact lottery: p[k] is the probability of partition k, q[k](i, j) the
/// probability that agent i receives bundle j of partition k.
struct Lottery {
    RationalVector p;
    std::vector<SquareMatrix> q;

    std::size_t partitions() const { return p.size(); }
    std::size_t agents() const { return q.empty() ? 0 : q.front().size(); }

    friend bool operator==(const Lottery&, const Lottery&) = default;
};

/// Lottery that plays permutation `perm` (agent i gets bundle perm[i]) of
/// partition k with certainty.
inline Lottery deterministic_lottery(std::size_t n, std::size_t m, std::size_t k,
                                     const std::vector<std::size_t>& perm) {
    Lottery lot;
    lot.p.assign(m, Rational(0));
    lot.q.assign(m, SquareMatrix(n));
    lot.p[k] = 1;
    for (std::size_t i = 0; i < n; ++i) lot.q[k](i, perm[i]) = 1;
    return lot;
}

/// Coordinatewise mixture lambda * a + (1 - lambda) * b.
inline Lottery mix(const Lottery& a, const Lottery& b, const Rational& lambda) {
    if (a.partitions() != b.partitions() || a.agents() != b.agents())
        throw StructuralError("cannot mix lotteries of different shapes");
    const Rational rest = 1 - lambda;
    Lottery out = a;
    for (std::size_t k = 0; k < a.partitions(); ++k) {
        out.p[k] = lambda * a.p[k] + rest * b.p[k];
        for (std::size_t i = 0; i < a.agents(); ++i)
            for (std::size_t j = 0; j < a.agents(); ++j)
                out.q[k](i, j) = lambda * a.q[k](i, j) + rest * b.q[k](i, j);
    }
    return out;
}

/// Throws StructuralError unless `lot` has m partitions of n x n masses.
inline void check_shape(const Instance& inst, const Lottery& lot) {
    if (lot.p.size() != inst.partitions() || lot.q.size() != inst.partitions())
        throw StructuralError("lottery has " + std::to_string(lot.p.size()) + " probabilities and " +
                              std::to_string(lot.q.size()) + " mass matrices, instance has " +
                              std::to_string(inst.partitions()) + " partitions");
    for (std::size_t k = 0; k < lot.q.size(); ++k)
        if (lot.q[k].size() != inst.agents())
            throw StructuralError("lottery partition " + std::to_string(k + 1) +
                                  " is not " + std::to_string(inst.agents()) + "x" +
                                  std::to_string(inst.agents()));
}

struct Violation {
    enum class Kind { NegativeMass, NegativeProbability, ColumnSum, RowSum, TotalProbability };
    Kind kind;
    std::size_t partition = 0;  // 0-based; unused for TotalProbability
    std::size_t index = 0;      // row, column, or agent of a negative mass
    std::size_t second = 0;     // bundle of a negative mass
    Rational actual;
    Rational expected;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    explicit operator bool() const { return ok(); }
};

/// Checks nonnegativity, bistochastic slice sums and total probability exactly.
/// Messages use 1-based indices.
inline ValidationResult validate_lottery(const Instance& inst, const Lottery& lot) {
    check_shape(inst, lot);
    const std::size_t n = inst.agents();
    ValidationResult result;
    auto add = [&](Violation::Kind kind, std::size_t k, std::size_t a, std::size_t b,
                   const Rational& actual, const Rational& expected, std::string msg) {
        result.violations.push_back({kind, k, a, b, actual, expected, std::move(msg)});
    };
    Rational total = 0;
    for (std::size_t k = 0; k < lot.partitions(); ++k) {
        const Rational& pk = lot.p[k];
        total += pk;
        const std::string part = " of partition " + std::to_string(k + 1);
        if (is_negative(pk))
            add(Violation::Kind::NegativeProbability, k, 0, 0, pk, 0,
                "probability of partition " + std::to_string(k + 1) + " is " + to_string(pk) + " < 0");
        const SquareMatrix& q = lot.q[k];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (is_negative(q(i, j)))
                    add(Violation::Kind::NegativeMass, k, i, j, q(i, j), 0,
                        "mass q[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "]" +
                            part + " is " + to_string(q(i, j)) + " < 0");
        for (std::size_t j = 0; j < n; ++j) {
            Rational sum = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (!is_zero(q(i, j))) sum += q(i, j);
            if (sum != pk)
                add(Violation::Kind::ColumnSum, k, j, 0, sum, pk,
                    "column " + std::to_string(j + 1) + part + " sums to " + to_string(sum) +
                        " != p" + std::to_string(k + 1) + " = " + to_string(pk));
        }
        for (std::size_t i = 0; i < n; ++i) {
            Rational sum = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (!is_zero(q(i, j))) sum += q(i, j);
            if (sum != pk)
                add(Violation::Kind::RowSum, k, i, 0, sum, pk,
                    "row " + std::to_string(i + 1) + part + " sums to " + to_string(sum) +
                        " != p" + std::to_string(k + 1) + " = " + to_string(pk));
        }
    }
    if (total != 1)
        add(Violation::Kind::TotalProbability, 0, 0, 0, total, 1,
            "partition probabilities sum to " + to_string(total) + " != 1");
    return result;
}

/// Throws StructuralError describing the first violation if `lot` is invalid.
inline void require_valid(const Instance& inst, const Lottery& lot) {
    auto result = validate_lottery(inst, lot);
    if (!result.ok()) {
        std::ostringstream os;
        os << "invalid lottery: " << result.violations.front().message;
        if (result.violations.size() > 1)
            os << " (and " << result.violations.size() - 1 << " more)";
        throw StructuralError(os.str());
    }
}

/// Agent i's expected utility for the random bundle of agent `other`.
inline Rational expected_utility(const Instance& inst, const Lottery& lot, std::size_t i,
                                 std::size_t other) {
    check_shape(inst, lot);
    if (i >= inst.agents() || other >= inst.agents())
        throw std::out_of_range("agent index out of range");
    Rational sum = 0;
    for (std::size_t k = 0; k < inst.partitions(); ++k)
        for (std::size_t j = 0; j < inst.agents(); ++j) {
            const Rational& u = inst.utility(k, i, j);
            const Rational& q = lot.q[k](other, j);
            if (!is_zero(u) && !is_zero(q)) sum += u * q;
        }
    return sum;
}

/// All n^2 values u_i(q; i') at once; entry [i][other]. Skips zero utilities
/// and masses, so sparse instances with thousands of agents stay cheap.
inline std::vector<RationalVector> utility_matrix(const Instance& inst, const Lottery& lot) {
    check_shape(inst, lot);
    const std::size_t n = inst.agents();
    std::vector<RationalVector> out(n, RationalVector(n));
    std::vector<std::vector<std::size_t>> column_support(n);
    for (std::size_t k = 0; k < inst.partitions(); ++k) {
        const SquareMatrix& u = inst.utilities(k);
        for (auto& c : column_support) c.clear();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (!is_zero(u(i, j))) column_support[j].push_back(i);
        const SquareMatrix& q = lot.q[k];
        for (std::size_t other = 0; other < n; ++other)
            for (std::size_t j = 0; j < n; ++j) {
                const Rational& mass = q(other, j);
                if (is_zero(mass)) continue;
                for (std::size_t i : column_support[j]) out[i][other] += u(i, j) * mass;
            }
    }
    return out;
}

inline RationalVector own_utilities(const Instance& inst, const Lottery& lot) {
    auto e = utility_matrix(inst, lot);
    RationalVector out(inst.agents());
    for (std::size_t i = 0; i < inst.agents(); ++i) out[i] = std::move(e[i][i]);
    return out;
}

inline Rational social_welfare(const Instance& inst, const Lottery& lot) {
    Rational sw = 0;
    for (const auto& u : own_utilities(inst, lot)) sw += u;
    return sw;
}

}  // namespace efpo
