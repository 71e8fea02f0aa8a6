#pragma once

#include "efpo/bvn.hpp"
#include "efpo/envy.hpp"
#include "efpo/instance.hpp"
#include "efpo/solver.hpp"
#include "efpo/verify.hpp"
#include "efpo/x3c.hpp"

#include <json.hpp>

#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace efpo {

/// Insertion-ordered so emitted files are stable and read naturally.
using Json = nlohmann::ordered_json;

/// Well-formed JSON that does not match the expected schema.
class SchemaError : public ParseError {
public:
    explicit SchemaError(const std::string& what) : ParseError(what) {}
};

class FileError : public std::runtime_error {
public:
    explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void expect_keys(const Json& j, const std::string& where, std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional = {}) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    for (const char* key : required)
        if (!j.contains(key)) throw SchemaError(where + ": missing \"" + key + "\"");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : required) known = known || item.key() == key;
        for (const char* key : optional) known = known || item.key() == key;
        if (!known) throw SchemaError(where + ": unexpected key \"" + item.key() + "\"");
    }
}

inline const Json& expect_array(const Json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected an array");
    return j;
}

inline std::size_t expect_count(const Json& j, const std::string& where) {
    if (!j.is_number_unsigned()) throw SchemaError(where + ": expected a nonnegative integer");
    return j.get<std::size_t>();
}

/// 1-based index in [1, limit], returned 0-based.
inline std::size_t expect_index(const Json& j, std::size_t limit, const std::string& where) {
    const std::size_t v = expect_count(j, where);
    if (v < 1 || v > limit)
        throw SchemaError(where + ": index " + std::to_string(v) + " outside 1.." + std::to_string(limit));
    return v - 1;
}

inline std::string at(const std::string& where, std::size_t index) {
    return where + "[" + std::to_string(index) + "]";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scalars and core objects

inline Json to_json(const Rational& x) { return to_string(x); }

/// Rationals travel as strings only; JSON numbers are rejected.
inline Rational rational_from_json(const Json& j, const std::string& where) {
    if (!j.is_string()) throw SchemaError(where + ": rationals must be strings like \"3\" or \"-2/5\"");
    try {
        return parse_rational(j.get<std::string>());
    } catch (const ParseError& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

inline Json to_json(const RationalVector& v) {
    Json out = Json::array();
    for (const auto& x : v) out.push_back(to_json(x));
    return out;
}

inline RationalVector rational_vector_from_json(const Json& j, const std::string& where) {
    detail::expect_array(j, where);
    RationalVector out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rational_from_json(j[i], detail::at(where, i)));
    return out;
}

inline Json to_json(const SquareMatrix& m) {
    Json out = Json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(to_json(m(i, j)));
        out.push_back(std::move(row));
    }
    return out;
}

inline SquareMatrix matrix_from_json(const Json& j, std::size_t n, const std::string& where) {
    detail::expect_array(j, where);
    if (j.size() != n) throw SchemaError(where + ": expected " + std::to_string(n) + " rows");
    SquareMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = rational_vector_from_json(j[i], detail::at(where, i));
        if (row.size() != n) throw SchemaError(detail::at(where, i) + ": expected " + std::to_string(n) + " entries");
        for (std::size_t c = 0; c < n; ++c) m(i, c) = row[c];
    }
    return m;
}

inline Json to_json(const Instance& inst) {
    Json parts = Json::array();
    for (std::size_t k = 0; k < inst.partitions(); ++k) {
        Json part;
        part["utilities"] = to_json(inst.utilities(k));
        if (!inst.labels().empty() && !inst.labels()[k].empty()) part["labels"] = inst.labels()[k];
        parts.push_back(std::move(part));
    }
    return Json{{"n", inst.agents()}, {"partitions", std::move(parts)}};
}

inline Instance instance_from_json(const Json& j) {
    detail::expect_keys(j, "instance", {"n", "partitions"});
    const std::size_t n = detail::expect_count(j["n"], "instance.n");
    if (n == 0) throw SchemaError("instance.n: need at least one agent");
    const Json& parts = detail::expect_array(j["partitions"], "instance.partitions");
    if (parts.empty()) throw SchemaError("instance.partitions: need at least one partition");
    std::vector<SquareMatrix> utilities;
    std::vector<std::vector<std::string>> labels;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const std::string where = detail::at("instance.partitions", k);
        detail::expect_keys(parts[k], where, {"utilities"}, {"labels"});
        utilities.push_back(matrix_from_json(parts[k]["utilities"], n, where + ".utilities"));
        std::vector<std::string> names;
        if (parts[k].contains("labels")) {
            const Json& l = detail::expect_array(parts[k]["labels"], where + ".labels");
            if (l.size() != n) throw SchemaError(where + ".labels: expected " + std::to_string(n) + " labels");
            for (const auto& s : l) {
                if (!s.is_string()) throw SchemaError(where + ".labels: labels must be strings");
                names.push_back(s.get<std::string>());
            }
        }
        labels.push_back(std::move(names));
    }
    return Instance(n, std::move(utilities), std::move(labels));
}

inline Json to_json(const Lottery& lot) {
    Json q = Json::array();
    for (const auto& m : lot.q) q.push_back(to_json(m));
    return Json{{"p", to_json(lot.p)}, {"q", std::move(q)}};
}

/// Shape is checked against the file itself; callers compare with the instance.
inline Lottery lottery_from_json(const Json& j) {
    detail::expect_keys(j, "lottery", {"p", "q"});
    Lottery lot;
    lot.p = rational_vector_from_json(j["p"], "lottery.p");
    const Json& q = detail::expect_array(j["q"], "lottery.q");
    if (q.size() != lot.p.size()) throw SchemaError("lottery.q: expected one matrix per entry of p");
    const std::size_t n = q.empty() ? 0 : detail::expect_array(q[0], "lottery.q[0]").size();
    for (std::size_t k = 0; k < q.size(); ++k) lot.q.push_back(matrix_from_json(q[k], n, detail::at("lottery.q", k)));
    return lot;
}

// ---------------------------------------------------------------------------
// Decompositions and draws (permutations and partitions 1-based on the wire)

inline Json permutation_json(const Permutation& perm) {
    Json out = Json::array();
    for (std::size_t j : perm) out.push_back(j + 1);
    return out;
}

inline Json to_json(const BvnDecomposition& dec) {
    Json parts = Json::array();
    for (const auto& part : dec.partitions) {
        Json terms = Json::array();
        for (const auto& term : part.terms)
            terms.push_back(Json{{"perm", permutation_json(term.perm)}, {"alpha", to_json(term.alpha)}});
        parts.push_back(Json{{"partition", part.partition + 1}, {"terms", std::move(terms)}});
    }
    return Json{{"n", dec.n}, {"p", to_json(dec.p)}, {"partitions", std::move(parts)}};
}

inline BvnDecomposition decomposition_from_json(const Json& j) {
    detail::expect_keys(j, "decomposition", {"n", "p", "partitions"});
    BvnDecomposition dec;
    dec.n = detail::expect_count(j["n"], "decomposition.n");
    dec.p = rational_vector_from_json(j["p"], "decomposition.p");
    const Json& parts = detail::expect_array(j["partitions"], "decomposition.partitions");
    for (std::size_t e = 0; e < parts.size(); ++e) {
        const std::string where = detail::at("decomposition.partitions", e);
        detail::expect_keys(parts[e], where, {"partition", "terms"});
        BvnPartition part;
        part.partition = detail::expect_index(parts[e]["partition"], dec.p.size(), where + ".partition");
        const Json& terms = detail::expect_array(parts[e]["terms"], where + ".terms");
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const std::string tw = detail::at(where + ".terms", t);
            detail::expect_keys(terms[t], tw, {"perm", "alpha"});
            BvnTerm term;
            const Json& perm = detail::expect_array(terms[t]["perm"], tw + ".perm");
            for (std::size_t i = 0; i < perm.size(); ++i)
                term.perm.push_back(detail::expect_index(perm[i], dec.n, detail::at(tw + ".perm", i)));
            term.alpha = rational_from_json(terms[t]["alpha"], tw + ".alpha");
            part.terms.push_back(std::move(term));
        }
        dec.partitions.push_back(std::move(part));
    }
    try {
        validate_decomposition(dec);
    } catch (const StructuralError& e) {
        throw SchemaError(std::string("decomposition: ") + e.what());
    }
    return dec;
}

inline Json to_json(const Draw& d) {
    return Json{{"partition", d.partition + 1}, {"perm", permutation_json(d.perm)}};
}

// ---------------------------------------------------------------------------
// X3C files (elements 1-based on the wire)

inline Json to_json(const X3cInstance& phi) {
    Json triples = Json::array();
    for (const auto& s : phi.triples) triples.push_back(Json::array({s[0] + 1, s[1] + 1, s[2] + 1}));
    return Json{{"r", phi.r}, {"triples", std::move(triples)}};
}

inline X3cInstance x3c_from_json(const Json& j) {
    detail::expect_keys(j, "x3c", {"r", "triples"});
    X3cInstance phi;
    phi.r = detail::expect_count(j["r"], "x3c.r");
    const Json& triples = detail::expect_array(j["triples"], "x3c.triples");
    for (std::size_t t = 0; t < triples.size(); ++t) {
        const std::string where = detail::at("x3c.triples", t);
        const Json& s = detail::expect_array(triples[t], where);
        if (s.size() != 3) throw SchemaError(where + ": a triple has exactly 3 elements");
        Triple triple;
        for (std::size_t e = 0; e < 3; ++e) triple[e] = detail::expect_index(s[e], phi.r, detail::at(where, e));
        phi.triples.push_back(triple);
    }
    return phi;
}

/// Parameters and 1-based name maps of a reduction. Partition keys are "j,c".
inline Json sidecar_json(const ReductionOutput& out) {
    Json agents = Json::object();
    const auto names = out.layout.agent_names();
    for (std::size_t a = 0; a < names.size(); ++a) agents[names[a]] = a + 1;
    Json parts = Json::object();
    for (std::size_t j = 0; j < out.layout.t; ++j)
        for (std::size_t c = 0; c < 3; ++c)
            parts[std::to_string(j + 1) + "," + std::to_string(c + 1)] = out.layout.partition(j, c) + 1;
    return Json{{"epsilon", to_json(out.epsilon)}, {"R", to_json(out.R)}, {"Q", to_json(out.Q)},
                {"K", to_json(out.K)}, {"agent_index", std::move(agents)}, {"partition_index", std::move(parts)}};
}

// ---------------------------------------------------------------------------
// Reports (agents 1-based)

inline Json to_json(const RhoEpsilon& re) {
    return Json{{"rho", to_json(re.rho)}, {"epsilon", to_json(re.epsilon)}, {"J_size", re.j_size}};
}

inline Json to_json(const EnvyFreeReport& ef) {
    Json pairs = Json::array();
    for (const auto& p : ef.pairs)
        pairs.push_back(Json{{"agent", p.envious + 1}, {"envies", p.envied + 1}, {"own", to_json(p.own)},
                             {"other", to_json(p.other)}});
    return pairs;
}

inline Json to_json(const ParetoCertificate& c) {
    Json out{{"dominated", c.dominated}};
    if (c.approximate) {
        out["objective"] = c.approx_objective;
        out["mode"] = "approx";
        if (c.dominated) out["excess"] = c.approx_excess;
    } else {
        out["objective"] = to_json(c.objective);
        out["mode"] = "exact";
        if (c.dominated) {
            out["excess"] = to_json(c.excess);
            out["dominating_lottery"] = to_json(*c.dominating_lottery);
        }
    }
    return out;
}

inline Json to_json(const VerificationReport& r) {
    return Json{{"ef", r.ef.envy_free}, {"envy_pairs", to_json(r.ef)}, {"pareto", to_json(r.pareto)},
                {"social_welfare", to_json(r.social_welfare)}};
}

inline Json to_json(const SolveReport& r, const Instance& inst) {
    Json out{{"method", to_string(r.method)}, {"converged", true}, {"lottery", to_json(r.lottery)},
             {"utilities", to_json(own_utilities(inst, r.lottery))},
             {"social_welfare", to_json(social_welfare(inst, r.lottery))}, {"weights", to_json(r.weights)}};
    if (r.method == SolveMethod::Hull) {
        out["face_offset"] = to_json(*r.face_offset);
        out["faces_examined"] = r.faces_examined;
    } else {
        out["iterations"] = r.iterations;
        out["from_fallback"] = r.from_fallback;
    }
    return out;
}

inline Json to_json(const FixpointOutcome& o, const Instance& inst) {
    if (o.report) return to_json(*o.report, inst);
    return Json{{"method", "fixpoint"}, {"converged", false}, {"iterations", o.trace.size()},
                {"cycled", o.cycled}, {"fallback_tried", o.fallback_tried},
                {"fallback_skipped", o.fallback_skipped}};
}

inline Json to_json(const WelfareResult& w) {
    return Json{{"lottery", to_json(w.lottery)}, {"social_welfare", to_json(w.welfare)},
                {"face_normal", to_json(w.normal)}, {"face_offset", to_json(w.offset)}};
}

// ---------------------------------------------------------------------------
// Files

inline Json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source + ": malformed JSON: " + e.what());
    }
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path);
}

/// Compact JSON plus a trailing newline.
inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot write " + path);
    out << j.dump() << '\n';
    if (!out) throw FileError("error writing " + path);
}

}  // namespace efpo
