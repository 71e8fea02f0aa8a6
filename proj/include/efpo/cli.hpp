#pragma once

#include "efpo/io.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace efpo::cli {

/// Exit codes shared by all verbs.
enum Exit : int { Ok = 0, Negative = 1, Failure = 2, NotConverged = 3 };

namespace detail {

inline Instance load_instance(const std::string& path) {
    try {
        return instance_from_json(read_json_file(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

inline Lottery load_lottery(const std::string& path, const Instance& inst) {
    Lottery lot;
    try {
        lot = lottery_from_json(read_json_file(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    }
    check_shape(inst, lot);
    if (auto v = validate_lottery(inst, lot); !v.ok()) {
        std::ostringstream os;
        os << path << ": invalid lottery";
        for (const auto& violation : v.violations) os << "\n  " << violation.message;
        throw StructuralError(os.str());
    }
    return lot;
}

inline X3cInstance load_x3c(const std::string& path) {
    try {
        return x3c_from_json(read_json_file(path));
    } catch (const SchemaError& e) {
        throw SchemaError(path + ": " + e.what());
    }
}

/// "1,4,7" -> {0, 3, 6}.
inline std::vector<std::size_t> parse_cover(const std::string& text) {
    std::vector<std::size_t> cover;
    if (text.empty()) return cover;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!efpo::detail::all_digits(item) || item.size() > 9)
            throw ParseError("--cover expects comma-separated triple numbers, got \"" + text + "\"");
        const std::size_t j = std::stoul(item);
        if (j == 0) throw ParseError("--cover: triple numbers start at 1");
        cover.push_back(j - 1);
    }
    return cover;
}

inline void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

}  // namespace detail

/// Parses arguments, runs one verb and returns its exit code. Reports go to
/// `out`, diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact envy-free and Pareto-optimal allocation lotteries", "efpo"};
    app.require_subcommand(1);

    std::string inst_path, lot_path, phi_path, dec_path, output_path, sidecar_path, dump_path;

    auto* solve_cmd = app.add_subcommand("solve", "Compute an envy-free, Pareto-optimal lottery");
    std::string method = "hull";
    std::size_t max_iters = 100;
    std::size_t agent_cap = default_agent_cap;
    solve_cmd->add_option("instance", inst_path, "Instance file")->required();
    solve_cmd->add_option("--method", method, "hull or fixpoint")->check(CLI::IsMember({"hull", "fixpoint"}));
    auto* iters_opt = solve_cmd->add_option("--max-iters", max_iters, "Fixpoint iteration limit")
                          ->check(CLI::PositiveNumber);
    solve_cmd->add_option("--agent-cap", agent_cap, "Largest n the hull method enumerates");
    solve_cmd->add_option("-o,--output", output_path, "Write the lottery here");

    auto* verify_cmd = app.add_subcommand("verify", "Check envy-freeness and Pareto optimality");
    std::string mode = "auto";
    verify_cmd->add_option("instance", inst_path, "Instance file")->required();
    verify_cmd->add_option("lottery", lot_path, "Lottery file")->required();
    verify_cmd->add_option("--mode", mode, "auto, exact or approx")
        ->check(CLI::IsMember({"auto", "exact", "approx"}));
    verify_cmd->add_option("--dump-lp", dump_path, "Write the exact dominance LP as text");

    auto* welfare_cmd = app.add_subcommand("welfare", "Maximum welfare over envy-free Pareto-optimal lotteries");
    std::string threshold_text;
    welfare_cmd->add_option("instance", inst_path, "Instance file")->required();
    auto* threshold_opt = welfare_cmd->add_option("--threshold", threshold_text, "Exit 0 iff welfare >= K");
    welfare_cmd->add_option("--agent-cap", agent_cap, "Largest n the hull method enumerates");
    welfare_cmd->add_option("-o,--output", output_path, "Write the lottery here");

    auto* rho_cmd = app.add_subcommand("rho", "Print rho, epsilon and |J|");
    rho_cmd->add_option("instance", inst_path, "Instance file")->required();

    auto* gen_cmd = app.add_subcommand("gen-x3c", "Build the fair division instance of an X3C instance");
    gen_cmd->add_option("phi", phi_path, "X3C file")->required();
    gen_cmd->add_option("-o,--output", output_path, "Write the instance here");
    gen_cmd->add_option("--sidecar", sidecar_path, "Write parameters and index maps here");

    auto* witness_cmd = app.add_subcommand("witness", "Lottery built from an exact cover");
    std::string cover_text;
    witness_cmd->add_option("phi", phi_path, "X3C file")->required();
    witness_cmd->add_option("--cover", cover_text, "Comma-separated triple numbers")->required();
    witness_cmd->add_option("-o,--output", output_path, "Write the lottery here");

    auto* decompose_cmd = app.add_subcommand("decompose", "Distribution over deterministic allocations");
    decompose_cmd->add_option("instance", inst_path, "Instance file")->required();
    decompose_cmd->add_option("lottery", lot_path, "Lottery file")->required();
    decompose_cmd->add_option("-o,--output", output_path, "Write the decomposition here");

    auto* sample_cmd = app.add_subcommand("sample", "Draw allocations from a decomposition");
    std::uint64_t seed = 0;
    std::size_t count = 1;
    sample_cmd->add_option("decomposition", dec_path, "Decomposition file")->required();
    sample_cmd->add_option("--seed", seed, "Generator seed")->required();
    sample_cmd->add_option("--count", count, "Number of draws");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Failure;
    }

    try {
        if (*solve_cmd) {
            if (method == "hull" && iters_opt->count() > 0)
                throw CLI::ValidationError("--max-iters", "applies to --method fixpoint only");
            const Instance inst = detail::load_instance(inst_path);
            Json report;
            std::optional<Lottery> lottery;
            if (method == "hull") {
                SolveReport r = hull_solve(inst, agent_cap);
                report = to_json(r, inst);
                lottery = r.lottery;
            } else {
                FixpointOptions opts;
                opts.max_iters = max_iters;
                FixpointOutcome o = fixpoint_solve(inst, opts);
                report = to_json(o, inst);
                if (o.report) lottery = o.report->lottery;
            }
            if (lottery && !output_path.empty()) write_json_file(output_path, to_json(*lottery));
            detail::emit(out, report);
            if (!lottery) {
                err << "fixpoint iteration did not converge\n";
                return NotConverged;
            }
            return Ok;
        }

        if (*verify_cmd) {
            const Instance inst = detail::load_instance(inst_path);
            const Lottery lot = detail::load_lottery(lot_path, inst);
            VerifyOptions opts;
            opts.mode = mode == "exact" ? VerifyMode::Exact : mode == "approx" ? VerifyMode::Approx : VerifyMode::Auto;
            if (!dump_path.empty()) {
                std::ofstream dump(dump_path);
                if (!dump) throw FileError("cannot write " + dump_path);
                dump << pareto_lp(inst, lot).to_text();
            }
            const VerificationReport rep = verify_all(inst, lot, opts);
            detail::emit(out, to_json(rep));
            if (rep.pareto.approximate) err << "note: Pareto verdict is approximate (tolerance 1e-9)\n";
            return rep.ef_and_po() ? Ok : Negative;
        }

        if (*welfare_cmd) {
            std::optional<Rational> threshold;
            if (threshold_opt->count() > 0) threshold = parse_rational(threshold_text);
            const Instance inst = detail::load_instance(inst_path);
            const WelfareResult best = max_welfare_ef_po(inst, agent_cap);
            Json report = to_json(best);
            if (threshold) {
                report["threshold"] = to_json(*threshold);
                report["meets_threshold"] = best.welfare >= *threshold;
            }
            if (!output_path.empty()) write_json_file(output_path, to_json(best.lottery));
            detail::emit(out, report);
            return threshold && best.welfare < *threshold ? Negative : Ok;
        }

        if (*rho_cmd) {
            detail::emit(out, to_json(compute_rho(detail::load_instance(inst_path))));
            return Ok;
        }

        if (*gen_cmd) {
            const ReductionOutput red = generate(detail::load_x3c(phi_path));
            for (const auto& w : red.warnings) err << "warning: " << w << '\n';
            if (!sidecar_path.empty()) write_json_file(sidecar_path, sidecar_json(red));
            if (output_path.empty()) {
                detail::emit(out, to_json(red.instance));
            } else {
                write_json_file(output_path, to_json(red.instance));
                detail::emit(out, Json{{"n", red.instance.agents()}, {"m", red.instance.partitions()},
                                       {"epsilon", to_json(red.epsilon)}, {"R", to_json(red.R)},
                                       {"Q", to_json(red.Q)}, {"K", to_json(red.K)}, {"warnings", red.warnings}});
            }
            return Ok;
        }

        if (*witness_cmd) {
            const std::vector<std::size_t> cover = detail::parse_cover(cover_text);
            const ReductionOutput red = generate(detail::load_x3c(phi_path));
            for (const auto& w : red.warnings) err << "warning: " << w << '\n';
            const Lottery lot = witness_lottery(red, cover);
            if (output_path.empty()) {
                detail::emit(out, to_json(lot));
            } else {
                write_json_file(output_path, to_json(lot));
                detail::emit(out, Json{{"social_welfare", to_json(social_welfare(red.instance, lot))},
                                       {"K", to_json(red.K)},
                                       {"ef", verify_ef(red.instance, lot).envy_free}});
            }
            return Ok;
        }

        if (*decompose_cmd) {
            const Instance inst = detail::load_instance(inst_path);
            const BvnDecomposition dec = decompose(inst, detail::load_lottery(lot_path, inst));
            if (output_path.empty()) detail::emit(out, to_json(dec));
            else {
                write_json_file(output_path, to_json(dec));
                std::size_t terms = 0;
                for (const auto& part : dec.partitions) terms += part.terms.size();
                detail::emit(out, Json{{"partitions", dec.partitions.size()}, {"allocations", terms}});
            }
            return Ok;
        }

        if (*sample_cmd) {
            BvnSampler sampler(decomposition_from_json(read_json_file(dec_path)), seed);
            for (std::size_t c = 0; c < count; ++c) out << to_json(sampler.draw()).dump() << '\n';
            return Ok;
        }
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << '\n';
        return Failure;
    } catch (const InternalError& e) {
        err << "internal error: " << e.what() << '\n';
        return Failure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return Failure;
    }
    return Failure;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"efpo"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace efpo::cli
