// fedq: command-line front end for the star product, quantized derivations,
// the tau cocycle, the deformed cross product and the identity suite.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedq/fedq.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerify = 1;
constexpr int kExitInput = 2;

struct Common {
    std::string problem;
    int order = -1;
    long long seed = -1;
    std::string format = "text";
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--problem", c.problem, "problem file (default: flat R^2, order 6)");
    cmd->add_option("--order", c.order, "truncation order N, overrides the file")->check(CLI::Range(0, 64));
    cmd->add_option("--seed", c.seed, "random seed, overrides the file")->check(CLI::NonNegativeNumber);
    cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"text", "json"}));
}

/// Thrown for input errors that carry a source label, e.g. "argument f".
struct LabelledError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

fedq::ProblemFile load(const Common& c) {
    std::string text;
    if (!c.problem.empty()) {
        std::ifstream in(c.problem);
        if (!in) throw LabelledError("cannot open problem file '" + c.problem + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    std::optional<int> order;
    std::optional<std::uint64_t> seed;
    if (c.order >= 0) order = c.order;
    if (c.seed >= 0) seed = static_cast<std::uint64_t>(c.seed);
    try {
        return fedq::parse_problem(text, order, seed);
    } catch (const fedq::ParseError& e) {
        throw LabelledError((c.problem.empty() ? std::string("<default>") : c.problem) + ":" + e.what());
    }
}

template <class F>
auto parse_arg(const std::string& label, F&& f) {
    try {
        return f();
    } catch (const fedq::ParseError& e) {
        throw LabelledError("argument " + label + ": " + e.what());
    }
}

void emit(const Common& c, const std::string& command, const std::string& result) {
    if (c.format == "json") {
        nlohmann::json j{{"command", command}, {"result", result}};
        std::cout << j.dump() << "\n";
    } else {
        std::cout << result << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fedosov star products, quantized symplectic fields and deformed cross products"};
    app.require_subcommand(1);

    Common c;
    std::string f_text, g_text, field_a, field_b, suite = "all";
    int samples = 4;

    auto* star_cmd = app.add_subcommand("star", "print f * g");
    add_common(star_cmd, c);
    star_cmd->add_option("f", f_text, "series in x1.., h")->required();
    star_cmd->add_option("g", g_text, "series in x1.., h")->required();

    auto* quant_cmd = app.add_subcommand("quantize", "print X~ f for a named field");
    add_common(quant_cmd, c);
    quant_cmd->add_option("field", field_a, "field name from the problem file")->required();
    quant_cmd->add_option("f", f_text, "series in x1.., h")->required();

    auto* tau_cmd = app.add_subcommand("tau", "print tau(X, Y) for two named fields");
    add_common(tau_cmd, c);
    tau_cmd->add_option("X", field_a, "field name")->required();
    tau_cmd->add_option("Y", field_b, "field name")->required();

    auto* cross_cmd = app.add_subcommand("cross-mul", "print u * v in the deformed cross product");
    add_common(cross_cmd, c);
    cross_cmd->add_option("u", f_text, "element such as 'x1*e1 + h*e1*e2'")->required();
    cross_cmd->add_option("v", g_text, "element")->required();

    auto* verify_cmd = app.add_subcommand("verify", "run the seeded identity suite");
    add_common(verify_cmd, c);
    verify_cmd->add_option("--suite", suite, "suite selector")->check(CLI::IsMember(fedq::verify_suites()));
    verify_cmd->add_option("--samples", samples, "random samples per identity")->check(CLI::Range(1, 1000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        fedq::ProblemFile pf = load(c);
        if (verify_cmd->parsed()) {
            fedq::VerifyOptions opts;
            opts.suite = suite;
            opts.samples = samples;
            fedq::VerifyReport rep = fedq::verify(pf, opts);
            if (c.format == "json") {
                nlohmann::json checks = nlohmann::json::array();
                for (const auto& ch : rep.checks)
                    checks.push_back({{"id", ch.id}, {"pass", ch.pass}, {"detail", ch.detail}});
                nlohmann::json j{{"seed", rep.seed}, {"order", rep.order}, {"suite", rep.suite},
                                 {"ok", rep.ok()},   {"passed", rep.passed()}, {"checks", checks}};
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << rep.text();
            }
            return rep.ok() ? kExitOk : kExitVerify;
        }

        fedq::SolutionPtr sol = fedq::solve_r(pf.connection, pf.order);
        const fedq::ChartPtr& fc = sol->function_ctx();
        if (star_cmd->parsed()) {
            auto f = parse_arg("f", [&] { return fedq::parse_star_function(f_text, fc); });
            auto g = parse_arg("g", [&] { return fedq::parse_star_function(g_text, fc); });
            emit(c, "star", fedq::star(f, g, *sol).str());
        } else if (quant_cmd->parsed()) {
            const auto& X = pf.field(field_a);
            auto f = parse_arg("f", [&] { return fedq::parse_star_function(f_text, fc); });
            emit(c, "quantize", fedq::quantized_apply(X, f, sol).str());
        } else if (tau_cmd->parsed()) {
            const auto& X = pf.field(field_a);
            const auto& Y = pf.field(field_b);
            emit(c, "tau", fedq::tau(X, Y, sol).symbol.str());
        } else if (cross_cmd->parsed()) {
            if (!pf.action) throw fedq::InvalidInput("problem file declares no Lie algebra action");
            fedq::CrossProduct cp(*pf.action, sol);
            const auto& names = cp.algebra().names();
            auto u = parse_arg("u", [&] { return fedq::parse_cross(f_text, fc, names, &cp); });
            auto v = parse_arg("v", [&] { return fedq::parse_cross(g_text, fc, names, &cp); });
            emit(c, "cross-mul", fedq::cross_mul(u, v, cp).str(names));
        }
        return kExitOk;
    } catch (const LabelledError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const fedq::IdentityFailure& e) {
        std::cerr << "identity failure: " << e.what() << "\n";
        return kExitVerify;
    } catch (const fedq::NonConvergence& e) {
        std::cerr << "no convergence: " << e.what() << "\n";
        return kExitVerify;
    } catch (const fedq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}
