// rdmc: command-line front end over the C interface in rdmc.h.
//
// Exit codes: 0 success or all report items pass, 1 some item fails,
// 2 configuration or input error, 3 internal error.

#include "rdmc.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

struct Globals {
    bool json = false;
    unsigned threads = 0;
    std::uint64_t seed = 1;
};

// Owns a malloc'd string returned by the library.
class Owned {
public:
    Owned() = default;
    Owned(const Owned&) = delete;
    Owned& operator=(const Owned&) = delete;
    ~Owned() { rdmc_string_free(p_); }
    char** out() { return &p_; }
    std::string str() const { return p_ ? p_ : ""; }

private:
    char* p_ = nullptr;
};

class TableHandle {
public:
    TableHandle() = default;
    TableHandle(const TableHandle&) = delete;
    TableHandle& operator=(const TableHandle&) = delete;
    ~TableHandle() { rdmc_table_free(t_); }
    rdmc_table** out() { return &t_; }
    rdmc_table* get() const { return t_; }

private:
    rdmc_table* t_ = nullptr;
};

struct Failure {
    rdmc_status status;
};

void check(rdmc_status s)
{
    if (s != RDMC_OK) throw Failure{s};
}

const char* c_str(const std::optional<std::string>& s) { return s ? s->c_str() : nullptr; }

nlohmann::ordered_json parse(const Owned& o) { return nlohmann::ordered_json::parse(o.str()); }

std::string decimal(const nlohmann::ordered_json& v)
{
    if (v.is_null()) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v.get<double>());
    return buf;
}

// Prints a verification report and maps its verdict to an exit code.
int emit_report(const Globals& g, const Owned& report)
{
    auto j = parse(report);
    if (g.json) {
        std::cout << report.str() << '\n';
    } else {
        Owned text;
        check(rdmc_report_text(report.str().c_str(), text.out()));
        std::cout << text.str();
    }
    return j["summary"]["all_pass"].get<bool>() ? 0 : kExitFail;
}

void load_table(const std::string& path, TableHandle& t)
{
    if (path.empty()) {
        std::cerr << "error: no table given (use --table or set RDMC_TABLE)\n";
        throw Failure{RDMC_E_INVALID_ARGUMENT};
    }
    check(rdmc_table_load(path.c_str(), t.out()));
}

void progress_to_stderr(const char* msg, void*) { std::cerr << msg << '\n'; }

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Certified lower bounds on Rademacher-sum tails"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(rdmc_version()));

    Globals g;
    g.threads = std::max(1u, std::thread::hardware_concurrency());
    app.add_flag("--json", g.json, "Print JSON instead of text")->trigger_on_parse(false);
    app.add_option("--threads", g.threads, "Worker threads (default: available cores)")
        ->check(CLI::Range(1u, 1024u));
    app.add_option("--seed", g.seed, "Seed for every randomized step");
    app.fallthrough();

    std::function<int()> action;

    // ---------------------------------------------------------------- oracle
    auto* oracle = app.add_subcommand("oracle", "Exact enumeration oracle")->require_subcommand(1);
    oracle->fallthrough();

    std::optional<std::string> o_weights, o_file, o_t2;
    std::string o_t, o_mode = "ge";
    int o_cap = 0;
    auto* otail = oracle->add_subcommand("tail", "Exact Pr[X >= t], Pr[X > t] and friends");
    auto* ow = otail->add_option("--weights", o_weights, "Comma-separated weights (rescaled to unit variance)");
    auto* of = otail->add_option("--weights-file", o_file, "File with one weight per line")->check(CLI::ExistingFile);
    ow->excludes(of);
    otail->add_option("--t", o_t, "Threshold")->required();
    otail->add_option("--t2", o_t2, "Upper threshold for abs-in-open");
    otail->add_option("--mode", o_mode, "ge | gt | abs-ge | abs-in-open")
        ->check(CLI::IsMember({"ge", "gt", "abs-ge", "abs_ge", "abs-in-open", "abs_in_open"}));
    otail->add_option("--cap", o_cap, "Enumeration cap (default 24, at most 40)");
    otail->callback([&] {
        action = [&]() -> int {
            if (!o_weights && !o_file) throw CLI::RequiredError("--weights or --weights-file");
            Owned out;
            check(rdmc_oracle_tail(c_str(o_weights), c_str(o_file), o_t.c_str(), c_str(o_t2), o_mode.c_str(), o_cap,
                                   out.out()));
            if (g.json) {
                std::cout << out.str() << '\n';
            } else {
                auto j = parse(out);
                std::cout << j["probability"].get<std::string>() << " = " << decimal(j["value"]) << '\n';
            }
            return 0;
        };
    });

    std::string n_file, n_dir = "ge";
    auto* onorm = oracle->add_subcommand("norm-tail", "Exact Pr[|X| >= 1] or Pr[|X| <= 1] for vector weights");
    onorm->add_option("--vectors-file", n_file, "One vector per line, whitespace-separated coordinates")
        ->required()
        ->check(CLI::ExistingFile);
    onorm->add_option("--direction", n_dir, "ge | le")->check(CLI::IsMember({"ge", "le"}));
    onorm->add_option("--cap", o_cap, "Enumeration cap");
    onorm->callback([&] {
        action = [&]() -> int {
            Owned out;
            check(rdmc_oracle_norm(n_file.c_str(), n_dir.c_str(), o_cap, out.out()));
            if (g.json) {
                std::cout << out.str() << '\n';
            } else {
                auto j = parse(out);
                std::cout << j["probability"].get<std::string>() << " = " << decimal(j["value"]) << "  (floor "
                          << decimal(j["floor"]) << ")\n";
            }
            return 0;
        };
    });

    // ---------------------------------------------------------------- prawitz
    auto* prawitz = app.add_subcommand("prawitz", "Prawitz smoothing bound")->require_subcommand(1);
    prawitz->fallthrough();
    double p_a = 0, p_x = 0, p_T = 0, p_q = 0;
    std::string p_mode = "trapezoid";
    std::uint32_t p_panels = 0;
    auto* peval = prawitz->add_subcommand("eval", "Certified lower value of F(a, x, T, q)");
    peval->add_option("--a", p_a, "Largest weight bound")->required()->check(CLI::Range(0.0, 1.0));
    peval->add_option("--x", p_x, "Threshold")->required();
    peval->add_option("--T", p_T, "Cutoff (default pi/a)");
    peval->add_option("--q", p_q, "Split point (default 1/2)");
    peval->add_option("--mode", p_mode, "trapezoid | adaptive")->check(CLI::IsMember({"trapezoid", "adaptive"}));
    peval->add_option("--panels", p_panels, "Uniform panels per piece (0 refines adaptively)");
    peval->callback([&] {
        action = [&]() -> int {
            Owned out;
            double v = 0;
            check(rdmc_prawitz_eval(p_a, p_x, p_T, p_q, p_mode.c_str(), p_panels, &v, out.out()));
            if (g.json) {
                std::cout << out.str() << '\n';
            } else {
                auto j = parse(out);
                std::cout << "F = " << decimal(j["value"]) << "  budget " << decimal(j["error_budget"]) << "  ["
                          << j["mode"].get<std::string>() << ", " << j["panels"].get<std::size_t>() << " panels]\n";
            }
            return 0;
        };
    });
    auto* ptheta = prawitz->add_subcommand("theta", "Bracket for the root of exp(-t^2/2) + cos t");
    ptheta->callback([&] {
        action = [&]() -> int {
            double lo = 0, hi = 0;
            check(rdmc_theta(&lo, &hi));
            if (g.json) {
                nlohmann::ordered_json j;
                j["lo"] = lo;
                j["hi"] = hi;
                std::cout << j.dump() << '\n';
            } else {
                std::printf("theta in [%.12f, %.12f]\n", lo, hi);
            }
            return 0;
        };
    });

    // ---------------------------------------------------------------- table
    auto* table = app.add_subcommand("table", "Build, query and check the bound table D(a, x)")->require_subcommand(1);
    table->fallthrough();
    std::string t_path;
    std::string b_delta = "1/400", b_out, b_integrator = "trapezoid", b_candidates = "grid";
    std::optional<std::string> b_cache;
    std::uint32_t b_iters = 10;
    auto* tbuild = table->add_subcommand("build", "Build the table and write it to a file");
    tbuild->add_option("--delta", b_delta, "Grid step 1/N");
    tbuild->add_option("--iters", b_iters, "Recursion iterations")->check(CLI::Range(0u, 100u));
    tbuild->add_option("--out", b_out, "Output file")->required();
    tbuild->add_option("--d0-cache", b_cache, "Cache for the base layer");
    tbuild->add_option("--integrator", b_integrator, "trapezoid | adaptive")
        ->check(CLI::IsMember({"trapezoid", "adaptive"}));
    tbuild->add_option("--candidates", b_candidates, "grid | cell")->check(CLI::IsMember({"grid", "cell"}));
    tbuild->callback([&] {
        action = [&]() -> int {
            TableHandle t;
            Owned report;
            check(rdmc_table_build(b_delta.c_str(), b_iters, b_integrator.c_str(), b_candidates.c_str(),
                                   c_str(b_cache), g.threads, progress_to_stderr, nullptr, t.out(), report.out()));
            check(rdmc_table_save(t.get(), b_out.c_str()));
            if (g.json) {
                std::cout << report.str() << '\n';
            } else {
                auto j = parse(report);
                std::cout << "wrote " << b_out << "  (delta " << j["delta"].get<std::string>() << ", "
                          << j["iterations"].get<unsigned>() << " iterations)\n"
                          << "D0 " << decimal(j["d0_seconds"]) << " s"
                          << (j["d0_from_cache"].get<bool>() ? " (cached)" : "") << ", recursion "
                          << decimal(j["recursion_seconds"]) << " s";
                if (!j["d0_from_cache"].get<bool>()) std::cout << ", max budget " << decimal(j["max_error_budget"]);
                std::cout << '\n';
                for (const auto& it : j["per_iteration"])
                    std::cout << "  iteration " << it["iteration"].get<unsigned>() << ": max increase "
                              << decimal(it["max_increase"]) << ", cells improved "
                              << it["cells_improved"].get<std::size_t>()
                              << (it["dominates_previous"].get<bool>() ? "" : "  NOT MONOTONE") << '\n';
            }
            return 0;
        };
    });

    double q_a = 0, q_x = 0;
    auto* tquery = table->add_subcommand("query", "Rounded-up lookup D(a, x)");
    tquery->add_option("--table", t_path, "Table file")->envname("RDMC_TABLE");
    tquery->add_option("--a", q_a, "Largest weight bound in (0, 1]")->required();
    tquery->add_option("--x", q_x, "Threshold")->required();
    tquery->callback([&] {
        action = [&]() -> int {
            TableHandle t;
            load_table(t_path, t);
            double v = 0;
            check(rdmc_table_query(t.get(), q_a, q_x, &v));
            if (g.json) {
                nlohmann::ordered_json j;
                j["a"] = q_a;
                j["x"] = q_x;
                j["value"] = v;
                std::cout << j.dump() << '\n';
            } else {
                std::printf("%.12g\n", v);
            }
            return 0;
        };
    });

    auto* tinfo = table->add_subcommand("info", "Print the table header");
    tinfo->add_option("--table", t_path, "Table file")->envname("RDMC_TABLE");
    tinfo->callback([&] {
        action = [&]() -> int {
            TableHandle t;
            load_table(t_path, t);
            Owned out;
            check(rdmc_table_info(t.get(), out.out()));
            if (g.json) {
                std::cout << out.str() << '\n';
            } else {
                const auto info = parse(out);
                for (const auto& [k, v] : info.items()) std::cout << k << ": " << v << '\n';
            }
            return 0;
        };
    });

    auto* tstash = table->add_subcommand("verify-stash", "Check the quoted table values");
    tstash->add_option("--table", t_path, "Table file")->envname("RDMC_TABLE");
    tstash->callback([&] {
        action = [&]() -> int {
            TableHandle t;
            load_table(t_path, t);
            Owned report;
            int pass = 0;
            check(rdmc_verify(t.get(), "stash", 0.0, g.threads, g.seed, report.out(), &pass));
            return emit_report(g, report);
        };
    });

    // ---------------------------------------------------------------- chain
    auto* chain = app.add_subcommand("chain", "Antichain bounds for clustered signed sums")->require_subcommand(1);
    chain->fallthrough();
    long long c_k = 1, c_t = 0;
    auto* cf = chain->add_subcommand("f", "Sum of the k largest binomial coefficients C(t, i)");
    cf->add_option("--k", c_k, "k")->required()->check(CLI::PositiveNumber);
    cf->add_option("--t", c_t, "t")->required()->check(CLI::NonNegativeNumber);
    cf->callback([&] {
        action = [&]() -> int {
            Owned out;
            check(rdmc_chain_f(c_k, c_t, out.out()));
            if (g.json) {
                nlohmann::ordered_json j;
                j["k"] = c_k;
                j["t"] = c_t;
                j["f"] = out.str();
                std::cout << j.dump() << '\n';
            } else {
                std::cout << out.str() << '\n';
            }
            return 0;
        };
    });

    std::string c_weights, c_alpha, c_delta;
    std::optional<std::string> c_tail;
    auto* ccheck = chain->add_subcommand("check", "Window mass against f(k, t) / 2^t");
    ccheck->add_option("--weights", c_weights, "Large weights b_1..b_t")->required();
    ccheck->add_option("--k", c_k, "k")->required()->check(CLI::PositiveNumber);
    ccheck->add_option("--alpha", c_alpha, "Window half-width")->required();
    ccheck->add_option("--tail", c_tail, "Extra weights");
    ccheck->callback([&] {
        action = [&]() -> int {
            Owned report;
            check(rdmc_chain_check(c_weights.c_str(), c_k, c_alpha.c_str(), c_str(c_tail), report.out()));
            return emit_report(g, report);
        };
    });

    auto* csep = chain->add_subcommand("separation", "Two- and three-weight separation checks");
    csep->add_option("--weights", c_weights, "Two or three weights")->required();
    csep->add_option("--delta", c_delta, "Separation")->required();
    csep->add_option("--tail", c_tail, "Extra weights");
    csep->callback([&] {
        action = [&]() -> int {
            Owned report;
            check(rdmc_chain_separation(c_weights.c_str(), c_delta.c_str(), c_str(c_tail), report.out()));
            return emit_report(g, report);
        };
    });

    // ---------------------------------------------------------------- walk
    auto* walk = app.add_subcommand("walk", "The stopped sign walk")->require_subcommand(1);
    walk->fallthrough();
    std::string w_set, w_x, w_policy = "best";
    std::optional<std::string> w_eta;
    std::uint64_t w_trials = 0;
    const auto policies = CLI::IsMember({"best", "fixed", "heuristic"});

    auto* wprob = walk->add_subcommand("prob", "Exact success probability");
    wprob->add_option("--set", w_set, "Step sizes")->required();
    wprob->add_option("--x", w_x, "Target")->required();
    wprob->add_option("--policy", w_policy, "best | fixed | heuristic")->check(policies);
    wprob->callback([&] {
        action = [&]() -> int {
            Owned out;
            check(rdmc_walk_prob(w_set.c_str(), w_x.c_str(), w_policy.c_str(), out.out()));
            if (g.json) {
                std::cout << out.str() << '\n';
            } else {
                auto j = parse(out);
                std::cout << j["probability"].get<std::string>() << " = " << decimal(j["value"]) << "  (c = "
                          << j["c"].get<std::string>() << ", " << j["policy"].get<std::string>() << ")\n";
            }
            return 0;
        };
    });

    auto* wlemma = walk->add_subcommand("lemma", "Compare p(S; x) with the hitting bounds");
    wlemma->add_option("--set", w_set, "Step sizes")->required();
    wlemma->add_option("--x", w_x, "Target")->required();
    wlemma->add_option("--eta", w_eta, "Split ratio for the refined bound");
    wlemma->add_option("--trials", w_trials, "Monte Carlo trials beyond 30 steps (default 1e6)");
    wlemma->callback([&] {
        action = [&]() -> int {
            Owned report;
            check(rdmc_walk_lemma(w_set.c_str(), w_x.c_str(), c_str(w_eta), w_trials, g.seed, g.threads,
                                  report.out()));
            return emit_report(g, report);
        };
    });

    std::string w_sim_policy = "heuristic";
    auto* wsim = walk->add_subcommand("sim", "Monte Carlo estimate with a 99% Wilson interval");
    wsim->add_option("--set", w_set, "Step sizes")->required();
    wsim->add_option("--x", w_x, "Target")->required();
    wsim->add_option("--trials", w_trials, "Trials")->required()->check(CLI::PositiveNumber);
    wsim->add_option("--policy", w_sim_policy, "best | fixed | heuristic")->check(policies);
    wsim->callback([&] {
        action = [&]() -> int {
            Owned out;
            check(rdmc_walk_sim(w_set.c_str(), w_x.c_str(), w_sim_policy.c_str(), w_trials, g.seed, g.threads,
                                out.out()));
            if (g.json) {
                std::cout << out.str() << '\n';
            } else {
                auto j = parse(out);
                std::cout << j["successes"].get<std::uint64_t>() << "/" << j["trials"].get<std::uint64_t>() << " = "
                          << decimal(j["p_hat"]) << "  99% CI [" << decimal(j["lcb"]) << ", " << decimal(j["ucb"])
                          << "]\n";
            }
            return 0;
        };
    });

    // ---------------------------------------------------------------- verify
    auto* verify = app.add_subcommand("verify", "Run a verification campaign");
    verify->fallthrough();
    std::string v_campaign;
    double v_delta = 0;
    verify->add_option("campaign", v_campaign, "a1 | a2 | a3 | qsums | stash | fixtures")
        ->required()
        ->check(CLI::IsMember({"a1", "a2", "a3", "qsums", "stash", "fixtures"}));
    verify->add_option("--table", t_path, "Table file")->envname("RDMC_TABLE");
    verify->add_option("--delta", v_delta, "Mesh Lipschitz slack (default per campaign)")
        ->check(CLI::PositiveNumber);
    verify->callback([&] {
        action = [&]() -> int {
            TableHandle t;
            if (v_campaign != "fixtures") load_table(t_path, t);
            Owned report;
            int pass = 0;
            check(rdmc_verify(t.get(), v_campaign.c_str(), v_delta, g.threads, g.seed, report.out(), &pass));
            return emit_report(g, report);
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << "\n" << app.help();
        return kExitConfig;
    }

    try {
        return action();
    } catch (const Failure& f) {
        const char* msg = rdmc_last_error();
        if (*msg) std::cerr << "error: " << msg << " (" << rdmc_status_name(f.status) << ")\n";
        return f.status == RDMC_E_INTERNAL ? kExitInternal : kExitConfig;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    }
}
