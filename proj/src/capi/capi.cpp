#include "rdmc.h"

#include "rdmc/chainwalk.hpp"
#include "rdmc/core.hpp"
#include "rdmc/dptable.hpp"
#include "rdmc/error.hpp"
#include "rdmc/prawitz.hpp"
#include "rdmc/report.hpp"
#include "rdmc/verify.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

struct rdmc_table {
    rdmc::dptable::BoundTable table;
};

namespace {

using rdmc::Error;
using rdmc::ErrorCode;
using Json = nlohmann::ordered_json;

thread_local std::string g_last_error;

char* dup(const std::string& s)
{
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

// Runs f, translating exceptions into a status and the thread's error text.
template <class F>
rdmc_status guarded(F&& f) noexcept
{
    try {
        g_last_error.clear();
        f();
        return RDMC_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return static_cast<rdmc_status>(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
    } catch (const std::exception& e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown failure";
    }
    return RDMC_E_INTERNAL;
}

void need(const void* p, const char* name)
{
    rdmc::require(p != nullptr, ErrorCode::InvalidArgument, std::string(name) + " must not be NULL");
}

bool given(const char* s) { return s != nullptr && *s != '\0'; }

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json surd_list(const std::vector<rdmc::Surd>& v)
{
    Json a = Json::array();
    for (const auto& s : v) a.push_back(s.str());
    return a;
}

std::vector<rdmc::Surd> opt_list(const char* s)
{
    return given(s) ? rdmc::parse_surd_list(s) : std::vector<rdmc::Surd>{};
}

rdmc::chainwalk::WalkInstance walk(const char* set, const char* x, const char* policy)
{
    need(set, "set");
    need(x, "x");
    rdmc::chainwalk::WalkInstance w;
    w.S = rdmc::parse_surd_list(set);
    w.x = rdmc::parse_surd(x);
    if (given(policy)) w.policy = rdmc::chainwalk::parse_walk_policy(policy);
    w.validate();
    return w;
}

rdmc::core::OracleConfig oracle_config(int cap)
{
    rdmc::core::OracleConfig cfg;
    if (cap > 0) cfg.enumeration_cap = cap;
    return cfg;
}

}  // namespace

extern "C" {

const char* rdmc_version(void) { return "1.0.0"; }

const char* rdmc_status_name(rdmc_status s)
{
    switch (s) {
        case RDMC_OK: return "ok";
        case RDMC_E_INVALID_ARGUMENT: return "invalid argument";
        case RDMC_E_CAP_EXCEEDED: return "cap exceeded";
        case RDMC_E_EXACT_UNAVAILABLE: return "exact arithmetic unavailable";
        case RDMC_E_NON_FINITE: return "non-finite value";
        case RDMC_E_IO: return "i/o error";
        case RDMC_E_FORMAT: return "format error";
        case RDMC_E_CHECKSUM: return "checksum mismatch";
        case RDMC_E_VERSION: return "version mismatch";
        case RDMC_E_PRECONDITION: return "precondition failed";
        case RDMC_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* rdmc_last_error(void) { return g_last_error.c_str(); }

void rdmc_string_free(char* s) { std::free(s); }

rdmc_status rdmc_oracle_tail(const char* weights, const char* weights_file, const char* t, const char* t2,
                             const char* mode, int cap, char** json)
{
    return guarded([&] {
        need(t, "t");
        need(json, "json");
        std::vector<rdmc::Surd> raw;
        if (weights_file)
            raw = rdmc::core::read_weight_file(weights_file);
        else {
            need(weights, "weights");
            raw = rdmc::parse_surd_list(weights);
        }
        auto w = rdmc::core::normalize_weights(raw);
        auto m = rdmc::core::parse_tail_mode(given(mode) ? mode : "ge");
        rdmc::SurdSum lo{rdmc::parse_surd(t)};
        rdmc::core::TailQuery q{m, lo, {}};
        if (m == rdmc::core::TailMode::ABS_IN_OPEN) {
            rdmc::require(given(t2), ErrorCode::InvalidArgument, "abs_in_open needs an upper threshold");
            q.second_threshold = rdmc::SurdSum{rdmc::parse_surd(t2)};
        }
        auto p = rdmc::core::exact_tail(w, q, oracle_config(cap));

        Json j;
        j["n"] = w.size();
        Json ws = Json::array();
        if (w.exact()) {
            for (const auto& r : w.exact()->raw) ws.push_back(rdmc::Surd(r, w.exact()->radical).str());
        }
        j["weights"] = ws;
        j["mode"] = std::string(rdmc::core::to_string(m));
        j["threshold"] = lo.str();
        if (m == rdmc::core::TailMode::ABS_IN_OPEN) j["upper"] = q.second_threshold.str();
        j["probability"] = p.str();
        j["value"] = p.to_double();
        *json = dup(j.dump());
    });
}

rdmc_status rdmc_oracle_norm(const char* vectors_file, const char* direction, int cap, char** json)
{
    return guarded([&] {
        need(vectors_file, "vectors_file");
        need(json, "json");
        std::string d = given(direction) ? direction : "ge";
        rdmc::require(d == "ge" || d == "le", ErrorCode::InvalidArgument, "direction must be ge or le");
        auto vs = rdmc::core::make_vector_set(rdmc::core::read_vector_file(vectors_file));
        auto dir = d == "ge" ? rdmc::core::NormDirection::NORM_GE_1 : rdmc::core::NormDirection::NORM_LE_1;
        auto p = rdmc::core::high_dim_exact_tail(vs, dir, oracle_config(cap));
        Json j;
        j["n"] = vs.size();
        j["dimension"] = vs.dimension();
        j["direction"] = d;
        j["probability"] = p.str();
        j["value"] = p.to_double();
        j["floor"] = rdmc::core::norm_tail_floor();
        *json = dup(j.dump());
    });
}

rdmc_status rdmc_theta(double* lo, double* hi)
{
    return guarded([&] {
        need(lo, "lo");
        need(hi, "hi");
        auto th = rdmc::prawitz::theta_root();
        *lo = th.lo;
        *hi = th.hi;
    });
}

rdmc_status rdmc_prawitz_eval(double a, double x, double T, double q, const char* mode, uint32_t panels,
                              double* value, char** json)
{
    return guarded([&] {
        auto p = rdmc::prawitz::PrawitzParams::defaults(a, x);
        if (T > 0) p.T = T;
        if (q > 0) p.q = q;
        p.validate();
        auto integ = rdmc::prawitz::parse_integrator(given(mode) ? mode : "trapezoid");
        rdmc::prawitz::Resolution res;
        res.panels = static_cast<int>(panels);
        auto e = rdmc::prawitz::prawitz_F(p, integ, res);
        if (value) *value = e.value;
        if (json) {
            Json j;
            j["a"] = p.a;
            j["x"] = p.x;
            j["T"] = p.T;
            j["q"] = p.q;
            j["mode"] = std::string(rdmc::prawitz::to_string(e.integrator));
            j["value"] = number(e.value);
            j["error_budget"] = number(e.error_budget);
            j["estimate"] = number(e.estimate);
            j["panels"] = e.panels;
            *json = dup(j.dump());
        }
    });
}

rdmc_status rdmc_table_build(const char* delta, uint32_t iterations, const char* integrator, const char* candidates,
                             const char* d0_cache, unsigned threads, rdmc_progress_fn progress, void* user,
                             rdmc_table** out, char** report)
{
    return guarded([&] {
        need(delta, "delta");
        need(out, "out");
        auto g = rdmc::dptable::GridSpec::from_delta(delta, iterations);
        rdmc::dptable::BuildOptions opt;
        opt.integrator = rdmc::prawitz::parse_integrator(given(integrator) ? integrator : "trapezoid");
        std::string c = given(candidates) ? candidates : "grid";
        rdmc::require(c == "grid" || c == "cell", ErrorCode::InvalidArgument, "candidates must be grid or cell");
        opt.candidates = c == "grid" ? rdmc::dptable::CandidateMode::GRID : rdmc::dptable::CandidateMode::CELL_ENVELOPE;
        opt.threads = threads == 0 ? 1 : threads;
        if (given(d0_cache)) opt.d0_cache = d0_cache;
        if (progress) opt.progress = [progress, user](const std::string& m) { progress(m.c_str(), user); };

        rdmc::dptable::BuildReport br;
        auto* t = new rdmc_table{rdmc::dptable::build_table(g, opt, &br)};
        *out = t;
        if (report) {
            Json j;
            j["delta"] = g.delta_str();
            j["iterations"] = g.iterations;
            j["integrator"] = std::string(rdmc::prawitz::to_string(opt.integrator));
            j["candidates"] = c;
            j["threads"] = opt.threads;
            j["d0_seconds"] = br.d0_seconds;
            j["d0_from_cache"] = br.d0_from_cache;
            j["recursion_seconds"] = br.recursion_seconds;
            j["prawitz_evaluations"] = br.prawitz_evaluations;
            j["max_error_budget"] = number(br.max_error_budget);
            j["a_monotonicity_violations"] = br.a_monotonicity_violations;
            Json its = Json::array();
            for (const auto& s : br.iterations) {
                Json e;
                e["iteration"] = s.iteration;
                e["max_increase"] = number(s.max_increase);
                e["cells_improved"] = s.cells_improved;
                e["monotone_repairs"] = s.monotone_repairs;
                e["dominates_previous"] = s.dominates_previous;
                its.push_back(e);
            }
            j["per_iteration"] = its;
            *report = dup(j.dump());
        }
    });
}

rdmc_status rdmc_table_load(const char* path, rdmc_table** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new rdmc_table{rdmc::dptable::load_table(path)};
    });
}

rdmc_status rdmc_table_save(const rdmc_table* t, const char* path)
{
    return guarded([&] {
        need(t, "table");
        need(path, "path");
        rdmc::dptable::save_table(t->table, path);
    });
}

void rdmc_table_free(rdmc_table* t) { delete t; }

rdmc_status rdmc_table_query(const rdmc_table* t, double a, double x, double* value)
{
    return guarded([&] {
        need(t, "table");
        need(value, "value");
        *value = rdmc::dptable::query(t->table, a, x);
    });
}

rdmc_status rdmc_table_info(const rdmc_table* t, char** json)
{
    return guarded([&] {
        need(t, "table");
        need(json, "json");
        const auto& g = t->table.grid();
        Json j;
        j["delta"] = g.delta_str();
        j["steps_per_unit"] = g.steps_per_unit();
        j["iteration"] = t->table.iteration();
        j["integrator"] = std::string(rdmc::prawitz::to_string(t->table.integrator()));
        j["a_count"] = g.a_count();
        j["x_count"] = g.x_count();
        *json = dup(j.dump());
    });
}

rdmc_status rdmc_chain_f(int64_t k, int64_t t, char** decimal)
{
    return guarded([&] {
        need(decimal, "decimal");
        *decimal = dup(rdmc::chainwalk::f_largest_binomials(k, t).str());
    });
}

rdmc_status rdmc_chain_check(const char* weights, int64_t k, const char* alpha, const char* tail, char** report)
{
    return guarded([&] {
        need(weights, "weights");
        need(alpha, "alpha");
        need(report, "report");
        rdmc::chainwalk::ChainCertificate c;
        c.b = rdmc::parse_surd_list(weights);
        c.k = k;
        c.alpha = rdmc::parse_surd(alpha);
        c.tail_weights = opt_list(tail);
        *report = dup(rdmc::to_json(rdmc::chainwalk::check_antichain_bound(c)));
    });
}

rdmc_status rdmc_chain_separation(const char* weights, const char* delta, const char* tail, char** report)
{
    return guarded([&] {
        need(weights, "weights");
        need(delta, "delta");
        need(report, "report");
        auto b = rdmc::parse_surd_list(weights);
        auto d = rdmc::parse_surd(delta);
        auto rest = opt_list(tail);
        rdmc::VerificationReport r;
        if (b.size() == 2)
            r = rdmc::chainwalk::check_obs_k2(b[0], b[1], d, rest);
        else if (b.size() == 3)
            r = rdmc::chainwalk::check_obs_k3(b[0], b[1], b[2], d, rest);
        else
            rdmc::fail(ErrorCode::InvalidArgument, "separation checks take 2 or 3 weights");
        *report = dup(rdmc::to_json(r));
    });
}

rdmc_status rdmc_walk_prob(const char* set, const char* x, const char* policy, char** json)
{
    return guarded([&] {
        need(json, "json");
        auto w = walk(set, x, policy);
        auto p = rdmc::chainwalk::walk_success_probability(w);
        Json j;
        j["policy"] = std::string(rdmc::chainwalk::to_string(w.policy));
        j["n"] = w.S.size();
        j["x"] = w.x.str();
        j["c"] = rdmc::to_string(w.c());
        j["probability"] = rdmc::to_string(p);
        j["value"] = rdmc::to_double(p);
        j["order"] = surd_list(rdmc::chainwalk::walk_order(w));
        *json = dup(j.dump());
    });
}

rdmc_status rdmc_walk_lemma(const char* set, const char* x, const char* eta, uint64_t trials, uint64_t seed,
                            unsigned threads, char** report)
{
    return guarded([&] {
        need(report, "report");
        auto w = walk(set, x, nullptr);
        if (given(eta)) w.eta = rdmc::parse_rational(eta);
        rdmc::chainwalk::LemmaOptions opt;
        if (trials > 0) opt.mc_trials = trials;
        opt.seed = seed;
        opt.threads = threads == 0 ? 1 : threads;
        *report = dup(rdmc::to_json(rdmc::chainwalk::check_hitting_lemma(w, opt)));
    });
}

rdmc_status rdmc_walk_sim(const char* set, const char* x, const char* policy, uint64_t trials, uint64_t seed,
                          unsigned threads, char** json)
{
    return guarded([&] {
        need(json, "json");
        rdmc::require(trials > 0, ErrorCode::InvalidArgument, "trials must be positive");
        auto w = walk(set, x, given(policy) ? policy : "heuristic");
        auto e = rdmc::chainwalk::simulate_walk(w, trials, seed, threads == 0 ? 1 : threads);
        Json j;
        j["policy"] = std::string(rdmc::chainwalk::to_string(w.policy));
        j["trials"] = e.trials;
        j["successes"] = e.successes;
        j["p_hat"] = e.p_hat;
        j["lcb"] = e.lcb;
        j["ucb"] = e.ucb;
        j["seed"] = seed;
        *json = dup(j.dump());
    });
}

rdmc_status rdmc_verify(const rdmc_table* t, const char* campaign, double delta, unsigned threads, uint64_t seed,
                        char** report, int* all_pass)
{
    return guarded([&] {
        need(campaign, "campaign");
        need(report, "report");
        std::string c = campaign;
        rdmc::verify::CampaignOptions opt;
        opt.delta = delta > 0 ? delta : 0.0;
        opt.threads = threads == 0 ? 1 : threads;
        opt.seed = seed;
        rdmc::VerificationReport r;
        if (c == "fixtures") {
            r = rdmc::verify::verify_fixtures(seed);
        } else {
            rdmc::require(t != nullptr, ErrorCode::InvalidArgument, "campaign " + c + " needs a table");
            if (c == "a1")
                r = rdmc::verify::verify_A1(t->table, opt);
            else if (c == "a2")
                r = rdmc::verify::verify_A2(t->table, opt);
            else if (c == "a3")
                r = rdmc::verify::verify_A3(t->table, opt);
            else if (c == "qsums")
                r = rdmc::verify::verify_qsums(t->table);
            else if (c == "stash")
                r = rdmc::verify::verify_stash(t->table);
            else
                rdmc::fail(ErrorCode::InvalidArgument, "unknown campaign '" + c + "'");
        }
        if (all_pass) *all_pass = r.all_pass() ? 1 : 0;
        *report = dup(rdmc::to_json(r));
    });
}

rdmc_status rdmc_report_text(const char* report_json, char** text)
{
    return guarded([&] {
        need(report_json, "report_json");
        need(text, "text");
        *text = dup(rdmc::to_text(rdmc::report_from_json(report_json)));
    });
}

}  // extern "C"
