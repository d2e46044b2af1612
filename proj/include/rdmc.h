#ifndef RDMC_H
#define RDMC_H

/*
 * C interface to the rdmc library: certified lower bounds on tails of
 * Rademacher sums X = sum_i a_i eps_i.
 *
 * Conventions
 *   - Every function returns an rdmc_status. On failure the message is
 *     available from rdmc_last_error() in the calling thread.
 *   - Exact inputs are strings: "1/3", "0.35", "sqrt(7/30)", "1/2*sqrt(1/3)",
 *     or comma-separated lists of those.
 *   - Structured results are JSON strings owned by the caller and released
 *     with rdmc_string_free().
 *   - Verification reports share one schema:
 *       {campaign, config{}, summary{items, passed, failed, all_pass},
 *        items[{description, target, achieved, margin, pass, detail?}], notes[]}
 */

#include <stddef.h>
#include <stdint.h>

#if defined(RDMC_BUILDING_LIBRARY)
#define RDMC_API __attribute__((visibility("default")))
#else
#define RDMC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rdmc_status {
    RDMC_OK = 0,
    RDMC_E_INVALID_ARGUMENT = 1,
    RDMC_E_CAP_EXCEEDED = 2,     /* enumeration or permutation size cap */
    RDMC_E_EXACT_UNAVAILABLE = 3,
    RDMC_E_NON_FINITE = 4,
    RDMC_E_IO = 5,
    RDMC_E_FORMAT = 6,
    RDMC_E_CHECKSUM = 7,
    RDMC_E_VERSION = 8,
    RDMC_E_PRECONDITION = 9,
    RDMC_E_INTERNAL = 10
} rdmc_status;

typedef struct rdmc_table rdmc_table;

typedef void (*rdmc_progress_fn)(const char* message, void* user);

RDMC_API const char* rdmc_version(void);
RDMC_API const char* rdmc_status_name(rdmc_status s);
/* Message of the last failure in this thread ("" when none). */
RDMC_API const char* rdmc_last_error(void);
RDMC_API void rdmc_string_free(char* s);

/* ------------------------------------------------------------ oracle */

/* Exact Pr for the weights rescaled to unit variance. mode is ge, gt, abs_ge
 * or abs_in_open (t2 is the upper end for abs_in_open, otherwise ignored).
 * weights_file, when non-NULL, replaces weights (one weight per line).
 * JSON: {n, weights[], mode, threshold, probability "p/q", value}. */
RDMC_API rdmc_status rdmc_oracle_tail(const char* weights, const char* weights_file, const char* t,
                                      const char* t2, const char* mode, int cap, char** json);

/* Norm tails of a vector weight set given as a file (one vector per line).
 * direction is "ge" (|X| >= 1) or "le" (|X| <= 1).
 * JSON: {n, dimension, direction, probability, value, floor}. */
RDMC_API rdmc_status rdmc_oracle_norm(const char* vectors_file, const char* direction, int cap, char** json);

/* ------------------------------------------------------------ prawitz */

RDMC_API rdmc_status rdmc_theta(double* lo, double* hi);

/* T <= 0 or q <= 0 select the defaults pi/a and 1/2. mode is "trapezoid" or
 * "adaptive"; panels = 0 refines adaptively to the default tolerance.
 * JSON: {a, x, T, q, mode, value, error_budget, estimate, panels}. */
RDMC_API rdmc_status rdmc_prawitz_eval(double a, double x, double T, double q, const char* mode, uint32_t panels,
                                       double* value, char** json);

/* ------------------------------------------------------------ table */

/* delta is "1/N" or a decimal equal to 1/N. integrator as for prawitz_eval.
 * d0_cache may be NULL. candidates is "grid" or "cell". report JSON holds
 * timings and per-iteration statistics. */
RDMC_API rdmc_status rdmc_table_build(const char* delta, uint32_t iterations, const char* integrator,
                                      const char* candidates, const char* d0_cache, unsigned threads,
                                      rdmc_progress_fn progress, void* user, rdmc_table** out, char** report);
RDMC_API rdmc_status rdmc_table_load(const char* path, rdmc_table** out);
RDMC_API rdmc_status rdmc_table_save(const rdmc_table* t, const char* path);
RDMC_API void rdmc_table_free(rdmc_table* t);
/* Rounded-up lookup D(a, x); a in (0, 1]. */
RDMC_API rdmc_status rdmc_table_query(const rdmc_table* t, double a, double x, double* value);
/* JSON: {delta, steps_per_unit, iteration, integrator, a_count, x_count}. */
RDMC_API rdmc_status rdmc_table_info(const rdmc_table* t, char** json);

/* ------------------------------------------------------------ chains and walks */

/* Sum of the k largest binomial coefficients C(t, i), as a decimal string. */
RDMC_API rdmc_status rdmc_chain_f(int64_t k, int64_t t, char** decimal);
/* Antichain window bound; tail may be NULL or "". Returns a report. */
RDMC_API rdmc_status rdmc_chain_check(const char* weights, int64_t k, const char* alpha, const char* tail,
                                      char** report);
/* Separation checks: weights holds 2 (k = 2) or 3 (k = 3) values. */
RDMC_API rdmc_status rdmc_chain_separation(const char* weights, const char* delta, const char* tail, char** report);

/* policy is "fixed", "best" or "heuristic".
 * JSON: {policy, n, x, c, probability "p/q", value, order[]}. */
RDMC_API rdmc_status rdmc_walk_prob(const char* set, const char* x, const char* policy, char** json);
/* Lemma check; eta may be NULL. Monte Carlo is used beyond 30 weights. */
RDMC_API rdmc_status rdmc_walk_lemma(const char* set, const char* x, const char* eta, uint64_t trials, uint64_t seed,
                                     unsigned threads, char** report);
/* JSON: {policy, trials, successes, p_hat, lcb, ucb, seed}. */
RDMC_API rdmc_status rdmc_walk_sim(const char* set, const char* x, const char* policy, uint64_t trials,
                                   uint64_t seed, unsigned threads, char** json);

/* ------------------------------------------------------------ verification */

/* campaign is a1, a2, a3, qsums, stash or fixtures; t may be NULL for
 * fixtures. delta <= 0 uses the campaign default. *all_pass is set to 1 when
 * every report item passes. */
RDMC_API rdmc_status rdmc_verify(const rdmc_table* t, const char* campaign, double delta, unsigned threads,
                                 uint64_t seed, char** report, int* all_pass);

/* Human-readable rendering of a report JSON. */
RDMC_API rdmc_status rdmc_report_text(const char* report_json, char** text);

#ifdef __cplusplus
}
#endif

#endif /* RDMC_H */
