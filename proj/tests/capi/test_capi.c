/* Exercises the C interface from plain C. */

#include "rdmc.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define EXPECT(cond)                                                     \
    do {                                                                 \
        if (!(cond)) {                                                   \
            fprintf(stderr, "%s:%d: expected %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                  \
        }                                                                \
    } while (0)

static int contains(const char* hay, const char* needle) { return hay && strstr(hay, needle) != NULL; }

static void count_progress(const char* msg, void* user)
{
    (void)msg;
    ++*(int*)user;
}

int main(void)
{
    char* s = NULL;
    EXPECT(strlen(rdmc_version()) > 0);
    EXPECT(strcmp(rdmc_status_name(RDMC_OK), "ok") == 0);

    /* oracle */
    EXPECT(rdmc_oracle_tail("1/2,1/2,1/2,1/2", NULL, "1", NULL, "gt", 0, &s) == RDMC_OK);
    EXPECT(contains(s, "\"probability\":\"1/16\""));
    rdmc_string_free(s);
    s = NULL;
    EXPECT(strcmp(rdmc_last_error(), "") == 0);

    EXPECT(rdmc_oracle_tail("1/3,1/3,1/3,1/3,1/3,1/3,1/3,1/3,1/3", NULL, "1", NULL, "gt", 0, &s) == RDMC_OK);
    EXPECT(contains(s, "23/256"));
    rdmc_string_free(s);
    s = NULL;

    /* errors carry a status and a message */
    EXPECT(rdmc_oracle_tail("1,x", NULL, "1", NULL, "ge", 0, &s) == RDMC_E_INVALID_ARGUMENT);
    EXPECT(strlen(rdmc_last_error()) > 0);
    EXPECT(s == NULL);
    EXPECT(rdmc_oracle_tail(NULL, NULL, "1", NULL, "ge", 0, &s) == RDMC_E_INVALID_ARGUMENT);
    EXPECT(rdmc_oracle_tail("1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1,1", NULL, "1", NULL, "ge", 0, &s) ==
           RDMC_E_CAP_EXCEEDED);
    EXPECT(rdmc_oracle_tail("1,1", NULL, "1", NULL, "sideways", 0, &s) == RDMC_E_INVALID_ARGUMENT);

    /* prawitz */
    double lo = 0, hi = 0;
    EXPECT(rdmc_theta(&lo, &hi) == RDMC_OK);
    EXPECT(hi - lo <= 1e-10 && fabs(lo - 1.778) < 1e-4);
    double v = -1;
    EXPECT(rdmc_prawitz_eval(0.3, 1.0, 0, 0, "trapezoid", 0, &v, NULL) == RDMC_OK);
    EXPECT(v > 0.05 && v < 0.1);
    EXPECT(rdmc_prawitz_eval(0.0, 1.0, 0, 0, "trapezoid", 0, &v, NULL) == RDMC_E_INVALID_ARGUMENT);

    /* chains and walks */
    EXPECT(rdmc_chain_f(2, 2, &s) == RDMC_OK);
    EXPECT(s && strcmp(s, "3") == 0);
    rdmc_string_free(s);
    s = NULL;
    EXPECT(rdmc_walk_prob("0.6,0.6", "1", "best", &s) == RDMC_OK);
    EXPECT(contains(s, "\"probability\":\"1/2\""));
    rdmc_string_free(s);
    s = NULL;
    EXPECT(rdmc_walk_prob("1,1,1,1,1,1,1,1,1", "1", "best", &s) == RDMC_E_CAP_EXCEEDED);
    EXPECT(rdmc_chain_separation("1,1,1,1", "1/2", NULL, &s) == RDMC_E_INVALID_ARGUMENT);

    /* tables */
    rdmc_table* t = NULL;
    EXPECT(rdmc_table_load("/nonexistent/table.bin", &t) == RDMC_E_IO);
    EXPECT(t == NULL);
    int calls = 0;
    char* report = NULL;
    EXPECT(rdmc_table_build("1/10", 2, "trapezoid", "grid", NULL, 1, count_progress, &calls, &t, &report) == RDMC_OK);
    EXPECT(t != NULL);
    EXPECT(calls > 0);
    EXPECT(contains(report, "\"per_iteration\""));
    rdmc_string_free(report);
    EXPECT(rdmc_table_query(t, 0.3, 3.5, &v) == RDMC_OK && v == 0.0);
    EXPECT(rdmc_table_query(t, 0.3, -3.5, &v) == RDMC_OK && v >= 0.5);
    EXPECT(rdmc_table_query(t, 0.0, 1.0, &v) == RDMC_E_INVALID_ARGUMENT);
    EXPECT(rdmc_table_info(t, &s) == RDMC_OK);
    EXPECT(contains(s, "\"delta\":\"1/10\""));
    rdmc_string_free(s);
    s = NULL;

    const char* path = "rdmc_capi_test_table.bin";
    EXPECT(rdmc_table_save(t, path) == RDMC_OK);
    rdmc_table* back = NULL;
    EXPECT(rdmc_table_load(path, &back) == RDMC_OK);
    double v1 = 0, v2 = 1;
    rdmc_table_query(t, 0.35, 0.35, &v1);
    rdmc_table_query(back, 0.35, 0.35, &v2);
    EXPECT(v1 == v2);
    rdmc_table_free(back);
    remove(path);

    /* verification */
    int pass = -1;
    EXPECT(rdmc_verify(NULL, "fixtures", 0, 1, 1, &report, &pass) == RDMC_OK);
    EXPECT(pass == 1);
    char* text = NULL;
    EXPECT(rdmc_report_text(report, &text) == RDMC_OK);
    EXPECT(contains(text, "fixtures"));
    rdmc_string_free(text);
    rdmc_string_free(report);
    report = NULL;
    EXPECT(rdmc_verify(t, "a3", 0, 1, 1, &report, &pass) == RDMC_E_PRECONDITION);
    EXPECT(rdmc_verify(t, "nonsense", 0, 1, 1, &report, &pass) == RDMC_E_INVALID_ARGUMENT);
    EXPECT(rdmc_verify(NULL, "stash", 0, 1, 1, &report, &pass) == RDMC_E_INVALID_ARGUMENT);
    EXPECT(rdmc_report_text("{not json", &text) == RDMC_E_FORMAT);
    rdmc_table_free(t);
    rdmc_table_free(NULL);
    rdmc_string_free(NULL);

    if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
    else printf("C interface: all checks passed\n");
    return failures ? 1 : 0;
}
