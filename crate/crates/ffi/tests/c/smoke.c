#include <math.h>
#include <stdio.h>
#include "chsim.h"

#define CHECK(call)                                                              \
  do {                                                                           \
    ChsimStatus s_ = (call);                                                     \
    if (s_ != CHSIM_STATUS_OK) {                                                 \
      fprintf(stderr, "%s: %s (%s)\n", #call, chsim_status_string(s_),           \
              chsim_last_error());                                               \
      return 1;                                                                  \
    }                                                                            \
  } while (0)

int main(void) {
  ChsimSweep *sweep = NULL;
  ChsimResults *results = NULL;
  CHECK(chsim_sweep_new("smooth-ch", "vd", &sweep));
  CHECK(chsim_sweep_set_levels(sweep, 3, 4));
  CHECK(chsim_sweep_set_repeats(sweep, 1));
  CHECK(chsim_sweep_run(sweep, &results));
  if (chsim_results_len(results) != 2) return 2;
  ChsimRow row;
  CHECK(chsim_results_row(results, 1, &row));
  if (row.n != 16 || row.failed || !(row.l2_error > 0.0)) return 3;
  chsim_results_free(results);
  chsim_sweep_free(sweep);

  if (chsim_sweep_new("smooth-2ch", "hr", &sweep) != CHSIM_STATUS_INCOMPATIBLE) return 4;
  if (sweep != NULL || chsim_last_error() == NULL) return 5;

  double y[2] = {1.5, 4.5}, u[2] = {1.0, 0.5}, e0, m0, e1, m1;
  ChsimPeakons *p = NULL;
  CHECK(chsim_peakons_new(y, u, 2, 6.0, &p));
  CHECK(chsim_peakons_invariants(p, &e0, &m0));
  CHECK(chsim_peakons_advance(p, 1.0, 1e-12, 1e-12));
  CHECK(chsim_peakons_invariants(p, &e1, &m1));
  chsim_peakons_free(p);
  if (fabs(e1 - e0) > 1e-9 * e0 || fabs(m1 - m0) > 1e-9 * fabs(m0)) return 6;
  puts("ok");
  return 0;
}
