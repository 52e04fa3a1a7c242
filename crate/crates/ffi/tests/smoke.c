#include <math.h>
#include <stdio.h>
#include <string.h>

#include "falsur.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
              falsur_last_error() ? falsur_last_error() : "");       \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  FalsurBenchmark *b = NULL;
  CHECK(falsur_benchmark_open("nope", &b) == FALSUR_STATUS_CONFIG);
  CHECK(strstr(falsur_last_error(), "nope") != NULL);
  CHECK(falsur_benchmark_open("satlite", &b) == FALSUR_STATUS_OK);

  size_t dim = 0;
  CHECK(falsur_benchmark_dimension(b, &dim) == FALSUR_STATUS_OK);
  CHECK(dim == 64);

  const char *names[] = {"x"};
  double values[] = {0.0, 1.0, 2.0, 3.0, 4.0};
  FalsurTrace *t = NULL;
  CHECK(falsur_trace_new(4.0, 1.0, names, 1, values, 5, &t) == FALSUR_STATUS_OK);
  FalsurFormula *f = NULL;
  CHECK(falsur_formula_parse("G[0,4] (x < 3)", names, 1, &f) == FALSUR_STATUS_OK);
  double rho = 0.0;
  CHECK(falsur_robustness(f, t, 0.0, &rho) == FALSUR_STATUS_OK);
  CHECK(rho == -1.0);

  size_t orders[] = {2, 2, 1};
  FalsurAristeoReport *r = NULL;
  CHECK(falsur_aristeo(b, NULL, "random", "arx", orders, 3, 100, 10, 0, &r) == FALSUR_STATUS_OK);
  CHECK(falsur_aristeo_mut_executions(r) <= 11);
  CHECK(falsur_aristeo_falsified(r) == (falsur_aristeo_best_objective(r) <= 0.0));
  char *json = NULL;
  CHECK(falsur_aristeo_to_json(r, &json) == FALSUR_STATUS_OK);
  CHECK(strstr(json, "\"mut_executions\"") != NULL);

  falsur_string_free(json);
  falsur_aristeo_free(r);
  falsur_formula_free(f);
  falsur_trace_free(t);
  falsur_benchmark_free(b);
  puts("ok");
  return 0;
}
