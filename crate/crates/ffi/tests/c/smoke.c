#include <stdio.h>
#include "cartan.h"

int main(void) {
    CartanCharTable *t = NULL;
    if (cartan_char_table_new(11, CARTAN_KIND_MAIN, &t) != CARTAN_STATUS_OK) return 1;
    double re = 0, im = 0, sum = 0;
    for (size_t m = 0; m < cartan_char_table_len(t); m++) {
        cartan_char_table_get(t, m, &re, &im);
        sum += re;
    }
    cartan_char_table_free(t);
    if (cartan_char_table_new(7, CARTAN_KIND_MAIN, &t) != CARTAN_STATUS_INVALID_ARGUMENT) return 2;
    if (cartan_last_error() == NULL) return 3;

    CartanBounds b;
    if (cartan_bounds(&b) != CARTAN_STATUS_OK) return 4;

    CartanSieve *s = NULL;
    CartanVerdict v;
    cartan_sieve_new(500, &s);
    if (cartan_sieve_rule_out(s, 2003, 4, 1, &v) != CARTAN_STATUS_OK) return 5;
    cartan_sieve_free(s);

    printf("%.6f %llu %d\n", sum, (unsigned long long)b.p_max_pipeline, v.ruled_out);
    return 0;
}
