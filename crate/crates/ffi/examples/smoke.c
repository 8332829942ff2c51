#include <stdio.h>
#include "hexsolve.h"

int main(void) {
    HexSolver *s = hex_solver_new();
    HexResult *r = NULL;
    HexStatus st = hex_solve(s, "p(a). p(b). q(b). r(X) :- &diff[p,q](X).", 0, &r);
    if (st != HEX_STATUS_OK) {
        fprintf(stderr, "error %d: %s\n", st, hex_last_error());
        return 1;
    }
    for (size_t i = 0; i < hex_result_count(r); i++)
        printf("%s\n", hex_result_answer_set(r, i));
    hex_result_free(r);
    st = hex_solve(s, "a :- .", 0, &r);
    printf("%d %s\n", st, hex_last_error());
    hex_solver_free(s);
    return 0;
}
