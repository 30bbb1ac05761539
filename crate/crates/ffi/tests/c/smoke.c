#include <stdio.h>
#include <string.h>
#include "pbs.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (%s)\n", #cond, pbs_last_error_message()); return 1; } } while (0)

int main(void) {
    const char *text = "the quick brown fox jumps over the lazy dog";
    char *seq = NULL;
    CHECK(pbs_encode((const uint8_t *)text, strlen(text), 12, &seq) == PBS_STATUS_OK);
    CHECK(strlen(seq) == 9);

    PbsIndex *index = NULL;
    CHECK(pbs_index_build((const uint8_t *)seq, strlen(seq), 12, &index) == PBS_STATUS_OK);
    size_t count = 0;
    CHECK(pbs_index_count(index, (const uint8_t *)seq + 2, 3, &count) == PBS_STATUS_OK);
    CHECK(count >= 1);

    uint64_t *positions = NULL;
    size_t n = 0;
    CHECK(pbs_index_locate(index, (const uint8_t *)seq, strlen(seq), &positions, &n) == PBS_STATUS_OK);
    CHECK(n == 1 && positions[0] == 0);
    pbs_positions_free(positions, n);

    CHECK(pbs_index_build((const uint8_t *)"AB", 2, 12, &index) == PBS_STATUS_ILLEGAL_CHARACTER);
    CHECK(strlen(pbs_last_error_message()) > 0);

    pbs_index_free(index);
    pbs_string_free(seq);
    printf("ok %s\n", pbs_version());
    return 0;
}
