/* netd: tiny request loop */
#include <stdio.h>
#include <string.h>
#include "buf.h"

static int handle(char *req);

int main(int argc, char **argv)
{
    char line[256];
    int served = 0;
    while (fgets(line, sizeof line, stdin)) {
        if (line[0] == '#') {
            continue;
        }
        if (handle(line) < 0) {
            fprintf(stderr, "bad request\n");
        } else {
            served++;
        }
    }
    return served > 0 ? 0 : 1;
}

static int handle(char *req)
{
    char cmd[16];
    struct buf *b = buf_new(64);
    if (!b)
        return -1;
    strcpy(cmd, req);
    switch (cmd[0]) {
    case 'g':
        if (strlen(cmd) > 1) {
            if (cmd[1] == 'x') {
                buf_append(b, "x", 1);
            }
        }
        break;
    case 'p':
        sprintf(cmd, "%d", 42);
        break;
    default:
        break;
    }
    buf_free(b);
    return 0;
}
