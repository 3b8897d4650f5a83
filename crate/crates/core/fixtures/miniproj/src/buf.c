#include <stdlib.h>
#include <string.h>
#include "buf.h"

// growable byte buffer

struct buf *buf_new(size_t cap)
{
    struct buf *b = malloc(sizeof *b);
    if (b == NULL)
        return NULL;
    b->data = calloc(cap, 1);
    b->len = 0;
    b->cap = cap;
    return b;
}

static int grow(struct buf *b, size_t need)
{
    if (b->cap >= need)
        return 0;
    b->cap *= 2;
    b->data = realloc(b->data, b->cap);
    return grow(b, need);
}

int buf_append(struct buf *b, const char *s, size_t n)
{
    size_t i;
    if (grow(b, b->len + n) != 0)
        return -1;
    for (i = 0; i < n; i++)
        b->data[b->len++] = s[i];
    do {
        b->data[b->len] = '\0';
    } while (0);
    return 0;
}

void buf_free(struct buf *b)
{
    free(b->data);
    free(b);
}

/* parity of a chunk count, by mutual recursion */
int is_even(unsigned n) { return n == 0 ? 1 : is_odd(n - 1); }
int is_odd(unsigned n) { return n == 0 ? 0 : is_even(n - 1); }
