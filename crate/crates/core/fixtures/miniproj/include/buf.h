#ifndef BUF_H
#define BUF_H

#include <stddef.h>

/* A growable buffer.
   Not thread-safe. */
struct buf {
    char *data;
    size_t len;
    size_t cap;
};

struct buf *buf_new(size_t cap);
int buf_append(struct buf *b, const char *s, size_t n);
void buf_free(struct buf *b);

#endif
