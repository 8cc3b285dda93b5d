# cython: language_level=3
"""Compiled twins of the kernels in ``_pure``; same semantics, C loops.

Token ids fit comfortably in 64 bits (256 singles plus one id per merge).
"""

from libc.stdlib cimport free, malloc


def count_pairs(tokens):
    """Positional counts of adjacent token-id pairs in one word."""
    cdef Py_ssize_t i, n = len(tokens)
    out = {}
    if n < 2:
        return out
    for i in range(n - 1):
        key = (tokens[i], tokens[i + 1])
        if key in out:
            out[key] += 1
        else:
            out[key] = 1
    return out


def merge_and_deltas(tokens, long long a, long long b, long long c):
    """Replace leftmost non-overlapping (a, b) occurrences with c.

    Returns (new_tokens, replacements, deltas); see the pure twin.
    """
    cdef Py_ssize_t n = len(tokens)
    cdef Py_ssize_t i, j, m
    cdef long long *old
    cdef long long *new
    cdef int replaced = 0

    if n < 2:
        return tokens, 0, {}

    old = <long long *> malloc(n * sizeof(long long))
    new = <long long *> malloc(n * sizeof(long long))
    if old == NULL or new == NULL:
        free(old)
        free(new)
        raise MemoryError()
    try:
        for i in range(n):
            old[i] = tokens[i]
        i = 0
        m = 0
        while i < n:
            if i + 1 < n and old[i] == a and old[i + 1] == b:
                new[m] = c
                i += 2
                replaced += 1
            else:
                new[m] = old[i]
                i += 1
            m += 1
        if replaced == 0:
            return tokens, 0, {}
        deltas = {}
        for i in range(n - 1):
            key = (old[i], old[i + 1])
            d = deltas.get(key, 0) - 1
            if d:
                deltas[key] = d
            else:
                del deltas[key]
        for j in range(m - 1):
            key = (new[j], new[j + 1])
            d = deltas.get(key, 0) + 1
            if d:
                deltas[key] = d
            else:
                del deltas[key]
        result = tuple([new[j] for j in range(m)])
        return result, replaced, deltas
    finally:
        free(old)
        free(new)


def encode_ids(ids, table: dict):
    """Tokenize one pre-token's id sequence against a merge table."""
    cdef Py_ssize_t i, m, n = len(ids)
    cdef long long best_a = 0, best_b = 0, best_new = 0
    cdef long long rank, best_rank
    cdef long long *seq
    cdef long long *out

    if n < 2:
        return list(ids)

    seq = <long long *> malloc(n * sizeof(long long))
    out = <long long *> malloc(n * sizeof(long long))
    if seq == NULL or out == NULL:
        free(seq)
        free(out)
        raise MemoryError()
    try:
        for i in range(n):
            seq[i] = ids[i]
        while n > 1:
            best_rank = -1
            for i in range(n - 1):
                entry = table.get((seq[i], seq[i + 1]))
                if entry is not None:
                    rank = entry[0]
                    if best_rank < 0 or rank < best_rank:
                        best_rank = rank
                        best_new = entry[1]
                        best_a = seq[i]
                        best_b = seq[i + 1]
            if best_rank < 0:
                break
            i = 0
            m = 0
            while i < n:
                if i + 1 < n and seq[i] == best_a and seq[i + 1] == best_b:
                    out[m] = best_new
                    i += 2
                else:
                    out[m] = seq[i]
                    i += 1
                m += 1
            for i in range(m):
                seq[i] = out[i]
            n = m
        return [seq[i] for i in range(n)]
    finally:
        free(seq)
        free(out)
