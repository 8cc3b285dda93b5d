"""Pure-Python reference implementations of the hot kernels.

Semantics contract shared with the compiled twin in ``_speedups.pyx``:
pair counting is positional (overlapping adjacencies each count), merge
replacement is leftmost-first and non-overlapping, and encoding repeatedly
applies the lowest-ranked applicable merge to all of its occurrences.
"""

from __future__ import annotations


def count_pairs(tokens) -> dict:
    """Positional counts of adjacent token-id pairs in one word."""
    out: dict = {}
    for i in range(len(tokens) - 1):
        key = (tokens[i], tokens[i + 1])
        out[key] = out.get(key, 0) + 1
    return out


def merge_and_deltas(tokens, a: int, b: int, c: int):
    """Replace leftmost non-overlapping (a, b) occurrences with c.

    Returns ``(new_tokens, replacements, deltas)`` where ``deltas`` maps
    adjacent pairs to the change in their positional count caused by the
    replacement. ``new_tokens`` is the input object when nothing matched.
    """
    n = len(tokens)
    out = []
    i = 0
    replaced = 0
    while i < n:
        if i + 1 < n and tokens[i] == a and tokens[i + 1] == b:
            out.append(c)
            i += 2
            replaced += 1
        else:
            out.append(tokens[i])
            i += 1
    if not replaced:
        return tokens, 0, {}
    deltas: dict = {}
    for i in range(n - 1):
        key = (tokens[i], tokens[i + 1])
        d = deltas.get(key, 0) - 1
        if d:
            deltas[key] = d
        else:
            del deltas[key]
    for i in range(len(out) - 1):
        key = (out[i], out[i + 1])
        d = deltas.get(key, 0) + 1
        if d:
            deltas[key] = d
        else:
            del deltas[key]
    return tuple(out), replaced, deltas


def encode_ids(ids, table: dict) -> list:
    """Tokenize one pre-token's id sequence against a merge table.

    ``table`` maps an adjacent id pair to ``(rank, merged_id)``. The lowest
    rank present in the sequence is applied to all of its occurrences
    (leftmost-first, non-overlapping) until no pair is in the table.
    """
    seq = list(ids)
    while len(seq) > 1:
        best_rank = -1
        best_a = best_b = best_new = 0
        for i in range(len(seq) - 1):
            entry = table.get((seq[i], seq[i + 1]))
            if entry is not None and (best_rank < 0 or entry[0] < best_rank):
                best_rank = entry[0]
                best_new = entry[1]
                best_a, best_b = seq[i], seq[i + 1]
        if best_rank < 0:
            break
        out = []
        i = 0
        n = len(seq)
        while i < n:
            if i + 1 < n and seq[i] == best_a and seq[i + 1] == best_b:
                out.append(best_new)
                i += 2
            else:
                out.append(seq[i])
                i += 1
        seq = out
    return seq
