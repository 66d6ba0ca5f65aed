"""Compiled inner loops.

Every kernel takes a sequence as a ``uint8`` array and writes into caller-owned
buffers; none allocate per position. All arithmetic on bit words and counters
is kept in ``uint64`` because numba promotes mixed signed/unsigned ops to float.
"""

import numpy as np
from numba import njit

ONE = np.uint64(1)
ZERO = np.uint64(0)
_DEBRUIJN = np.uint64(0x03F79D71B4CA8B09)
_SHIFT58 = np.uint64(58)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S8 = np.uint64(8)
_S6 = np.uint64(6)
_M63 = np.uint64(63)


def _debruijn_table():
    table = np.zeros(64, dtype=np.int64)
    for i in range(64):
        table[((1 << i) * 0x03F79D71B4CA8B09 % (1 << 64)) >> 58] = i
    return table


_CTZ = _debruijn_table()


# --------------------------------------------------------------------- bits

@njit(nogil=True, cache=True)
def set_bit(words, idx):
    words[idx >> 6] |= ONE << np.uint64(idx & 63)


@njit(nogil=True, cache=True)
def flush_rows(buf, rows, counts):
    """Add the bit rows ``buf[rows]`` into ``counts`` and zero those rows.

    Walks the table in increasing id order; zero words are skipped so the cost
    is one pass over the words plus one add per set bit.
    """
    nwords = buf.shape[1]
    for w in range(nwords):
        acc = ZERO
        for r in rows:
            acc |= buf[r, w]
        if acc == ZERO:
            continue
        base = w * 64
        for r in rows:
            x = buf[r, w]
            while x != ZERO:
                low = x & (~x + ONE)
                counts[base + _CTZ[(low * _DEBRUIJN) >> _SHIFT58]] += ONE
                x ^= low
            buf[r, w] = ZERO


@njit(nogil=True, cache=True)
def popcount_words(words):
    total = 0
    for w in range(words.shape[0]):
        x = words[w]
        while x != ZERO:
            x &= x - ONE
            total += 1
    return total


# ------------------------------------------------------------- dense n <= 3

@njit(nogil=True, cache=True)
def mark_dense(seq, n, words):
    if seq.shape[0] < n:
        return
    mask = (1 << (8 * n)) - 1
    key = 0
    for i in range(n - 1):
        key = (key << 8) | np.int64(seq[i])
    for i in range(n - 1, seq.shape[0]):
        key = ((key << 8) | np.int64(seq[i])) & mask
        words[key >> 6] |= ONE << np.uint64(key & 63)


@njit(nogil=True, cache=True)
def add_dense(seq, n, counts):
    if seq.shape[0] < n:
        return
    mask = (1 << (8 * n)) - 1
    key = 0
    for i in range(n - 1):
        key = (key << 8) | np.int64(seq[i])
    for i in range(n - 1, seq.shape[0]):
        key = ((key << 8) | np.int64(seq[i])) & mask
        counts[key] += ONE


# --------------------------------------------------------------------- trie

@njit(nogil=True, cache=True, inline="always")
def trie_lookup(seq, start, depth, child_count, first, value, edge_key, edge_child, lut):
    node = 0
    for d in range(depth):
        b = np.int64(seq[start + d])
        c = child_count[node]
        if c == 0:
            return -1
        if c > 4:
            node = lut[np.int64(first[node]) * 256 + b]
            if node < 0:
                return -1
        else:
            f = first[node]
            nxt = -1
            for e in range(f, f + c):
                key = np.int64(edge_key[e])
                if key == b:
                    nxt = edge_child[e]
                    break
                if key > b:
                    break
            if nxt < 0:
                return -1
            node = nxt
    return value[node]


@njit(nogil=True, cache=True)
def lookup_one(window, child_count, first, value, edge_key, edge_child, lut):
    return trie_lookup(window, 0, window.shape[0], child_count, first, value,
                       edge_key, edge_child, lut)


@njit(nogil=True, cache=True)
def mark_extend(seq, depth, child_count, first, value, edge_key, edge_child, lut, words):
    for i in range(seq.shape[0] - depth):
        o = trie_lookup(seq, i, depth, child_count, first, value, edge_key, edge_child, lut)
        if o >= 0:
            cid = np.int64(o) * 256 + np.int64(seq[i + depth])
            words[cid >> 6] |= ONE << np.uint64(cid & 63)


@njit(nogil=True, cache=True)
def add_extend(seq, depth, child_count, first, value, edge_key, edge_child, lut, counts):
    for i in range(seq.shape[0] - depth):
        o = trie_lookup(seq, i, depth, child_count, first, value, edge_key, edge_child, lut)
        if o >= 0:
            counts[np.int64(o) * 256 + np.int64(seq[i + depth])] += ONE


@njit(nogil=True, cache=True)
def mark_full(seq, depth, child_count, first, value, edge_key, edge_child, lut, words):
    for i in range(seq.shape[0] - depth + 1):
        o = trie_lookup(seq, i, depth, child_count, first, value, edge_key, edge_child, lut)
        if o >= 0:
            words[o >> 6] |= ONE << np.uint64(o & 63)


@njit(nogil=True, cache=True)
def add_full(seq, depth, child_count, first, value, edge_key, edge_child, lut, counts):
    for i in range(seq.shape[0] - depth + 1):
        o = trie_lookup(seq, i, depth, child_count, first, value, edge_key, edge_child, lut)
        if o >= 0:
            counts[o] += ONE


# --------------------------------------------------------------------- hash

@njit(nogil=True, cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(nogil=True, cache=True, inline="always")
def window_hash(seq, i, n, h0):
    h = h0
    j = 0
    while j < n:
        end = min(j + 8, n)
        chunk = ZERO
        for t in range(j, end):
            chunk = (chunk << _S8) | np.uint64(seq[i + t])
        h = mix64(h ^ chunk)
        j = end
    return h


@njit(nogil=True, cache=True)
def hash_bytes(gram, h0):
    return window_hash(gram, 0, gram.shape[0], h0)


@njit(nogil=True, cache=True)
def mark_hash(seq, n, h0, nbuckets, words):
    nb = np.uint64(nbuckets)
    if n <= 8:
        if seq.shape[0] < n:
            return
        mask = (ONE << np.uint64(8 * n)) - ONE if n < 8 else ~ZERO
        key = ZERO
        for i in range(n - 1):
            key = (key << _S8) | np.uint64(seq[i])
        for i in range(n - 1, seq.shape[0]):
            key = ((key << _S8) | np.uint64(seq[i])) & mask
            b = mix64(h0 ^ key) % nb
            words[b >> _S6] |= ONE << (b & _M63)
    else:
        for i in range(seq.shape[0] - n + 1):
            b = window_hash(seq, i, n, h0) % nb
            words[b >> _S6] |= ONE << (b & _M63)


@njit(nogil=True, cache=True)
def add_hash(seq, n, h0, nbuckets, counts):
    nb = np.uint64(nbuckets)
    if n <= 8:
        if seq.shape[0] < n:
            return
        mask = (ONE << np.uint64(8 * n)) - ONE if n < 8 else ~ZERO
        key = ZERO
        for i in range(n - 1):
            key = (key << _S8) | np.uint64(seq[i])
        for i in range(n - 1, seq.shape[0]):
            key = ((key << _S8) | np.uint64(seq[i])) & mask
            counts[mix64(h0 ^ key) % nb] += ONE
    else:
        for i in range(seq.shape[0] - n + 1):
            counts[window_hash(seq, i, n, h0) % nb] += ONE


@njit(nogil=True, cache=True, inline="always")
def _in_selected(b, member_words, member_sorted, use_bitset):
    if use_bitset:
        return (member_words[b >> _S6] >> (b & _M63)) & ONE != ZERO
    lo = 0
    hi = member_sorted.shape[0]
    while lo < hi:
        mid = (lo + hi) >> 1
        if member_sorted[mid] < b:
            lo = mid + 1
        else:
            hi = mid
    return lo < member_sorted.shape[0] and member_sorted[lo] == b


@njit(nogil=True, cache=True)
def hit_keys(seq, n, h0, nbuckets, member_words, member_sorted, use_bitset):
    """Packed big-endian keys of every window (n <= 8) whose bucket is selected."""
    nb = np.uint64(nbuckets)
    out = np.empty(max(seq.shape[0] - n + 1, 0), dtype=np.uint64)
    cnt = 0
    if seq.shape[0] < n:
        return out[:0]
    mask = (ONE << np.uint64(8 * n)) - ONE if n < 8 else ~ZERO
    key = ZERO
    for i in range(n - 1):
        key = (key << _S8) | np.uint64(seq[i])
    for i in range(n - 1, seq.shape[0]):
        key = ((key << _S8) | np.uint64(seq[i])) & mask
        b = mix64(h0 ^ key) % nb
        if _in_selected(b, member_words, member_sorted, use_bitset):
            out[cnt] = key
            cnt += 1
    return out[:cnt]


@njit(nogil=True, cache=True)
def hit_positions(seq, n, h0, nbuckets, member_words, member_sorted, use_bitset):
    nb = np.uint64(nbuckets)
    out = np.empty(max(seq.shape[0] - n + 1, 0), dtype=np.int64)
    cnt = 0
    for i in range(seq.shape[0] - n + 1):
        b = window_hash(seq, i, n, h0) % nb
        if _in_selected(b, member_words, member_sorted, use_bitset):
            out[cnt] = i
            cnt += 1
    return out[:cnt]


@njit(nogil=True, cache=True)
def dict_add_keys(d, keys, once):
    if once:
        keys = np.unique(keys)
    for key in keys:
        d[key] = d.get(key, ZERO) + ONE


@njit(nogil=True, cache=True)
def dict_merge(dst, src):
    for key, v in src.items():
        dst[key] = dst.get(key, ZERO) + v
    src.clear()


@njit(nogil=True, cache=True)
def dict_to_arrays(d):
    keys = np.empty(len(d), dtype=np.uint64)
    vals = np.empty(len(d), dtype=np.uint64)
    i = 0
    for key, v in d.items():
        keys[i] = key
        vals[i] = v
        i += 1
    return keys, vals


# -------------------------------------------------------------- selection

@njit(nogil=True, cache=True)
def count_histogram(counts, cap):
    """``hist[c]`` = number of entries equal to c, with everything >= cap - 1 in the last bin."""
    hist = np.zeros(cap, dtype=np.int64)
    top = np.uint64(cap - 1)
    nonzero = 0
    for i in range(counts.shape[0]):
        c = counts[i]
        # tables are mostly empty; skipping zeros avoids a serial chain of
        # increments on bin 0
        if c != 0:
            hist[np.int64(min(c, top))] += 1
            nonzero += 1
    hist[0] += counts.shape[0] - nonzero
    return hist


@njit(nogil=True, cache=True)
def values_at_least(counts, threshold, size):
    out = np.empty(size, dtype=np.uint64)
    t = np.uint64(threshold)
    j = 0
    for i in range(counts.shape[0]):
        if counts[i] >= t:
            out[j] = counts[i]
            j += 1
    return out[:j]


@njit(nogil=True, cache=True)
def ids_at_least(counts, threshold, size):
    out = np.empty(size, dtype=np.int64)
    t = np.uint64(threshold)
    j = 0
    for i in range(counts.shape[0]):
        if counts[i] >= t:
            out[j] = i
            j += 1
    return out[:j]
