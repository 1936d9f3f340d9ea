"""Pure-Python implementations of the hot kernels.

Reference semantics for the compiled `_speedups` module; the two must agree
exactly on every input. Everything here returns ``array('q')`` so callers
can treat both backends uniformly (slicing, bisect, len).
"""

import unicodedata
from array import array
from heapq import merge as _heapmerge

_MARK_CATEGORIES = ("Mn", "Mc", "Me")
_JOINERS = "‌‍"  # ZWNJ / ZWJ keep e.g. Farsi compounds intact


def _is_token_char(ch: str) -> bool:
    if ch.isalnum():
        return True
    if ch in _JOINERS:
        return True
    return unicodedata.category(ch) in _MARK_CATEGORIES


def tokenize(text: str) -> list[str]:
    """Lowercase and split into tokens.

    Token characters are letters, digits, combining marks and the
    zero-width joiners; everything else splits. A ``#`` or ``@`` directly
    followed by a token character opens a new token and is kept as its
    first character, so hashtag/mention strings stay searchable as raw
    text.
    """
    s = text.lower()
    out: list[str] = []
    cur: list[str] = []
    n = len(s)
    i = 0
    while i < n:
        ch = s[i]
        if _is_token_char(ch):
            cur.append(ch)
        else:
            if cur:
                out.append("".join(cur))
                cur = []
            if (ch == "#" or ch == "@") and i + 1 < n and _is_token_char(s[i + 1]):
                cur.append(ch)
        i += 1
    if cur:
        out.append("".join(cur))
    return out


def encode_uvarint(out: bytearray, value: int) -> None:
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def _decode_uvarint(buf, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        b = buf[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if b < 0x80:
            return result, pos
        shift += 7


def encode_term_postings(flat: list[int]) -> bytes:
    """Serialize one term's postings.

    ``flat`` is ``[doc, npos, pos...]`` repeated, docs strictly increasing,
    positions strictly increasing within a doc. Layout: ndocs varint,
    doc-block length varint, delta-coded doc block, then per doc a
    positions run (count varint + delta-coded positions). The split lets
    term-only queries skip the positions entirely.
    """
    docs = bytearray()
    poss = bytearray()
    ndocs = 0
    prev_doc = -1
    i = 0
    n = len(flat)
    while i < n:
        doc = flat[i]
        npos = flat[i + 1]
        encode_uvarint(docs, doc - prev_doc - 1 if prev_doc >= 0 else doc)
        prev_doc = doc
        ndocs += 1
        encode_uvarint(poss, npos)
        prev_pos = -1
        for j in range(i + 2, i + 2 + npos):
            p = flat[j]
            encode_uvarint(poss, p - prev_pos - 1 if prev_pos >= 0 else p)
            prev_pos = p
        i += 2 + npos
    head = bytearray()
    encode_uvarint(head, ndocs)
    encode_uvarint(head, len(docs))
    return bytes(head + docs + poss)


def decode_doc_ids(buf) -> array:
    """Decode only the doc-ordinal block of a term's postings."""
    ndocs, pos = _decode_uvarint(buf, 0)
    _, pos = _decode_uvarint(buf, pos)
    out = array("q", bytes(8 * ndocs))
    prev = -1
    for i in range(ndocs):
        delta, pos = _decode_uvarint(buf, pos)
        prev = prev + delta + 1 if prev >= 0 else delta
        out[i] = prev
    return out


def decode_postings(buf) -> tuple[array, array, array]:
    """Decode docs plus positions: (docs, pos_offsets, pos_flat).

    ``pos_offsets`` has ndocs+1 entries indexing into ``pos_flat``.
    """
    ndocs, pos = _decode_uvarint(buf, 0)
    doc_len, pos = _decode_uvarint(buf, pos)
    docs = array("q", bytes(8 * ndocs))
    prev = -1
    for i in range(ndocs):
        delta, pos = _decode_uvarint(buf, pos)
        prev = prev + delta + 1 if prev >= 0 else delta
        docs[i] = prev
    offsets = array("q", bytes(8 * (ndocs + 1)))
    flat: list[int] = []
    for i in range(ndocs):
        offsets[i] = len(flat)
        npos, pos = _decode_uvarint(buf, pos)
        prev_p = -1
        for _ in range(npos):
            delta, pos = _decode_uvarint(buf, pos)
            prev_p = prev_p + delta + 1 if prev_p >= 0 else delta
            flat.append(prev_p)
    offsets[ndocs] = len(flat)
    return docs, offsets, array("q", flat)


def intersect_sorted(a, b) -> array:
    out = array("q")
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x, y = a[i], b[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    return out


def union_sorted_many(arrays) -> array:
    """K-way merge of sorted ordinal arrays with duplicate removal."""
    out = array("q")
    last = -1
    for v in _heapmerge(*arrays):
        if v != last:
            out.append(v)
            last = v
    return out


def _positions_of(decoded, row: int):
    _, offsets, flat = decoded
    return flat[offsets[row] : offsets[row + 1]]


def _find_row(docs, doc: int) -> int:
    lo, hi = 0, len(docs)
    while lo < hi:
        mid = (lo + hi) // 2
        if docs[mid] < doc:
            lo = mid + 1
        else:
            hi = mid
    if lo < len(docs) and docs[lo] == doc:
        return lo
    return -1


def phrase_match(decoded_terms) -> array:
    """Docs where the terms occur at consecutive positions, in order.

    ``decoded_terms`` is one ``decode_postings`` result per phrase token.
    """
    cand = decoded_terms[0][0]
    for t in range(1, len(decoded_terms)):
        cand = intersect_sorted(cand, decoded_terms[t][0])
        if not cand:
            return array("q")
    out = array("q")
    for doc in cand:
        cur = _positions_of(decoded_terms[0], _find_row(decoded_terms[0][0], doc))
        for t in range(1, len(decoded_terms)):
            nxt = _positions_of(decoded_terms[t], _find_row(decoded_terms[t][0], doc))
            # keep p in cur with p + t present in nxt
            kept = array("q")
            i = j = 0
            while i < len(cur) and j < len(nxt):
                want = cur[i] + t
                have = nxt[j]
                if want == have:
                    kept.append(cur[i])
                    i += 1
                    j += 1
                elif want < have:
                    i += 1
                else:
                    j += 1
            cur = kept
            if not cur:
                break
        if cur:
            out.append(doc)
    return out


def bucket_counts(ts_values, ords, boundaries) -> array:
    """Histogram of timestamps against ascending bucket boundaries.

    ``boundaries`` has nbuckets+1 entries; counts[i] covers
    [boundaries[i], boundaries[i+1]). ``ords`` selects a sorted subset of
    ordinals, or None for all values. Timestamps must be ascending in
    ordinal order; values outside the boundary span are ignored.
    """
    nb = len(boundaries) - 1
    counts = array("q", bytes(8 * nb))
    j = 0
    values = ts_values if ords is None else (ts_values[o] for o in ords)
    lo = boundaries[0]
    hi = boundaries[nb]
    for v in values:
        if v < lo or v >= hi:
            continue
        while v >= boundaries[j + 1]:
            j += 1
        counts[j] += 1
    return counts
