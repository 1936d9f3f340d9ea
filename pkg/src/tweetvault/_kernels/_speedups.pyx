# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: tokenizer, postings codec, merges, bucket counts.

Must match `tweetvault._kernels.pure` bit for bit; the test suite asserts
equivalence on random inputs. Posting arrays are always array('q').
"""

import unicodedata
from array import array

from cpython cimport array
from libc.stdlib cimport free, malloc

cdef extern from "Python.h":
    Py_ssize_t PyUnicode_GET_LENGTH(object s)
    Py_UCS4 PyUnicode_READ_CHAR(object s, Py_ssize_t i)
    bint Py_UNICODE_ISALNUM(Py_UCS4 ch)

cdef array.array _Q_TEMPLATE = array("q", [])

_MARK_CATEGORIES = ("Mn", "Mc", "Me")
_category = unicodedata.category


cdef inline bint _is_token_char(Py_UCS4 ch):
    if Py_UNICODE_ISALNUM(ch):
        return True
    if ch == 0x200C or ch == 0x200D:  # ZWNJ / ZWJ
        return True
    return _category(chr(ch)) in _MARK_CATEGORIES


def tokenize(text):
    """See pure.tokenize: lowercase split keeping #/@ token prefixes."""
    cdef str s = (<str?>text).lower()
    cdef Py_ssize_t n = PyUnicode_GET_LENGTH(s)
    cdef Py_ssize_t i = 0, start = -1
    cdef Py_UCS4 ch
    out = []
    while i < n:
        ch = PyUnicode_READ_CHAR(s, i)
        if _is_token_char(ch):
            if start < 0:
                start = i
        else:
            if start >= 0:
                out.append(s[start:i])
                start = -1
            if (ch == u'#' or ch == u'@') and i + 1 < n \
                    and _is_token_char(PyUnicode_READ_CHAR(s, i + 1)):
                start = i
        i += 1
    if start >= 0:
        out.append(s[start:n])
    return out


def encode_uvarint(out, value):
    cdef bytearray buf = <bytearray?>out
    cdef unsigned long long v = value
    while v >= 0x80:
        buf.append(<unsigned char>((v & 0x7F) | 0x80))
        v >>= 7
    buf.append(<unsigned char>v)


cdef inline void _write_uvarint(bytearray out, unsigned long long v):
    while v >= 0x80:
        out.append(<unsigned char>((v & 0x7F) | 0x80))
        v >>= 7
    out.append(<unsigned char>v)


cdef inline unsigned long long _read_uvarint(const unsigned char[::1] buf,
                                             Py_ssize_t *pos):
    cdef unsigned long long result = 0
    cdef int shift = 0
    cdef unsigned char b
    while True:
        b = buf[pos[0]]
        pos[0] += 1
        result |= (<unsigned long long>(b & 0x7F)) << shift
        if b < 0x80:
            return result
        shift += 7


def encode_term_postings(flat):
    """See pure.encode_term_postings for the layout."""
    cdef list lst = <list?>flat
    cdef Py_ssize_t n = len(lst), i = 0, j
    cdef long long doc, npos, p, prev_doc = -1, prev_pos
    cdef long long ndocs = 0
    cdef bytearray docs = bytearray()
    cdef bytearray poss = bytearray()
    while i < n:
        doc = lst[i]
        npos = lst[i + 1]
        if prev_doc >= 0:
            _write_uvarint(docs, <unsigned long long>(doc - prev_doc - 1))
        else:
            _write_uvarint(docs, <unsigned long long>doc)
        prev_doc = doc
        ndocs += 1
        _write_uvarint(poss, <unsigned long long>npos)
        prev_pos = -1
        for j in range(i + 2, i + 2 + npos):
            p = lst[j]
            if prev_pos >= 0:
                _write_uvarint(poss, <unsigned long long>(p - prev_pos - 1))
            else:
                _write_uvarint(poss, <unsigned long long>p)
            prev_pos = p
        i += 2 + npos
    cdef bytearray head = bytearray()
    _write_uvarint(head, <unsigned long long>ndocs)
    _write_uvarint(head, <unsigned long long>len(docs))
    return bytes(head + docs + poss)


def decode_doc_ids(buf):
    """Decode only the doc-ordinal block of a term's postings."""
    cdef const unsigned char[::1] mv = buf
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t ndocs = <Py_ssize_t>_read_uvarint(mv, &pos)
    _read_uvarint(mv, &pos)
    cdef array.array out = array.clone(_Q_TEMPLATE, ndocs, zero=False)
    cdef long long* ov = out.data.as_longlongs
    cdef long long prev = -1
    cdef Py_ssize_t i
    for i in range(ndocs):
        if prev >= 0:
            prev = prev + <long long>_read_uvarint(mv, &pos) + 1
        else:
            prev = <long long>_read_uvarint(mv, &pos)
        ov[i] = prev
    return out


def decode_postings(buf):
    """Decode docs plus positions: (docs, pos_offsets, pos_flat)."""
    cdef const unsigned char[::1] mv = buf
    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t ndocs = <Py_ssize_t>_read_uvarint(mv, &pos)
    _read_uvarint(mv, &pos)
    cdef array.array docs = array.clone(_Q_TEMPLATE, ndocs, zero=False)
    cdef long long* dv = docs.data.as_longlongs
    cdef long long prev = -1
    cdef Py_ssize_t i, k, npos
    for i in range(ndocs):
        if prev >= 0:
            prev = prev + <long long>_read_uvarint(mv, &pos) + 1
        else:
            prev = <long long>_read_uvarint(mv, &pos)
        dv[i] = prev
    cdef array.array offsets = array.clone(_Q_TEMPLATE, ndocs + 1, zero=False)
    cdef array.array flat = array.clone(_Q_TEMPLATE, 0, zero=False)
    cdef Py_ssize_t total = 0
    cdef long long prev_p
    for i in range(ndocs):
        offsets.data.as_longlongs[i] = total
        npos = <Py_ssize_t>_read_uvarint(mv, &pos)
        array.resize_smart(flat, total + npos)
        prev_p = -1
        for k in range(npos):
            if prev_p >= 0:
                prev_p = prev_p + <long long>_read_uvarint(mv, &pos) + 1
            else:
                prev_p = <long long>_read_uvarint(mv, &pos)
            flat.data.as_longlongs[total + k] = prev_p
        total += npos
    offsets.data.as_longlongs[ndocs] = total
    array.resize(flat, total)
    return docs, offsets, flat


def intersect_sorted(a, b):
    cdef array.array aa = <array.array?>a
    cdef array.array bb = <array.array?>b
    cdef long long* av = aa.data.as_longlongs
    cdef long long* bv = bb.data.as_longlongs
    cdef Py_ssize_t na = len(aa), nb = len(bb)
    cdef array.array out = array.clone(_Q_TEMPLATE, min(na, nb), zero=False)
    cdef long long* ov = out.data.as_longlongs
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef long long x, y
    while i < na and j < nb:
        x = av[i]
        y = bv[j]
        if x == y:
            ov[k] = x
            k += 1
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    array.resize(out, k)
    return out


def union_sorted_many(arrays):
    """K-way heap merge with dedup over sorted array('q') inputs."""
    cdef list srcs = [<array.array?>a for a in arrays if len(a) > 0]
    cdef Py_ssize_t k = len(srcs)
    if k == 0:
        return array.clone(_Q_TEMPLATE, 0, zero=False)
    cdef Py_ssize_t total = 0, i
    cdef array.array src
    for i in range(k):
        total += len(<array.array>srcs[i])
    cdef array.array out = array.clone(_Q_TEMPLATE, total, zero=False)
    cdef long long* ov = out.data.as_longlongs

    cdef long long** ptrs = <long long**>malloc(k * sizeof(long long*))
    cdef Py_ssize_t* lens = <Py_ssize_t*>malloc(k * sizeof(Py_ssize_t))
    cdef Py_ssize_t* idxs = <Py_ssize_t*>malloc(k * sizeof(Py_ssize_t))
    cdef long long* heads = <long long*>malloc(k * sizeof(long long))
    cdef Py_ssize_t* slot = <Py_ssize_t*>malloc(k * sizeof(Py_ssize_t))
    if not (ptrs and lens and idxs and heads and slot):
        free(ptrs); free(lens); free(idxs); free(heads); free(slot)
        raise MemoryError
    cdef Py_ssize_t n_out = 0
    cdef Py_ssize_t hsize = k, s
    cdef long long last = -1, v
    try:
        for i in range(k):
            src = <array.array>srcs[i]
            ptrs[i] = src.data.as_longlongs
            lens[i] = len(src)
            idxs[i] = 1
            heads[i] = ptrs[i][0]
            slot[i] = i
        for i in range((k - 2) // 2, -1, -1):
            _sift_down(heads, slot, i, k)
        while hsize > 0:
            s = slot[0]
            v = heads[s]
            if v != last:
                ov[n_out] = v
                n_out += 1
                last = v
            if idxs[s] < lens[s]:
                heads[s] = ptrs[s][idxs[s]]
                idxs[s] += 1
            else:
                hsize -= 1
                slot[0] = slot[hsize]
            if hsize > 0:
                _sift_down(heads, slot, 0, hsize)
    finally:
        free(ptrs); free(lens); free(idxs); free(heads); free(slot)
    array.resize(out, n_out)
    return out


cdef void _sift_down(long long* heads, Py_ssize_t* slot,
                     Py_ssize_t root, Py_ssize_t size):
    cdef Py_ssize_t child
    cdef Py_ssize_t item = slot[root]
    cdef long long key = heads[item]
    while True:
        child = 2 * root + 1
        if child >= size:
            break
        if child + 1 < size and heads[slot[child + 1]] < heads[slot[child]]:
            child += 1
        if heads[slot[child]] < key:
            slot[root] = slot[child]
            root = child
        else:
            break
    slot[root] = item


cdef Py_ssize_t _find_row(long long* docs, Py_ssize_t n, long long doc):
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if docs[mid] < doc:
            lo = mid + 1
        else:
            hi = mid
    if lo < n and docs[lo] == doc:
        return lo
    return -1


def phrase_match(decoded_terms):
    """See pure.phrase_match: consecutive-position conjunction."""
    cdef list terms = <list?>decoded_terms
    cdef Py_ssize_t nterms = len(terms)
    cand = terms[0][0]
    cdef Py_ssize_t t
    for t in range(1, nterms):
        cand = intersect_sorted(cand, terms[t][0])
        if len(cand) == 0:
            return array.clone(_Q_TEMPLATE, 0, zero=False)

    cdef array.array cand_a = <array.array?>cand
    cdef long long* cv = cand_a.data.as_longlongs
    cdef Py_ssize_t ncand = len(cand_a)
    cdef array.array out = array.clone(_Q_TEMPLATE, ncand, zero=False)
    cdef long long* ov = out.data.as_longlongs
    cdef Py_ssize_t n_out = 0

    cdef long long** tdocs = <long long**>malloc(nterms * sizeof(long long*))
    cdef long long** toffs = <long long**>malloc(nterms * sizeof(long long*))
    cdef long long** tflat = <long long**>malloc(nterms * sizeof(long long*))
    cdef Py_ssize_t* tlen = <Py_ssize_t*>malloc(nterms * sizeof(Py_ssize_t))
    if not (tdocs and toffs and tflat and tlen):
        free(tdocs); free(toffs); free(tflat); free(tlen)
        raise MemoryError
    cdef array.array buf_a = array.clone(_Q_TEMPLATE, 64, zero=False)
    cdef array.array kept_a = array.clone(_Q_TEMPLATE, 64, zero=False)
    cdef array.array obj
    cdef long long* cur
    cdef long long* kept
    cdef Py_ssize_t ci, row, i, j, kk, ncur, npos
    cdef long long doc, want, have, base
    try:
        for t in range(nterms):
            obj = <array.array?>(terms[t][0])
            tdocs[t] = obj.data.as_longlongs
            tlen[t] = len(obj)
            obj = <array.array?>(terms[t][1])
            toffs[t] = obj.data.as_longlongs
            obj = <array.array?>(terms[t][2])
            tflat[t] = obj.data.as_longlongs
        for ci in range(ncand):
            doc = cv[ci]
            row = _find_row(tdocs[0], tlen[0], doc)
            ncur = <Py_ssize_t>(toffs[0][row + 1] - toffs[0][row])
            if ncur > len(buf_a):
                array.resize_smart(buf_a, ncur)
                array.resize_smart(kept_a, ncur)
            cur = buf_a.data.as_longlongs
            kept = kept_a.data.as_longlongs
            base = toffs[0][row]
            for i in range(ncur):
                cur[i] = tflat[0][base + i]
            for t in range(1, nterms):
                row = _find_row(tdocs[t], tlen[t], doc)
                npos = <Py_ssize_t>(toffs[t][row + 1] - toffs[t][row])
                base = toffs[t][row]
                i = 0
                j = 0
                kk = 0
                while i < ncur and j < npos:
                    want = cur[i] + t
                    have = tflat[t][base + j]
                    if want == have:
                        kept[kk] = cur[i]
                        kk += 1
                        i += 1
                        j += 1
                    elif want < have:
                        i += 1
                    else:
                        j += 1
                ncur = kk
                for i in range(ncur):
                    cur[i] = kept[i]
                if ncur == 0:
                    break
            if ncur > 0:
                ov[n_out] = doc
                n_out += 1
    finally:
        free(tdocs); free(toffs); free(tflat); free(tlen)
    array.resize(out, n_out)
    return out


def bucket_counts(ts_values, ords, boundaries):
    """See pure.bucket_counts."""
    cdef array.array ts_a = <array.array?>ts_values
    cdef array.array bnd_a = <array.array?>boundaries
    cdef long long* ts = ts_a.data.as_longlongs
    cdef long long* bnd = bnd_a.data.as_longlongs
    cdef Py_ssize_t nb = len(bnd_a) - 1
    cdef array.array counts = array.clone(_Q_TEMPLATE, nb, zero=True)
    cdef long long* ccv = counts.data.as_longlongs
    cdef long long lo = bnd[0], hi = bnd[nb], v
    cdef Py_ssize_t j = 0, i, n
    cdef array.array ords_a
    cdef long long* osel
    if ords is None:
        n = len(ts_a)
        for i in range(n):
            v = ts[i]
            if v < lo or v >= hi:
                continue
            while v >= bnd[j + 1]:
                j += 1
            ccv[j] += 1
    else:
        ords_a = <array.array?>ords
        osel = ords_a.data.as_longlongs
        n = len(ords_a)
        for i in range(n):
            v = ts[osel[i]]
            if v < lo or v >= hi:
                continue
            while v >= bnd[j + 1]:
                j += 1
            ccv[j] += 1
    return counts
