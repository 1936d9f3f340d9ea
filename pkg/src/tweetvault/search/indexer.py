"""Per-partition inverted index construction.

Documents get ordinals in (timestamp, id) scan order, so an ordinal range
is also a time range and reverse-ordinal output is reverse-chronological.
Layout per partition directory:

    meta.json       doc_count, time extent, format version
    terms.tsv       token, doc frequency, postings offset, postings length
    postings.bin    per term: varint-coded doc deltas, then positions
    docs.ts.bin     int64 timestamp per ordinal
    docs.id.bin     int64 tweet id per ordinal
    docs.text.off   int64 byte offsets (doc_count + 1) into docs.text.bin
    docs.text.bin   raw UTF-8 text, concatenated

Rebuilds are deterministic byte for byte and replace the old directory
atomically.
"""

from __future__ import annotations

import json
import os
import shutil
from array import array
from pathlib import Path
from typing import Iterable, Optional, Union

from tweetvault import _kernels
from tweetvault.store import Archive, PartitionKey

INDEX_FORMAT = 1


def build_partition_index(
    archive: Archive, key: Union[PartitionKey, str], index_root: Union[str, Path]
) -> dict:
    """Index one flushed partition; returns its meta dict."""
    label = key if isinstance(key, str) else key.label
    index_root = Path(index_root)
    index_root.mkdir(parents=True, exist_ok=True)

    ts = array("q")
    ids = array("q")
    offsets = array("q", [0])
    texts = bytearray()
    postings: dict[str, list[int]] = {}
    tokenize = _kernels.tokenize

    prev_key = (-(2**62), -1)
    ordinal = 0
    for rec in archive.scan_partition(label):
        doc_key = (rec.timestamp, int(rec.id_str))
        if doc_key < prev_key:
            raise AssertionError(f"scan order violated in partition {label}")
        prev_key = doc_key
        ts.append(rec.timestamp)
        ids.append(doc_key[1])
        raw = rec.text.encode("utf-8")
        texts.extend(raw)
        offsets.append(offsets[-1] + len(raw))
        seen: dict[str, list[int]] = {}
        for pos, tok in enumerate(tokenize(rec.text)):
            bucket = seen.get(tok)
            if bucket is None:
                seen[tok] = [pos]
            else:
                bucket.append(pos)
        for tok, positions in seen.items():
            flat = postings.get(tok)
            if flat is None:
                flat = postings[tok] = []
            flat.append(ordinal)
            flat.append(len(positions))
            flat.extend(positions)
        ordinal += 1

    encode = _kernels.encode_term_postings
    postings_buf = bytearray()
    term_lines = []
    for tok in sorted(postings):
        flat = postings[tok]
        df = 0
        i = 0
        while i < len(flat):
            df += 1
            i += 2 + flat[i + 1]
        blob = encode(flat)
        term_lines.append(f"{tok}\t{df}\t{len(postings_buf)}\t{len(blob)}\n")
        postings_buf.extend(blob)

    meta = {
        "format": INDEX_FORMAT,
        "partition": label,
        "doc_count": ordinal,
        "term_count": len(term_lines),
        "min_ts": ts[0] if ordinal else 0,
        "max_ts": ts[-1] if ordinal else 0,
    }

    final_dir = index_root / label
    tmp_dir = index_root / (label + ".building")
    if tmp_dir.exists():
        shutil.rmtree(tmp_dir)
    tmp_dir.mkdir()
    (tmp_dir / "terms.tsv").write_text("".join(term_lines), encoding="utf-8")
    (tmp_dir / "postings.bin").write_bytes(bytes(postings_buf))
    (tmp_dir / "docs.ts.bin").write_bytes(ts.tobytes())
    (tmp_dir / "docs.id.bin").write_bytes(ids.tobytes())
    (tmp_dir / "docs.text.off").write_bytes(offsets.tobytes())
    (tmp_dir / "docs.text.bin").write_bytes(bytes(texts))
    (tmp_dir / "meta.json").write_text(
        json.dumps(meta, sort_keys=True) + "\n", encoding="utf-8"
    )

    if final_dir.exists():
        old_dir = index_root / (label + ".old")
        if old_dir.exists():
            shutil.rmtree(old_dir)
        os.rename(final_dir, old_dir)
        os.rename(tmp_dir, final_dir)
        shutil.rmtree(old_dir)
    else:
        os.rename(tmp_dir, final_dir)
    return meta


def build_indexes(
    archive: Archive,
    index_root: Union[str, Path],
    keys: Optional[Iterable[Union[PartitionKey, str]]] = None,
) -> list[dict]:
    """Index the given partitions, or every partition holding data."""
    if keys is None:
        keys = archive.partitions()
    return [build_partition_index(archive, key, index_root) for key in keys]
