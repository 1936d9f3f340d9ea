"""Hot-kernel backend selection.

Imports the compiled extension when present, otherwise the pure-Python
fallback. Set TWEETVAULT_PURE=1 to force the fallback regardless.
"""

import os

if os.environ.get("TWEETVAULT_PURE") == "1":
    from tweetvault._kernels import pure as _impl

    BACKEND = "pure"
else:
    try:
        from tweetvault._kernels import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        from tweetvault._kernels import pure as _impl  # type: ignore[no-redef]

        BACKEND = "pure"

tokenize = _impl.tokenize
encode_uvarint = _impl.encode_uvarint
encode_term_postings = _impl.encode_term_postings
decode_doc_ids = _impl.decode_doc_ids
decode_postings = _impl.decode_postings
intersect_sorted = _impl.intersect_sorted
union_sorted_many = _impl.union_sorted_many
phrase_match = _impl.phrase_match
bucket_counts = _impl.bucket_counts
