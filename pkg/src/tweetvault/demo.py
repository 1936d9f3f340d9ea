"""End-to-end rehearsal at desk scale.

Enumerates candidate ids, serves them from an in-process mock endpoint
over real HTTP, collects, dehydrates, ingests, indexes, then runs a fixed
query battery cross-checked against the scan reference. The written
report.txt is deterministic for a given (seed, n_ids); wall-clock timings
go to the console only.
"""

from __future__ import annotations

import math
import shutil
import time
from pathlib import Path
from typing import Callable

from tweetvault import fetcher
from tweetvault.dehydrator import dehydrate_dir
from tweetvault.idgen import DEFAULT_TABLE
from tweetvault.mockhose import STOPWORDS_EN, CorpusSpec
from tweetvault.mockhose.server import start_server
from tweetvault.search import ScanOracle, Searcher, build_indexes, parse_query
from tweetvault.store import Archive, ingest_dir

BATTERY = (
    "obama",
    "twitter",
    '"eating a sandwich"',
    '"justin bieber"',
    "mccain OR palin",
    "watching tonight",
    "obama from:2006-07-01 to:2009-07-31",
    " OR ".join(STOPWORDS_EN),
)


class DemoStageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"demo stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def run_demo(
    seed: int,
    n_ids: int,
    out_dir: Path,
    interval: float = 0.0,
    echo: Callable[[str], None] = print,
) -> tuple[bool, Path]:
    """Returns (all checks passed, path to report.txt)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    raw_dir = out_dir / "raw"
    dehydrated_dir = out_dir / "dehydrated"
    archive_dir = out_dir / "archive"
    index_dir = out_dir / "index"
    # the demo owns its output directory; previous runs are replaced
    for sub in (raw_dir, dehydrated_dir, archive_dir, index_dir):
        if sub.exists():
            shutil.rmtree(sub)
    (out_dir / "checkpoint.json").unlink(missing_ok=True)
    report_lines: list[str] = []
    checks: list[tuple[str, bool, str]] = []
    t_start = time.monotonic()

    def stage(name: str):
        echo(f"[demo] stage {name} ({time.monotonic() - t_start:.1f}s elapsed)")
        return name

    spec = CorpusSpec(seed=seed)

    name = stage("mock")
    try:
        server, _, endpoint = start_server(spec, min_interval=interval)
    except Exception as e:
        raise DemoStageError(name, e) from e

    try:
        name = stage("fetch")
        try:
            candidates = []
            for i in DEFAULT_TABLE.iter_ids():
                candidates.append(i)
                if len(candidates) >= n_ids:
                    break
            sink = fetcher.RecordSink(raw_dir, "000")
            report = fetcher.run(
                candidates,
                fetcher.Credential(token="demo", min_interval=interval),
                sink,
                out_dir / "checkpoint.json",
                fetcher.HttpTransport(endpoint, "demo"),
            )
        except Exception as e:
            raise DemoStageError(name, e) from e
    finally:
        server.shutdown()

    found_rate = report.found_rate
    # statistical tolerance for small demos, fixed 0.01 for big ones
    rate_tol = max(0.01, 4 * math.sqrt(0.647 * 0.353 / max(report.ids_requested, 1)))
    checks.append(
        (
            "found rate near existence rate",
            abs(found_rate - spec.existence_rate) <= rate_tol,
            f"{found_rate:.4f} vs {spec.existence_rate} ± {rate_tol:.4f}",
        )
    )

    name = stage("dehydrate")
    try:
        kept, rejected = dehydrate_dir(raw_dir, dehydrated_dir)
    except Exception as e:
        raise DemoStageError(name, e) from e
    checks.append(("no records rejected", rejected == 0, f"rejected={rejected}"))

    name = stage("ingest")
    try:
        archive = Archive(archive_dir)
        ingested = ingest_dir(dehydrated_dir, archive)
    except Exception as e:
        raise DemoStageError(name, e) from e
    checks.append(
        ("ingest preserved record count", ingested == kept == report.found,
         f"found={report.found} kept={kept} ingested={ingested}")
    )

    name = stage("index")
    try:
        build_indexes(archive, index_dir)
    except Exception as e:
        raise DemoStageError(name, e) from e

    name = stage("battery")
    try:
        searcher = Searcher(index_dir, archive)
        oracle = ScanOracle(archive)
        battery_rows = []
        for qtext in BATTERY:
            q = parse_query(qtext)
            got = [(r.id_str, r.timestamp, r.text) for r in searcher.execute(q)]
            want = [(r.id_str, r.timestamp, r.text) for r in oracle.search(q)]
            ok = got == want
            label = qtext if len(qtext) <= 40 else qtext[:37] + "..."
            battery_rows.append((label, len(got), len(want), ok))
            checks.append((f"battery: {label}", ok, f"{len(got)} hits"))
        searcher.close()
    except Exception as e:
        raise DemoStageError(name, e) from e

    ok_all = all(ok for _, ok, _ in checks)

    report_lines.append("demo report")
    report_lines.append(f"seed: {seed}")
    report_lines.append(f"candidate ids: {report.ids_requested}")
    report_lines.append(f"batches: {report.batches_done}")
    report_lines.append(f"found: {report.found}")
    report_lines.append(f"missing: {report.missing}")
    report_lines.append(f"found rate: {found_rate:.4f}")
    report_lines.append(f"dehydrated: {kept} (rejected {rejected})")
    report_lines.append(f"ingested: {ingested}")
    report_lines.append("partitions:")
    for row in archive.stats():
        report_lines.append(
            f"  {row['partition']}: {row['records']} records in {row['segments']} segments"
        )
    report_lines.append("query battery (hits / scan hits / verdict):")
    for label, got_n, want_n, ok in battery_rows:
        verdict = "ok" if ok else "MISMATCH"
        report_lines.append(f"  {label}: {got_n} / {want_n} / {verdict}")
    report_lines.append("checks:")
    for label, ok, detail in checks:
        report_lines.append(f"  [{'pass' if ok else 'FAIL'}] {label}: {detail}")
    report_lines.append(f"result: {'PASS' if ok_all else 'FAIL'}")

    report_path = out_dir / "report.txt"
    report_path.write_text("\n".join(report_lines) + "\n", encoding="utf-8")
    echo(f"[demo] finished in {time.monotonic() - t_start:.1f}s "
         f"({'PASS' if ok_all else 'FAIL'}), report at {report_path}")
    return ok_all, report_path
