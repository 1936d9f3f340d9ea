"""Rate-limited, resumable bulk collection client.

One logical worker drives one credential: ids flow in batches of up to
100 through a transport, request starts are spaced at least
`min_interval` apart (response latency earns no credit), found records
append to a rolling gzip sink, and a checkpoint is atomically replaced
after every batch so a crash costs at most one re-requested batch.

Throttle responses sleep out the advertised retry-after and re-issue the
same batch; transport failures back off exponentially (1 s base, 60 s
cap, 8 tries) and then abort, leaving a resumable checkpoint behind.
"""

from __future__ import annotations

import gzip
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol, Sequence, Union

import requests

from tweetvault.idgen import DedupPolicy, RangeTable, batched, iter_shard, shard_bounds

BACKOFF_BASE = 1.0
BACKOFF_CAP = 60.0
MAX_TRANSPORT_TRIES = 8
SINK_ROLL_RECORDS = 5_000_000


class ThrottledResponse(Exception):
    def __init__(self, retry_after: float):
        super().__init__(f"throttled; retry after {retry_after}s")
        self.retry_after = retry_after


class TransportError(Exception):
    """Transient failure worth retrying with backoff."""


class FatalResponse(Exception):
    """The endpoint rejected the request outright; retrying cannot help."""


class FetchAborted(Exception):
    def __init__(self, report: "FetchReport", cause: Exception):
        super().__init__(f"fetch aborted after repeated transport failures: {cause}")
        self.report = report
        self.cause = cause


class Clock(Protocol):
    def now(self) -> float: ...
    def sleep(self, seconds: float) -> None: ...


class RealClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds)


class SimulatedClock:
    """Deterministic clock for tests; sleeping just advances time."""

    def __init__(self, start: float = 0.0):
        self._now = start

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self._now += seconds


@dataclass(frozen=True)
class Credential:
    token: str
    min_interval: float = 5.0

    def __post_init__(self) -> None:
        if self.min_interval < 0:
            raise ValueError("min_interval must be >= 0")


@dataclass
class FetchReport:
    batches_done: int = 0
    found: int = 0
    missing: int = 0
    throttle_events: int = 0
    wall_seconds: float = 0.0

    @property
    def ids_requested(self) -> int:
        return self.found + self.missing

    @property
    def found_rate(self) -> float:
        return self.found / self.ids_requested if self.ids_requested else 0.0


@dataclass
class Checkpoint:
    worker_id: str = "000"
    next_batch_index: int = 0
    ids_requested: int = 0
    tweets_stored: int = 0
    last_update: int = 0
    throttle_events: int = 0
    sink_part: int = 0
    sink_offset: int = 0
    sink_records_in_part: int = 0
    missing_log_offset: int = 0

    @classmethod
    def load(cls, path: Union[str, Path]) -> Optional["Checkpoint"]:
        path = Path(path)
        if not path.exists():
            return None
        return cls(**json.loads(path.read_text(encoding="utf-8")))

    def save(self, path: Union[str, Path]) -> None:
        path = Path(path)
        tmp = path.parent / (path.name + ".tmp")
        tmp.write_text(json.dumps(self.__dict__, sort_keys=True), encoding="utf-8")
        os.replace(tmp, path)


class Transport(Protocol):
    def lookup(self, ids: Sequence[int]) -> list[dict]: ...


class HttpTransport:
    """Lookup over HTTP: form-encoded id list, bearer-token credential."""

    def __init__(self, endpoint: str, token: str, timeout: float = 30.0,
                 session: Optional[requests.Session] = None):
        self.endpoint = endpoint
        self.token = token
        self.timeout = timeout
        self.session = session or requests.Session()

    def lookup(self, ids: Sequence[int]) -> list[dict]:
        try:
            resp = self.session.post(
                self.endpoint,
                data={"id": ",".join(str(i) for i in ids)},
                headers={"Authorization": f"Bearer {self.token}"},
                timeout=self.timeout,
            )
        except requests.RequestException as e:
            raise TransportError(str(e)) from e
        if resp.status_code == 429:
            try:
                retry_after = float(resp.headers.get("Retry-After", "1"))
            except ValueError:
                retry_after = 1.0
            raise ThrottledResponse(retry_after)
        if 500 <= resp.status_code < 600:
            raise TransportError(f"server error {resp.status_code}")
        if resp.status_code != 200:
            raise FatalResponse(f"status {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()
        except ValueError as e:
            raise TransportError(f"garbled response body: {e}") from e


class RecordSink:
    """Rolling gzip ndjson files, one gzip member per appended batch.

    Member-per-batch writes make the file a valid concatenated gzip
    stream whose byte length at every batch boundary is reproducible,
    so resume-after-crash can truncate back to the last checkpointed
    offset and continue byte-identically.
    """

    def __init__(self, directory: Union[str, Path], worker_id: str = "000",
                 roll_records: int = SINK_ROLL_RECORDS):
        self.dir = Path(directory)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.worker_id = worker_id
        self.roll_records = roll_records
        self.part = 0
        self.offset = 0
        self.records_in_part = 0
        self._fh = None

    def _part_path(self, part: int) -> Path:
        return self.dir / f"worker-{self.worker_id}-part-{part:04d}.ndjson.gz"

    def restore(self, part: int, offset: int, records_in_part: int) -> None:
        """Truncate back to a checkpointed position, dropping later parts."""
        self.close()
        for existing in sorted(self.dir.glob(f"worker-{self.worker_id}-part-*.ndjson.gz")):
            idx = int(existing.stem.split("-part-")[1].split(".")[0])
            if idx > part:
                existing.unlink()
        path = self._part_path(part)
        if not path.exists():
            path.touch()
        with open(path, "r+b") as fh:
            fh.truncate(offset)
        self.part = part
        self.offset = offset
        self.records_in_part = records_in_part

    def _handle(self):
        if self._fh is None:
            self._fh = open(self._part_path(self.part), "ab")
        return self._fh

    def append_batch(self, records: Sequence[dict]) -> None:
        todo = list(records)
        while todo:
            space = self.roll_records - self.records_in_part
            chunk, todo = todo[:space], todo[space:]
            payload = "".join(
                json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n"
                for r in chunk
            ).encode("utf-8")
            member = gzip.compress(payload, 6, mtime=0)
            fh = self._handle()
            fh.write(member)
            fh.flush()
            self.offset += len(member)
            self.records_in_part += len(chunk)
            if self.records_in_part >= self.roll_records:
                self.close()
                self.part += 1
                self.offset = 0
                self.records_in_part = 0

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def read_sink_records(directory: Union[str, Path]):
    """Iterate every hydrated record written by sinks in a directory."""
    for path in sorted(Path(directory).glob("*.ndjson.gz")):
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)


def run(
    candidates: Iterable[int],
    credential: Credential,
    sink: RecordSink,
    checkpoint_path: Union[str, Path],
    transport: Transport,
    clock: Optional[Clock] = None,
    batch_size: int = 100,
    missing_log: Union[str, Path, None] = None,
) -> FetchReport:
    """Drive every candidate id through the transport exactly once.

    Progress persists in `checkpoint_path`; calling again with the same
    arguments resumes where the previous run stopped and leaves the sink
    byte-identical to an uninterrupted run. Missing ids are counted only,
    unless `missing_log` names a file to append them to (a third of the
    full id space would be a very large artifact to write by accident).
    """
    clock = clock or RealClock()
    cp = Checkpoint.load(checkpoint_path) or Checkpoint(worker_id=sink.worker_id)
    sink.restore(cp.sink_part, cp.sink_offset, cp.sink_records_in_part)

    missing_fh = None
    if missing_log is not None:
        missing_path = Path(missing_log)
        if not missing_path.exists():
            missing_path.touch()
        with open(missing_path, "r+b") as fh:
            fh.truncate(cp.missing_log_offset)
        missing_fh = open(missing_path, "ab")

    # counts are cumulative across restarts; wall_seconds covers this run
    report = FetchReport(
        batches_done=cp.next_batch_index,
        found=cp.tweets_stored,
        missing=cp.ids_requested - cp.tweets_stored,
        throttle_events=cp.throttle_events,
    )
    started = clock.now()
    last_start: Optional[float] = None

    for index, batch in enumerate(batched(candidates, batch_size)):
        if index < cp.next_batch_index:
            continue
        tries = 0
        while True:
            if last_start is not None:
                remaining = credential.min_interval - (clock.now() - last_start)
                if remaining > 0:
                    clock.sleep(remaining)
            last_start = clock.now()
            try:
                records = transport.lookup(batch)
                break
            except ThrottledResponse as e:
                report.throttle_events += 1
                cp.throttle_events += 1
                clock.sleep(e.retry_after)
            except TransportError as e:
                tries += 1
                if tries >= MAX_TRANSPORT_TRIES:
                    report.wall_seconds = clock.now() - started
                    if missing_fh is not None:
                        missing_fh.close()
                    sink.close()
                    raise FetchAborted(report, e) from e
                clock.sleep(min(BACKOFF_BASE * 2 ** (tries - 1), BACKOFF_CAP))
        sink.append_batch(records)
        if missing_fh is not None:
            got = {r["id"] for r in records}
            missed = [i for i in batch if i not in got]
            if missed:
                missing_fh.write("".join(f"{i}\n" for i in missed).encode("ascii"))
                missing_fh.flush()
            cp.missing_log_offset = missing_fh.tell()
        report.batches_done += 1
        report.found += len(records)
        report.missing += len(batch) - len(records)
        cp.next_batch_index = index + 1
        cp.ids_requested += len(batch)
        cp.tweets_stored += len(records)
        cp.last_update = int(time.time() * 1000)
        cp.sink_part = sink.part
        cp.sink_offset = sink.offset
        cp.sink_records_in_part = sink.records_in_part
        cp.save(checkpoint_path)

    if missing_fh is not None:
        missing_fh.close()
    sink.close()
    report.wall_seconds = clock.now() - started
    return report


def run_fleet(
    candidates: Union[RangeTable, Sequence[int]],
    credentials: Sequence[Credential],
    sink_factory: Callable[[str], RecordSink],
    checkpoint_dir: Union[str, Path],
    transport_factory: Callable[[Credential], Transport],
    clock_factory: Optional[Callable[[], Clock]] = None,
    batch_size: int = 100,
    policy: DedupPolicy = DedupPolicy.DEDUP,
    parallel: bool = False,
) -> FetchReport:
    """One worker per credential over disjoint contiguous id shards.

    Workers share nothing; with the default sequential execution each
    gets its own clock and the aggregate wall time is the slowest
    worker's, which models concurrent deployment. `parallel=True` runs
    real threads instead (real clocks only).
    """
    if not credentials:
        raise ValueError("at least one credential required")
    checkpoint_dir = Path(checkpoint_dir)
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    n = len(credentials)

    def shard(k: int) -> Iterable[int]:
        if isinstance(candidates, RangeTable):
            return iter_shard(candidates, n, k, policy)
        bounds = shard_bounds(len(candidates), n)
        lo, hi = bounds[k]
        return candidates[lo:hi]

    def one(k: int) -> FetchReport:
        worker_id = f"{k:03d}"
        clock = clock_factory() if clock_factory else RealClock()
        return run(
            shard(k),
            credentials[k],
            sink_factory(worker_id),
            checkpoint_dir / f"worker-{worker_id}.json",
            transport_factory(credentials[k]),
            clock,
            batch_size,
        )

    reports: list[FetchReport] = []
    failures: list[Exception] = []
    if parallel and n > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n) as pool:
            futures = [pool.submit(one, k) for k in range(n)]
            for fut in futures:
                try:
                    reports.append(fut.result())
                except FetchAborted as e:
                    failures.append(e)
                    reports.append(e.report)
    else:
        for k in range(n):
            try:
                reports.append(one(k))
            except FetchAborted as e:
                failures.append(e)
                reports.append(e.report)

    total = FetchReport(
        batches_done=sum(r.batches_done for r in reports),
        found=sum(r.found for r in reports),
        missing=sum(r.missing for r in reports),
        throttle_events=sum(r.throttle_events for r in reports),
        wall_seconds=max((r.wall_seconds for r in reports), default=0.0),
    )
    if failures:
        raise FetchAborted(total, failures[0])
    return total
