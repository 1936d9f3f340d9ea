"""Command-line entry point wiring the whole pipeline.

Exit codes: 0 success, 1 operational failure, 2 usage error. Commands
that read paths or endpoint settings first consult an optional
`key = value` config file (--config), with explicit flags winning.
"""

from __future__ import annotations

import functools
import gzip
import json
import sys
from itertools import islice
from pathlib import Path
from typing import Optional

import click

from tweetvault import KERNEL_BACKEND, __version__, analytics, fetcher, planner
from tweetvault import idgen
from tweetvault.config import parse_kv_file
from tweetvault.dehydrator import dehydrate_dir
from tweetvault.mockhose import CorpusSpec, gen_tweet, load_spec
from tweetvault.search import (
    NotIndexedError,
    QuerySyntaxError,
    Searcher,
    build_indexes,
    parse_query,
)
from tweetvault.store import Archive, SegmentError, ingest_dir
from tweetvault.timeutil import iso_ms, parse_time_ms

_OPERATIONAL = (
    ValueError,
    OSError,
    NotIndexedError,
    SegmentError,
    QuerySyntaxError,
    fetcher.FetchAborted,
    fetcher.FatalResponse,
)


def _operational(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except BrokenPipeError:
            raise
        except _OPERATIONAL as e:
            raise click.ClickException(str(e)) from e

    return wrapper


def _load_config(path: Optional[str]) -> dict[str, str]:
    return parse_kv_file(path) if path else {}


def _setting(ctx, flag_value, key: str, default=None):
    if flag_value is not None:
        return flag_value
    return ctx.obj.get(key, default)


def _scope(from_, to_) -> Optional[tuple[int, int]]:
    if from_ is None and to_ is None:
        return None
    lo = parse_time_ms(from_) if from_ else -(2**62)
    hi = parse_time_ms(to_, end_of_day=True) if to_ else 2**62
    return lo, hi


@click.group()
@click.version_option(__version__, message=f"%(prog)s %(version)s (kernels: {KERNEL_BACKEND})")
@click.option("--config", type=click.Path(exists=True, dir_okay=False), default=None,
              help="key = value config file supplying defaults")
@click.pass_context
def cli(ctx, config):
    """Little searchable tweet-archive toolkit."""
    ctx.obj = _load_config(config)


def main():
    try:
        cli(prog_name="tweetvault")
    except BrokenPipeError:
        # downstream pipe (e.g. head) closed early; not an error
        try:
            sys.stdout.close()
        except OSError:
            pass
        sys.exit(0)


# -- ids ------------------------------------------------------------------


def _table_from(table_path: Optional[str]) -> idgen.RangeTable:
    if table_path:
        return idgen.RangeTable.parse(Path(table_path).read_text(encoding="utf-8"))
    return idgen.DEFAULT_TABLE


_POLICY = click.Choice([p.value for p in idgen.DedupPolicy])


@cli.group()
def ids():
    """Candidate id enumeration."""


@ids.command("count")
@click.option("--policy", type=_POLICY, default=idgen.DedupPolicy.DEDUP.value)
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--range", "range_spec", default=None,
              help="count START:END instead of the table")
@click.option("--format", "fmt", type=click.Choice(["plain", "json"]), default="plain")
@_operational
def ids_count(policy, table_path, range_spec, fmt):
    """Print how many candidate ids the table (or a raw range) yields."""
    policy = idgen.DedupPolicy(policy)
    if range_spec:
        start, _, end = range_spec.partition(":")
        count = idgen.count_full(int(start), int(end))
        source = f"range {range_spec}"
    else:
        count = _table_from(table_path).count(policy)
        source = "table"
    if fmt == "json":
        click.echo(json.dumps({"count": count, "policy": policy.value, "source": source}))
    else:
        click.echo(str(count))


@ids.command("emit")
@click.option("--policy", type=_POLICY, default=idgen.DedupPolicy.DEDUP.value)
@click.option("--table", "table_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--range", "range_spec", default=None)
@click.option("--shards", type=int, default=None, help="total number of shards")
@click.option("--shard-index", type=int, default=None)
@click.option("--limit", type=int, default=None)
@_operational
def ids_emit(policy, table_path, range_spec, shards, shard_index, limit):
    """Stream candidate ids, one decimal per line."""
    policy = idgen.DedupPolicy(policy)
    if (shards is None) != (shard_index is None):
        raise click.UsageError("--shards and --shard-index go together")
    if range_spec:
        start, _, end = range_spec.partition(":")
        stream = iter(idgen.iter_full(int(start), int(end)))
        if shards is not None:
            raise click.UsageError("sharding applies to tables, not --range")
    else:
        table = _table_from(table_path)
        if shards is not None:
            stream = idgen.iter_shard(table, shards, shard_index, policy)
        else:
            stream = table.iter_ids(policy)
    if limit is not None:
        stream = islice(stream, limit)
    out = click.get_text_stream("stdout")
    for i in stream:
        out.write(f"{i}\n")


# -- plan -----------------------------------------------------------------


@cli.group(invoke_without_command=True)
@click.option("--ids", "num_ids", type=int, default=None, help="ids to collect")
@click.option("--workers", type=int, default=1)
@click.option("--interval", type=float, default=5.0, help="seconds between requests")
@click.option("--batch", type=int, default=100)
@click.option("--format", "fmt", type=click.Choice(["human", "csv"]), default="human")
@click.pass_context
@_operational
def plan(ctx, num_ids, workers, interval, batch, fmt):
    """Collection throughput and duration arithmetic."""
    if ctx.invoked_subcommand is not None:
        return
    if num_ids is None:
        click.echo(ctx.get_help())
        return
    policy = planner.RatePolicy(batch_size=batch, min_interval=interval, workers=workers)
    per_day = planner.throughput_per_day(policy)
    days = planner.collection_days(num_ids, policy)
    if fmt == "csv":
        click.echo("ids,workers,interval_s,batch,tweets_per_day,days_exact,days_floor")
        click.echo(f"{num_ids},{workers},{interval},{batch},{per_day},{days.exact:.6f},{days.floor}")
    else:
        click.echo(f"throughput: {per_day:,} tweets/day "
                   f"({workers} worker(s), batch {batch}, every {interval:g} s)")
        click.echo(f"collection: {days.exact:,.2f} days exact, {days.floor:,} days rounded down")


@plan.command("storage")
@click.option("--tweets", "num_tweets", type=int, required=True)
@click.option("--format", "fmt", type=click.Choice(["human", "csv"]), default="human")
@_operational
def plan_storage(num_tweets, fmt):
    """Storage estimate; decimal units (1 GB = 10^9 bytes)."""
    compressed, decompressed = planner.storage_estimate(num_tweets)
    if fmt == "csv":
        click.echo("tweets,compressed_bytes,decompressed_bytes")
        click.echo(f"{num_tweets},{compressed:.0f},{decompressed:.0f}")
    else:
        click.echo(f"{num_tweets:,} tweets: {compressed / planner.GB:,.2f} GB compressed, "
                   f"{decompressed / planner.GB:,.2f} GB decompressed (decimal units)")


# -- mock -----------------------------------------------------------------


def _spec_from(path: Optional[str]) -> CorpusSpec:
    return load_spec(path) if path else CorpusSpec()


@cli.group()
def mock():
    """Deterministic stand-in for the lookup endpoint."""


@mock.command("serve")
@click.option("--port", type=int, default=8808)
@click.option("--host", default="127.0.0.1")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--interval", type=float, default=5.0)
@_operational
def mock_serve(port, host, spec_path, interval):
    """Serve the lookup endpoint until interrupted."""
    from tweetvault.mockhose.server import LOOKUP_PATH, make_server

    server = make_server(_spec_from(spec_path), interval, host, port)
    click.echo(f"serving on http://{host}:{server.server_port}{LOOKUP_PATH} "
               f"(interval {interval:g} s)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()


@mock.command("sample")
@click.option("--ids", "ids_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="file with one id per line")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="output file; .gz compresses; default stdout")
@_operational
def mock_sample(ids_path, spec_path, out_path):
    """Generate hydrated records offline for a list of ids."""
    spec = _spec_from(spec_path)
    lines = []
    for raw in Path(ids_path).read_text(encoding="utf-8").splitlines():
        raw = raw.strip()
        if not raw:
            continue
        tweet = gen_tweet(int(raw), spec)
        if tweet is not None:
            lines.append(json.dumps(tweet, ensure_ascii=False, separators=(",", ":")))
    payload = ("\n".join(lines) + "\n" if lines else "")
    if out_path is None:
        click.echo(payload, nl=False)
    elif out_path.endswith(".gz"):
        Path(out_path).write_bytes(gzip.compress(payload.encode("utf-8"), 6, mtime=0))
    else:
        Path(out_path).write_text(payload, encoding="utf-8")


# -- fetch ----------------------------------------------------------------


@cli.group()
def fetch():
    """Rate-limited bulk collection."""


@fetch.command("run")
@click.option("--endpoint", default=None)
@click.option("--token", default=None)
@click.option("--tokens", "tokens_path", type=click.Path(exists=True, dir_okay=False),
              help="file with one credential token per line (fleet mode)")
@click.option("--ids", "ids_path", type=click.Path(exists=True, dir_okay=False),
              help="candidate id file; default is the built-in table")
@click.option("--limit", type=int, default=None, help="take only the first N table ids")
@click.option("--interval", type=float, default=None)
@click.option("--batch", type=int, default=100)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--checkpoint", "checkpoint_dir", type=click.Path(file_okay=False), default=None)
@click.option("--workers", type=int, default=None,
              help="use only the first N tokens from --tokens")
@click.option("--log-missing", "missing_log", type=click.Path(dir_okay=False),
              default=None, help="append missing ids to this file (counts only otherwise)")
@click.pass_context
@_operational
def fetch_run(ctx, endpoint, token, tokens_path, ids_path, limit, interval, batch,
              out_dir, checkpoint_dir, workers, missing_log):
    """Collect candidate ids through the lookup endpoint."""
    endpoint = _setting(ctx, endpoint, "endpoint")
    if not endpoint:
        raise click.UsageError("--endpoint required (or set endpoint= in config)")
    interval = float(_setting(ctx, interval, "interval", 5.0))
    out_dir = Path(_setting(ctx, out_dir, "raw", "raw"))
    checkpoint_dir = Path(_setting(ctx, checkpoint_dir, "checkpoint", "checkpoint"))
    checkpoint_dir.mkdir(parents=True, exist_ok=True)

    tokens: list[str]
    if tokens_path:
        tokens = [t.strip() for t in Path(tokens_path).read_text().splitlines() if t.strip()]
        if workers is not None:
            tokens = tokens[:workers]
    else:
        token = _setting(ctx, token, "token")
        if not token:
            raise click.UsageError("--token or --tokens required")
        tokens = [token]

    if ids_path:
        candidates = [
            int(line)
            for line in Path(ids_path).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    elif limit is not None:
        candidates = list(islice(idgen.DEFAULT_TABLE.iter_ids(), limit))
    else:
        candidates = idgen.DEFAULT_TABLE  # streamed per shard

    credentials = [fetcher.Credential(t, interval) for t in tokens]
    if len(credentials) == 1 and not isinstance(candidates, idgen.RangeTable):
        sink = fetcher.RecordSink(out_dir, "000")
        report = fetcher.run(
            candidates, credentials[0], sink,
            checkpoint_dir / "worker-000.json",
            fetcher.HttpTransport(endpoint, credentials[0].token),
            batch_size=batch,
        )
    else:
        report = fetcher.run_fleet(
            candidates, credentials,
            lambda wid: fetcher.RecordSink(out_dir, wid),
            checkpoint_dir,
            lambda cred: fetcher.HttpTransport(endpoint, cred.token),
            batch_size=batch,
            parallel=len(credentials) > 1,
        )
    click.echo(f"batches: {report.batches_done}")
    click.echo(f"found: {report.found}")
    click.echo(f"missing: {report.missing}")
    click.echo(f"throttled: {report.throttle_events}")
    click.echo(f"wall: {report.wall_seconds:.1f}s")


# -- pipeline stages ------------------------------------------------------


@cli.command("dehydrate")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
@_operational
def dehydrate_cmd(in_dir, out_dir):
    """Reduce hydrated records to the 8-field schema."""
    kept, rejected = dehydrate_dir(Path(in_dir), Path(out_dir))
    click.echo(f"dehydrated {kept} records ({rejected} rejected)")


@cli.command("ingest")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--archive", "archive_dir", type=click.Path(file_okay=False), default=None)
@click.pass_context
@_operational
def ingest_cmd(ctx, in_dir, archive_dir):
    """Load dehydrated records into the partitioned archive."""
    archive_dir = Path(_setting(ctx, archive_dir, "archive", "archive"))
    archive = Archive(archive_dir)
    n = ingest_dir(Path(in_dir), archive)
    quarantined = archive.quarantine_count()
    click.echo(f"ingested {n} records into {archive_dir}"
               + (f" ({quarantined} quarantined)" if quarantined else ""))


@cli.group("archive")
def archive_group():
    """Archive inspection."""


@archive_group.command("stats")
@click.option("--archive", "archive_dir", type=click.Path(exists=True, file_okay=False),
              default=None)
@click.option("--format", "fmt", type=click.Choice(["human", "csv", "json"]), default="human")
@click.pass_context
@_operational
def archive_stats(ctx, archive_dir, fmt):
    """Per-partition record counts and time extents."""
    archive_dir = Path(_setting(ctx, archive_dir, "archive", "archive"))
    stats = Archive(archive_dir).stats()
    if fmt == "json":
        click.echo(json.dumps(stats))
    elif fmt == "csv":
        click.echo("partition,segments,records,min_ts,max_ts")
        for s in stats:
            click.echo(f"{s['partition']},{s['segments']},{s['records']},{s['min_ts']},{s['max_ts']}")
    else:
        total = sum(s["records"] for s in stats)
        for s in stats:
            click.echo(f"{s['partition']}: {s['records']} records, {s['segments']} segments")
        click.echo(f"total: {total} records in {len(stats)} partitions")


@cli.command("index")
@click.option("--archive", "archive_dir", type=click.Path(exists=True, file_okay=False),
              default=None)
@click.option("--index", "index_dir", type=click.Path(file_okay=False), default=None)
@click.option("--partition", "partitions", multiple=True,
              help="index only these partition labels")
@click.pass_context
@_operational
def index_cmd(ctx, archive_dir, index_dir, partitions):
    """Build (or rebuild) partition indexes."""
    archive_dir = Path(_setting(ctx, archive_dir, "archive", "archive"))
    index_dir = Path(_setting(ctx, index_dir, "index", "index"))
    archive = Archive(archive_dir)
    metas = build_indexes(archive, index_dir, partitions or None)
    for meta in metas:
        click.echo(f"indexed {meta['partition']}: {meta['doc_count']} docs, "
                   f"{meta['term_count']} terms")


# -- search and analytics --------------------------------------------------


def _searcher(ctx, index_dir, archive_dir) -> Searcher:
    index_dir = Path(_setting(ctx, index_dir, "index", "index"))
    archive_dir = _setting(ctx, archive_dir, "archive")
    archive = Archive(archive_dir) if archive_dir and Path(archive_dir).exists() else None
    return Searcher(index_dir, archive)


@cli.command("search")
@click.option("--query", "query_text", required=True)
@click.option("--from", "from_", default=None, help="ISO date/datetime or epoch ms")
@click.option("--to", "to_", default=None)
@click.option("--limit", type=int, default=None)
@click.option("--count-only", is_flag=True)
@click.option("--bucket", type=click.Choice(["day", "week", "month"]), default=None)
@click.option("--index", "index_dir", type=click.Path(file_okay=False), default=None)
@click.option("--archive", "archive_dir", type=click.Path(file_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(["tsv", "csv", "json"]), default="tsv")
@click.pass_context
@_operational
def search_cmd(ctx, query_text, from_, to_, limit, count_only, bucket,
               index_dir, archive_dir, fmt):
    """Run a boolean/phrase query; results newest first."""
    q = parse_query(query_text)
    scope = _scope(from_, to_)
    searcher = _searcher(ctx, index_dir, archive_dir)
    try:
        if count_only or bucket:
            if bucket:
                counts = searcher.count_by_bucket(q, bucket, scope)
                sep = "," if fmt != "tsv" else "\t"
                click.echo(sep.join(["bucket_start", "count"]))
                for b in sorted(counts):
                    click.echo(f"{iso_ms(b)}{sep}{counts[b]}")
            else:
                click.echo(str(searcher.count_total(q, scope)))
            return
        rows = searcher.execute(q, scope, limit)
        if fmt == "json":
            for r in rows:
                click.echo(json.dumps(
                    {"timestamp": r.timestamp, "id": r.id_str, "text": r.text,
                     "partition": r.partition}, ensure_ascii=False))
        else:
            sep = "\t" if fmt == "tsv" else ","
            for r in rows:
                text = r.text.replace("\t", " ").replace("\n", " ") if fmt == "tsv" else r.text
                click.echo(f"{iso_ms(r.timestamp)}{sep}{r.id_str}{sep}{text}")
    finally:
        searcher.close()


@cli.command("trend")
@click.option("--query", "query_text", required=True)
@click.option("--bucket", type=click.Choice(["day", "week", "month"]), default="week")
@click.option("--from", "from_", default=None)
@click.option("--to", "to_", default=None)
@click.option("--index", "index_dir", type=click.Path(file_okay=False), default=None)
@click.option("--archive", "archive_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_operational
def trend_cmd(ctx, query_text, bucket, from_, to_, index_dir, archive_dir, out_path):
    """Per-mille trend series as CSV."""
    q = parse_query(query_text)
    searcher = _searcher(ctx, index_dir, archive_dir)
    try:
        rows = analytics.trend(searcher, q, bucket, _scope(from_, to_))
    finally:
        searcher.close()
    _write_csv(out_path, analytics.write_trend_csv, rows)


@cli.command("volume")
@click.option("--bucket", type=click.Choice(["day", "week", "month"]), default="week")
@click.option("--from", "from_", default=None)
@click.option("--to", "to_", default=None)
@click.option("--index", "index_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_operational
def volume_cmd(ctx, bucket, from_, to_, index_dir, out_path):
    """Raw tweet volume per bucket as CSV."""
    searcher = _searcher(ctx, index_dir, None)
    try:
        rows = analytics.volume(searcher, bucket, _scope(from_, to_))
    finally:
        searcher.close()
    _write_csv(out_path, analytics.write_volume_csv, rows)


@cli.command("actions")
@click.option("--top", "k", type=int, default=20)
@click.option("--from", "from_", default=None)
@click.option("--to", "to_", default=None)
@click.option("--index", "index_dir", type=click.Path(file_okay=False), default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_operational
def actions_cmd(ctx, k, from_, to_, index_dir, out_path):
    """Most frequent "-ing" tokens as CSV."""
    searcher = _searcher(ctx, index_dir, None)
    try:
        rows = analytics.top_actions(searcher, k, _scope(from_, to_))
    finally:
        searcher.close()
    _write_csv(out_path, analytics.write_actions_csv, rows)


@cli.command("urls")
@click.option("--archive", "archive_dir", type=click.Path(exists=True, file_okay=False),
              default=None)
@click.option("--from", "from_", default=None)
@click.option("--to", "to_", default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@_operational
def urls_cmd(ctx, archive_dir, from_, to_, out_path):
    """URL carriage rate and domain ranking (scan-based)."""
    archive_dir = Path(_setting(ctx, archive_dir, "archive", "archive"))
    stats = analytics.url_stats(Archive(archive_dir), _scope(from_, to_))
    click.echo(f"tweets: {stats.tweets_total}")
    click.echo(f"with url: {stats.tweets_with_url} ({stats.fraction_with_url:.1%})")
    _write_csv(out_path, analytics.write_urls_csv, stats)


def _write_csv(out_path, writer, payload):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            writer(payload, fh)
        click.echo(f"wrote {out_path}")
    else:
        writer(payload, click.get_text_stream("stdout"))


# -- demo -----------------------------------------------------------------


@cli.command("demo")
@click.option("--seed", type=int, default=42)
@click.option("--ids", "n_ids", type=int, default=100_000)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="demo-out")
@click.option("--interval", type=float, default=0.0,
              help="request interval; 0 runs the rehearsal at full speed")
@_operational
def demo_cmd(seed, n_ids, out_dir, interval):
    """Full pipeline rehearsal against the mock endpoint."""
    from tweetvault.demo import DemoStageError, run_demo

    try:
        ok, report_path = run_demo(seed, n_ids, Path(out_dir), interval, echo=click.echo)
    except DemoStageError as e:
        raise click.ClickException(str(e)) from e
    click.echo(Path(report_path).read_text(encoding="utf-8"), nl=False)
    if not ok:
        raise click.ClickException("demo checks failed")


if __name__ == "__main__":
    main()
