"""HTTP face of the mock corpus: the batched lookup endpoint.

POST /1.1/statuses/lookup.json with form field `id` (comma-separated
decimal ids, at most 100) returns a JSON array of the existing tweets in
request order; missing ids are silently omitted just like the original
endpoint. Each bearer token is its own credential and gets one request
per `min_interval` seconds; violations get 429 with a Retry-After header.
"""

from __future__ import annotations

import json
import math
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Optional
from urllib.parse import parse_qs

from tweetvault.mockhose import CorpusSpec, gen_tweet, is_clamped

LOOKUP_PATH = "/1.1/statuses/lookup.json"
MAX_LOOKUP_IDS = 100


class LookupError_(Exception):
    """Base for lookup request failures."""


class BadRequest(LookupError_):
    pass


class RequestTooLarge(LookupError_):
    pass


class Throttled(LookupError_):
    def __init__(self, retry_after: float):
        super().__init__(f"throttled, retry after {retry_after:.3f}s")
        self.retry_after = retry_after


class RateGate:
    """Per-credential spacing of request starts; the only shared state."""

    def __init__(self, min_interval: float, clock: Callable[[], float] = time.monotonic):
        self.min_interval = min_interval
        self.clock = clock
        self._last: dict[str, float] = {}
        self._lock = threading.Lock()

    def admit(self, token: str) -> None:
        """Record a request start or raise Throttled with the wait left."""
        if self.min_interval <= 0:
            return
        with self._lock:
            now = self.clock()
            last = self._last.get(token)
            if last is not None and now - last < self.min_interval:
                raise Throttled(self.min_interval - (now - last))
            self._last[token] = now


class LookupService:
    """Transport-independent implementation of the lookup contract."""

    def __init__(
        self,
        spec: CorpusSpec,
        min_interval: float = 5.0,
        clock: Callable[[], float] = time.monotonic,
    ):
        self.spec = spec
        self.gate = RateGate(min_interval, clock)

    def lookup(self, ids: list[int], token: str) -> tuple[list[dict], int]:
        """Existing tweets among `ids`, order preserved, plus clamp count."""
        if len(ids) == 0:
            raise BadRequest("no ids given")
        if len(ids) > MAX_LOOKUP_IDS:
            raise RequestTooLarge(f"{len(ids)} ids exceeds the {MAX_LOOKUP_IDS} cap")
        for i in ids:
            if not isinstance(i, int) or i < 1:
                raise BadRequest(f"malformed id {i!r}")
        self.gate.admit(token)
        found = []
        clamped = 0
        for i in ids:
            if is_clamped(i, self.spec):
                clamped += 1
            t = gen_tweet(i, self.spec)
            if t is not None:
                found.append(t)
        return found, clamped


class _Handler(BaseHTTPRequestHandler):
    server_version = "mockhose/0.1"

    def _send_json(self, status: int, payload, extra: Optional[dict] = None) -> None:
        body = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        for k, v in (extra or {}).items():
            self.send_header(k, v)
        self.end_headers()
        self.wfile.write(body)

    def _token(self) -> str:
        auth = self.headers.get("Authorization", "")
        if auth.startswith("Bearer "):
            return auth[len("Bearer "):]
        return auth

    def do_GET(self):  # noqa: N802
        if self.path == "/healthz":
            self._send_json(200, {"status": "ok"})
        else:
            self._send_json(404, {"errors": [{"message": "not found"}]})

    def do_POST(self):  # noqa: N802
        if self.path != LOOKUP_PATH:
            self._send_json(404, {"errors": [{"message": "not found"}]})
            return
        length = int(self.headers.get("Content-Length", "0"))
        form = parse_qs(self.rfile.read(length).decode("utf-8"))
        raw = form.get("id", [""])[0]
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if not parts or not all(p.isdigit() for p in parts):
            self._send_json(400, {"errors": [{"message": "bad id list"}]})
            return
        service: LookupService = self.server.service  # type: ignore[attr-defined]
        try:
            found, clamped = service.lookup([int(p) for p in parts], self._token())
        except Throttled as e:
            self._send_json(
                429,
                {"errors": [{"message": "rate limit exceeded"}]},
                {"Retry-After": str(math.ceil(e.retry_after))},
            )
            return
        except RequestTooLarge as e:
            self._send_json(413, {"errors": [{"message": str(e)}]})
            return
        except BadRequest as e:
            self._send_json(400, {"errors": [{"message": str(e)}]})
            return
        extra = {"X-Clamped-Ids": str(clamped)} if clamped else None
        self._send_json(200, found, extra)

    def log_message(self, format, *args):  # silence request logging
        pass


def make_server(
    spec: CorpusSpec,
    min_interval: float = 5.0,
    host: str = "127.0.0.1",
    port: int = 0,
) -> ThreadingHTTPServer:
    server = ThreadingHTTPServer((host, port), _Handler)
    server.service = LookupService(spec, min_interval)  # type: ignore[attr-defined]
    return server


def start_server(
    spec: CorpusSpec, min_interval: float = 5.0, host: str = "127.0.0.1", port: int = 0
) -> tuple[ThreadingHTTPServer, threading.Thread, str]:
    """Serve on a background thread; returns (server, thread, endpoint URL)."""
    server = make_server(spec, min_interval, host, port)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    url = f"http://{host}:{server.server_port}{LOOKUP_PATH}"
    return server, thread, url


class InProcessTransport:
    """Fetcher transport that skips HTTP and calls the service directly.

    Lets collection tests share one simulated clock between the client's
    limiter and the server's gate.
    """

    def __init__(self, service: LookupService, token: str):
        self.service = service
        self.token = token

    def lookup(self, ids):
        from tweetvault import fetcher

        try:
            found, _ = self.service.lookup(list(ids), self.token)
        except Throttled as e:
            raise fetcher.ThrottledResponse(e.retry_after) from None
        except (BadRequest, RequestTooLarge) as e:
            raise fetcher.FatalResponse(str(e)) from None
        return found
