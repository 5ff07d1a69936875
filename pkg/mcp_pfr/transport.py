"""Moving frames between a client and N replicated servers.

Two transports share one interface, ``exchange(server_index, frame) -> frame``:
``LoopbackTransport`` answers in-process through the real codec, and
``TcpTransport`` opens one connection per query. ``retrieve`` plans, fans the
queries out concurrently, joins on every answer and only then decodes.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from mcp_pfr import wire
from mcp_pfr.config import DEFAULT_SETTINGS, Settings
from mcp_pfr.database import Database, DecodedStream
from mcp_pfr.engine import answer_query
from mcp_pfr.errors import PFRError, TransportError, ValidationError, WireError
from mcp_pfr.field import field_make
from mcp_pfr.messages import Answer, Query
from mcp_pfr.rates import BINARY, check_scheme, scheme_counts
from mcp_pfr.rng import make_rng
from mcp_pfr.scheme_binary import decode_binary, plan_binary
from mcp_pfr.scheme_general import decode_general, plan_general, setup_general

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Parameters and transcripts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RetrievalParams:
    scheme: str
    N: int
    K: int
    theta: int
    p: int = 2
    m: int = 1
    S: int = 0  # 0: let the servers' database decide

    @property
    def q(self) -> int:
        return self.p**self.m

    def validate(self) -> None:
        check_scheme(self.scheme, self.N, self.K, self.q)


@dataclass(frozen=True)
class ServerExchange:
    server_id: int
    requests: int
    upload_bytes: int
    download_bytes: int
    answer_elements: int
    seconds: float
    query: Query | None = field(default=None, repr=False, compare=False)
    answer: Answer | None = field(default=None, repr=False, compare=False)

    @property
    def framing_bytes(self) -> int:
        """Download bytes that are not answer payload elements."""
        return self.download_bytes - 2 * self.answer_elements


@dataclass
class Transcript:
    params: RetrievalParams
    exchanges: list[ServerExchange] = field(default_factory=list)
    plan_seconds: float = 0.0
    decode_seconds: float = 0.0
    S: int = 0

    @property
    def measured_q(self) -> int:
        return sum(e.requests for e in self.exchanges)

    @property
    def answer_elements(self) -> int:
        return sum(e.answer_elements for e in self.exchanges)

    @property
    def upload_bytes(self) -> int:
        return sum(e.upload_bytes for e in self.exchanges)

    @property
    def download_bytes(self) -> int:
        return sum(e.download_bytes for e in self.exchanges)

    def summary(self) -> str:
        lines = [f"{'server':>6} {'requests':>9} {'up_bytes':>10} {'down_bytes':>11} {'elements':>9} {'seconds':>8}"]
        for e in self.exchanges:
            lines.append(
                f"{e.server_id:>6} {e.requests:>9} {e.upload_bytes:>10} "
                f"{e.download_bytes:>11} {e.answer_elements:>9} {e.seconds:>8.4f}"
            )
        lines.append(
            f"total: Q={self.measured_q} elements={self.answer_elements} "
            f"(S={self.S}) upload={self.upload_bytes}B download={self.download_bytes}B"
        )
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Server side
# ---------------------------------------------------------------------------

def handle_frame(db: Database, frame: bytes, server_id: int = 0, max_frame: int | None = None) -> bytes:
    """Answer one QUERY frame; any failure comes back as an ERROR frame."""
    try:
        wire.decode_frame(frame, max_frame)
        query = wire.decode_query(frame, server_id)
        return wire.encode_answer(answer_query(db, query))
    except PFRError as e:
        log.info("server %d rejected query: %s", server_id, e)
        return wire.encode_error(e.code, str(e))


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks, got = [], 0
    while got < n:
        chunk = sock.recv(min(n - got, 1 << 20))
        if not chunk:
            raise TransportError(f"connection closed after {got} of {n} bytes")
        chunks.append(chunk)
        got += len(chunk)
    return b"".join(chunks)


def read_frame(sock: socket.socket, max_frame: int | None = None) -> bytes:
    """Read exactly one frame (header and payload) off a socket."""
    max_frame = DEFAULT_SETTINGS.max_frame if max_frame is None else max_frame
    header = _recv_exact(sock, wire.FRAME_HEADER.size)
    length, _ = wire.FRAME_HEADER.unpack(header)
    if length > max_frame:
        raise WireError(WireError.OVERSIZED, f"payload of {length} bytes exceeds {max_frame}")
    return header + _recv_exact(sock, length)


class _QueryHandler(socketserver.BaseRequestHandler):
    """One frame in, one frame out, repeated until the client closes."""

    def handle(self):
        server: PFRServer = self.server  # type: ignore[assignment]
        peer = "%s:%s" % self.client_address[:2]
        log.info("connection from %s", peer)
        while True:
            try:
                frame = read_frame(self.request, server.settings.max_frame)
            except TransportError:
                break
            except WireError as e:
                self.request.sendall(wire.encode_error(e.code, str(e)))
                break
            except OSError as e:
                log.info("connection from %s failed: %s", peer, e)
                break
            self.request.sendall(handle_frame(server.db, frame, max_frame=server.settings.max_frame))
        log.info("connection from %s closed", peer)


class PFRServer(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, db: Database, address: tuple[str, int], settings: Settings = DEFAULT_SETTINGS):
        self.db = db
        self.settings = settings
        super().__init__(address, _QueryHandler)

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


def serve(db: Database, host: str = "127.0.0.1", port: int = 0, settings: Settings = DEFAULT_SETTINGS) -> PFRServer:
    """Bind a threaded server over an immutable database. Call ``serve_forever`` to run it."""
    server = PFRServer(db, (host, port), settings)
    log.info("serving %s (K=%d L=%d S=%d) on %s", db.field, db.K, db.L, db.S, server.endpoint)
    return server


def serve_in_thread(db: Database, host: str = "127.0.0.1", port: int = 0) -> tuple[PFRServer, threading.Thread]:
    server = serve(db, host, port)
    thread = threading.Thread(target=server.serve_forever, name=f"pfr-server-{server.endpoint}", daemon=True)
    thread.start()
    return server, thread


# ---------------------------------------------------------------------------
# Client side
# ---------------------------------------------------------------------------

def parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.strip().rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValidationError(f"endpoint {text!r} is not HOST:PORT")
    return host, int(port)


def parse_endpoints(text: str) -> list[tuple[str, int]]:
    return [parse_endpoint(part) for part in text.split(",") if part.strip()]


class LoopbackTransport:
    """In-process servers, one database replica each, exercising the real codec."""

    def __init__(self, dbs: list[Database]):
        if not dbs:
            raise ValidationError("loopback transport needs at least one database")
        self.dbs = dbs

    @classmethod
    def replicated(cls, db: Database, n: int) -> "LoopbackTransport":
        return cls([db] * n)

    @property
    def n_servers(self) -> int:
        return len(self.dbs)

    def exchange(self, server_index: int, frame: bytes) -> bytes:
        return handle_frame(self.dbs[server_index], frame, server_index + 1)


class TcpTransport:
    def __init__(self, endpoints: list[tuple[str, int]], timeout: float | None = None):
        if len(set(endpoints)) != len(endpoints):
            raise ValidationError("servers must be distinct endpoints")
        self.endpoints = endpoints
        self.timeout = DEFAULT_SETTINGS.timeout if timeout is None else timeout

    @property
    def n_servers(self) -> int:
        return len(self.endpoints)

    def exchange(self, server_index: int, frame: bytes) -> bytes:
        host, port = self.endpoints[server_index]
        try:
            with socket.create_connection((host, port), timeout=self.timeout) as sock:
                sock.sendall(frame)
                return read_frame(sock)
        except TransportError:
            raise
        except OSError as e:
            raise TransportError(f"server {host}:{port}: {e}") from None


def _unwrap_answer(frame: bytes, server_id: int, q: int) -> Answer:
    msg_type, _ = wire.decode_frame(frame)
    if msg_type == wire.ERROR:
        code, message = wire.decode_error(frame)
        raise TransportError(f"server {server_id} answered with error {code}: {message}")
    return wire.decode_answer(frame, q)


def _plan(params: RetrievalParams, seed: int | None):
    """Return (queries, decode callable) for the requested scheme."""
    rng = make_rng(seed)
    setup_seed, plan_seed = rng.getrandbits(64), rng.getrandbits(64)
    if params.scheme == BINARY:
        q1, q2, plan = plan_binary(params.K, params.theta, plan_seed)
        return [q1, q2], lambda answers: decode_binary(plan, *answers)
    f = field_make(params.p, params.m)
    setup = setup_general(params.N, params.K, f, setup_seed)
    queries, plan = plan_general(setup, params.theta, plan_seed)
    return queries, lambda answers: decode_general(plan, answers)


def retrieve(params: RetrievalParams, transport, seed: int | None = None) -> tuple[DecodedStream, Transcript]:
    """Privately retrieve v(θ)ᵀW from ``transport``'s N servers."""
    params.validate()
    if transport.n_servers != params.N:
        raise ValidationError(f"{params.scheme} retrieval with N={params.N} needs {params.N} servers, got {transport.n_servers}")
    transcript = Transcript(params)

    start = time.perf_counter()
    queries, decode = _plan(params, seed)
    if params.S:
        queries = [query.with_record_length(params.S) for query in queries]
    frames = [wire.encode_query(query) for query in queries]
    transcript.plan_seconds = time.perf_counter() - start

    def run(index: int) -> tuple[Answer, ServerExchange]:
        t0 = time.perf_counter()
        reply = transport.exchange(index, frames[index])
        answer = _unwrap_answer(reply, index + 1, params.q)
        exchange = ServerExchange(
            server_id=index + 1,
            requests=len(queries[index].requests),
            upload_bytes=len(frames[index]),
            download_bytes=len(reply),
            answer_elements=answer.values.size,
            seconds=time.perf_counter() - t0,
            query=queries[index],
            answer=answer,
        )
        return answer, exchange

    with ThreadPoolExecutor(max_workers=params.N, thread_name_prefix="pfr-client") as pool:
        futures = [pool.submit(run, i) for i in range(params.N)]
        results = []
        for i, future in enumerate(futures, start=1):
            try:
                results.append(future.result())
            except TransportError:
                raise
            except WireError as e:
                raise TransportError(f"server {i} sent a malformed answer: {e}") from None
    answers = [a for a, _ in results]
    transcript.exchanges = [e for _, e in results]

    start = time.perf_counter()
    stream = decode(answers)
    transcript.decode_seconds = time.perf_counter() - start
    transcript.S = answers[0].S if answers else 0

    _, analytical_q = scheme_counts(params.scheme, params.N, params.K, params.q)
    if transcript.measured_q != analytical_q or transcript.answer_elements != analytical_q * transcript.S:
        raise TransportError(
            f"measured Q={transcript.measured_q} ({transcript.answer_elements} elements), "
            f"expected Q={analytical_q} ({analytical_q * transcript.S} elements)"
        )
    log.info("retrieved theta=%d with %s over %d servers: Q=%d S=%d",
             params.theta, params.scheme, params.N, transcript.measured_q, transcript.S)
    return stream, transcript
