"""Wire client and test server for attaching an external scorer.

Protocol: newline-delimited JSON over a TCP stream, one document per line,
UTF-8. Request ``{"id": <u64>, "sequences": [<string>, ...]}``; response
``{"id": <u64>, "scores": [<float>, ...], "plddt": [[<float>, ...], ...]}``
with ``plddt`` optional. Scores are order-preserving and must lie in (0, 1].

Transport failures (timeouts, dropped connections) are retried with
exponential backoff; protocol violations (id mismatch, malformed documents,
out-of-range scores) surface immediately as typed errors.
"""

from __future__ import annotations

import itertools
import json
import socket
import socketserver
import threading
import time

import numpy as np

from .core import Alphabet, Sequence
from .oracle import PottsLandscape, Scorer, ScoreReport, ScorerError


class RemoteError(ScorerError):
    pass


class RemoteTimeout(RemoteError):
    pass


class ProtocolError(RemoteError):
    pass


class ScoreRangeError(ProtocolError):
    pass


class RemoteScorer(Scorer):
    """Scores batches against a remote endpoint speaking the line protocol.

    Each thread keeps its own connection, so concurrent in-flight batches are
    naturally distinguished by their request ids.
    """

    name = "remote"

    def __init__(self, address: str, alphabet: Alphabet | None = None,
                 timeout: float = 10.0, attempts: int = 3, backoff: float = 0.1):
        super().__init__()
        host, _, port = address.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError(f"address must be host:port, got {address!r}")
        self.host, self.port = host, int(port)
        self.alphabet = alphabet or Alphabet()
        self.timeout = timeout
        self.attempts = attempts
        self.backoff = backoff
        self._ids = itertools.count(1)
        self._id_lock = threading.Lock()
        self._local = threading.local()

    def _connection(self) -> socket.socket:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = socket.create_connection((self.host, self.port), timeout=self.timeout)
            self._local.conn = conn
            self._local.reader = conn.makefile("r", encoding="utf-8")
        return conn

    def _drop_connection(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            try:
                conn.close()
            finally:
                self._local.conn = None
                self._local.reader = None

    def close(self) -> None:
        self._drop_connection()

    def _next_id(self) -> int:
        with self._id_lock:
            return next(self._ids)

    def _exchange(self, payload: dict) -> dict:
        line = json.dumps(payload) + "\n"
        delay = self.backoff
        last_exc: Exception | None = None
        for attempt in range(self.attempts):
            if attempt:
                time.sleep(delay)
                delay *= 2
            try:
                conn = self._connection()
                conn.sendall(line.encode("utf-8"))
                response = self._local.reader.readline()
                if not response:
                    raise ConnectionError("connection closed by server")
                return json.loads(response)
            except socket.timeout as exc:
                self._drop_connection()
                last_exc = RemoteTimeout(f"no response within {self.timeout}s")
                last_exc.__cause__ = exc
            except (ConnectionError, OSError) as exc:
                self._drop_connection()
                last_exc = RemoteError(str(exc))
            except json.JSONDecodeError as exc:
                raise ProtocolError(f"malformed response: {exc}") from exc
        raise last_exc

    def _request_scores(self, strings: list[str]) -> dict:
        request_id = self._next_id()
        doc = self._exchange({"id": request_id, "sequences": strings})
        if doc.get("id") != request_id:
            raise ProtocolError(f"response id {doc.get('id')!r} != request id {request_id}")
        scores = doc.get("scores")
        if not isinstance(scores, list) or len(scores) != len(strings):
            raise ProtocolError("response scores missing or wrong length")
        for s in scores:
            if not isinstance(s, (int, float)) or not 0.0 < s <= 1.0:
                raise ScoreRangeError(f"score {s!r} outside (0, 1]")
        return doc

    def _score_batch(self, seqs: np.ndarray) -> np.ndarray:
        strings = ["".join(self.alphabet.symbols[r] for r in row) for row in seqs]
        doc = self._request_scores(strings)
        return np.asarray(doc["scores"], dtype=np.float64)

    def report(self, seq: Sequence) -> ScoreReport:
        strings = [seq.to_string(self.alphabet)]
        doc = self._request_scores(strings)
        self.queries += 1
        plddt = doc.get("plddt")
        confidence = None
        if plddt is not None:
            if not isinstance(plddt, list) or len(plddt) != 1:
                raise ProtocolError("plddt must hold one vector per sequence")
            confidence = tuple(float(v) for v in plddt[0])
        return ScoreReport(score=float(doc["scores"][0]), confidence=confidence)


class _EchoHandler(socketserver.StreamRequestHandler):
    def handle(self):
        server: EchoOracleServer = self.server  # type: ignore[assignment]
        for raw in self.rfile:
            try:
                doc = json.loads(raw.decode("utf-8"))
                reply = server.respond(doc)
            except Exception:
                break
            self.wfile.write((json.dumps(reply) + "\n").encode("utf-8"))
            self.wfile.flush()


class EchoOracleServer(socketserver.ThreadingTCPServer):
    """Test double speaking the wire protocol.

    Returns a constant score by default, or scores from a synthetic landscape
    when one is supplied.
    """

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str = "127.0.0.1", port: int = 0,
                 score: float = 0.5, landscape: PottsLandscape | None = None,
                 alphabet: Alphabet | None = None):
        super().__init__((host, port), _EchoHandler)
        self.score = score
        self.landscape = landscape
        self.alphabet = alphabet or Alphabet()

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def respond(self, doc: dict) -> dict:
        sequences = doc["sequences"]
        if self.landscape is not None:
            mat = np.array([[self.alphabet.index(c) for c in s] for s in sequences],
                           dtype=np.int64)
            scores = [float(v) for v in self.landscape.score_batch(mat)]
        else:
            scores = [self.score] * len(sequences)
        return {"id": doc["id"], "scores": scores}

    def start(self) -> "EchoOracleServer":
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return self
