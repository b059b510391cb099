"""Completer wire protocol: newline-delimited JSON records over a byte
stream (a spawned subprocess's stdio or a TCP connection).

Handshake: the client opens the stream and sends
``{"type": "hello", "protocol": 1, "vocab_hash": "<sha256>"}``; the server
answers with its own hello. A protocol-version or vocabulary-hash mismatch
is answered with an error record and the stream is closed.

Requests carry an id, the eight requirement scalars and either a single
``prefix`` or a ``prefixes`` batch::

    {"id": 7, "op": "complete", "requirements": [...], "prefix": ["<start>"]}
    -> {"id": 7, "tokens": ["<start>", "tra+", "SH-100", "<end>"]}

    {"id": 8, "op": "complete", "requirements": [...], "prefixes": [[...], [...]]}
    -> {"id": 8, "completions": [[...], [...]]}

Responses preserve request ids; returned token lists are full sequences that
begin with the request prefix.
"""

from __future__ import annotations

import json
import shlex
import socket
import socketserver
import subprocess
import threading

from .datasetgen import Requirements
from .dsl import GearSequence
from .errors import CompleterUnreachable, ProtocolError
from .search import Completer

PROTOCOL_VERSION = 1


def _hello(vocab_hash: str) -> dict:
    return {"type": "hello", "protocol": PROTOCOL_VERSION, "vocab_hash": vocab_hash}


def _check_hello(record: dict, vocab_hash: str) -> str | None:
    if record.get("type") != "hello":
        return f"expected hello record, got {record.get('type')!r}"
    if record.get("protocol") != PROTOCOL_VERSION:
        return f"protocol {record.get('protocol')} != {PROTOCOL_VERSION}"
    if record.get("vocab_hash") != vocab_hash:
        return "vocabulary hash mismatch"
    return None


class WireCompleter(Completer):
    """Client side: talks to a completer server over stdio or TCP.

    Addresses: ``exec:<command line>`` spawns a subprocess speaking the
    protocol on its stdio; ``tcp:<host>:<port>`` (or plain ``host:port``)
    connects to a listening server."""

    def __init__(self, address: str, vocab_hash: str):
        self.address = address
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        self._lock = threading.Lock()
        try:
            if address.startswith("exec:"):
                self._proc = subprocess.Popen(
                    shlex.split(address[len("exec:"):]),
                    stdin=subprocess.PIPE, stdout=subprocess.PIPE)
                self._rfile = self._proc.stdout
                self._wfile = self._proc.stdin
            else:
                hostport = address[len("tcp:"):] if address.startswith("tcp:") else address
                host, _, port = hostport.rpartition(":")
                self._sock = socket.create_connection((host or "127.0.0.1", int(port)),
                                                      timeout=30)
                self._rfile = self._sock.makefile("rb")
                self._wfile = self._sock.makefile("wb")
        except (OSError, ValueError) as exc:
            raise CompleterUnreachable(f"cannot reach completer at {address!r}: {exc}") from exc
        self._next_id = 0
        self._send(_hello(vocab_hash))
        reply = self._recv()
        problem = _check_hello(reply, vocab_hash) if "error" not in reply else reply["error"]
        if problem:
            self.close()
            raise ProtocolError(f"handshake with {address!r} failed: {problem}")

    def _send(self, record: dict) -> None:
        try:
            self._wfile.write(json.dumps(record).encode("utf-8") + b"\n")
            self._wfile.flush()
        except (OSError, BrokenPipeError) as exc:
            raise CompleterUnreachable(f"completer connection lost: {exc}") from exc

    def _recv(self) -> dict:
        line = self._rfile.readline()
        if not line:
            raise CompleterUnreachable("completer closed the stream")
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"bad record from completer: {line[:120]!r}") from exc
        return record

    def _roundtrip(self, payload: dict) -> dict:
        with self._lock:
            self._next_id += 1
            payload["id"] = self._next_id
            self._send(payload)
            reply = self._recv()
        if "error" in reply:
            raise ProtocolError(f"completer error: {reply['error']}")
        if reply.get("id") != payload["id"]:
            raise ProtocolError(f"response id {reply.get('id')} != {payload['id']}")
        return reply

    def complete(self, req: Requirements, prefix: tuple[str, ...]) -> GearSequence:
        reply = self._roundtrip({
            "op": "complete",
            "requirements": list(req.to_vector()),
            "prefix": list(prefix),
        })
        tokens = reply.get("tokens")
        if not isinstance(tokens, list) or tokens[:len(prefix)] != list(prefix):
            raise ProtocolError("completion does not extend the prefix")
        return GearSequence(tuple(tokens))

    def complete_batch(self, req: Requirements,
                       prefixes: list[tuple[str, ...]]) -> list[GearSequence]:
        reply = self._roundtrip({
            "op": "complete",
            "requirements": list(req.to_vector()),
            "prefixes": [list(p) for p in prefixes],
        })
        completions = reply.get("completions")
        if not isinstance(completions, list) or len(completions) != len(prefixes):
            raise ProtocolError("batch completion count mismatch")
        return [GearSequence(tuple(tokens)) for tokens in completions]

    def close(self) -> None:
        for f in (getattr(self, "_wfile", None), getattr(self, "_rfile", None)):
            try:
                if f:
                    f.close()
            except OSError:
                pass
        if self._sock is not None:
            self._sock.close()
        if self._proc is not None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()


def handle_completer_stream(rfile, wfile, completer: Completer, vocab_hash: str) -> None:
    """Server side of the protocol over a pair of binary file objects."""

    def send(record: dict) -> None:
        wfile.write(json.dumps(record).encode("utf-8") + b"\n")
        wfile.flush()

    line = rfile.readline()
    if not line:
        return
    try:
        hello = json.loads(line)
    except json.JSONDecodeError:
        send({"type": "error", "error": "handshake is not valid JSON"})
        return
    problem = _check_hello(hello, vocab_hash)
    if problem:
        send({"type": "error", "error": problem})
        return
    send(_hello(vocab_hash))

    for line in rfile:
        try:
            request = json.loads(line)
        except json.JSONDecodeError:
            send({"error": "request is not valid JSON"})
            return
        rid = request.get("id")
        try:
            if request.get("op") != "complete":
                raise ProtocolError(f"unknown op {request.get('op')!r}")
            req = Requirements.from_vector(request["requirements"])
            if "prefixes" in request:
                completions = [
                    list(completer.complete(req, tuple(p)).tokens)
                    for p in request["prefixes"]
                ]
                send({"id": rid, "completions": completions})
            else:
                seq = completer.complete(req, tuple(request["prefix"]))
                send({"id": rid, "tokens": list(seq.tokens)})
        except Exception as exc:   # protocol contract: report and keep serving
            send({"id": rid, "error": f"{type(exc).__name__}: {exc}"})


def serve_completer_stdio(completer: Completer, vocab_hash: str) -> None:
    import sys

    handle_completer_stream(sys.stdin.buffer, sys.stdout.buffer, completer, vocab_hash)


def serve_completer_tcp(completer_factory, vocab_hash: str, host: str = "127.0.0.1",
                        port: int = 0):
    """Start a threaded TCP server; returns (server, bound_port). Each
    connection gets its own completer instance from the factory."""

    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            handle_completer_stream(self.rfile, self.wfile,
                                    completer_factory(), vocab_hash)

    class Server(socketserver.ThreadingTCPServer):
        allow_reuse_address = True
        daemon_threads = True

    server = Server((host, port), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address[1]
