"""Client for the score-bridge wire protocol (version 1).

Frame layout, both directions: one UTF-8 JSON header line terminated by
'\\n', immediately followed by payload_len raw bytes of little-endian f32 in
channel-major order. Ops: hello (handshake, carries version + shape),
denoise (carries sigma, shape, optional context, payload), bye, error.
payload_len is always 4 * prod(shape) for tensor-bearing frames and 0
otherwise. One request is in flight per connection; responses match
requests first-in first-out.

Endpoints: "cmd:<command line>" spawns a subprocess and talks over its
stdio; "tcp:host:port" connects a socket. Integral sigmas are serialized as
integer tokens (80, not 80.0) so headers are the shortest faithful decimal.
"""

from __future__ import annotations

import json
import os
import queue
import select
import shlex
import socket
import subprocess

import numpy as np

from .core import NoisecoderError

PROTOCOL_VERSION = "1"
DEFAULT_TIMEOUT = 120.0
ENV_ENDPOINT = "NOISECODER_BRIDGE"


class BridgeError(NoisecoderError):
    """Base for everything that can go wrong on the wire."""


class BridgeConnectError(BridgeError):
    pass


class BridgeTimeout(BridgeError):
    pass


class BridgeClosed(BridgeError):
    """Peer vanished mid-conversation."""


class BridgeProtocolError(BridgeError):
    """Malformed frame, version/shape mismatch, or a server error frame."""


def describe_endpoint(endpoint: str) -> str:
    return endpoint


def resolve_endpoint(endpoint: str | None) -> str:
    """Apply the NOISECODER_BRIDGE environment override."""
    env = os.environ.get(ENV_ENDPOINT)
    if env:
        return env
    if not endpoint:
        raise BridgeConnectError("no bridge endpoint configured")
    return endpoint


def _encode_sigma(sigma: float):
    f = float(sigma)
    if f.is_integer() and abs(f) < 2**53:
        return int(f)
    return f


def encode_frame(op: str, *, sigma=None, shape=None, context=None,
                 payload: np.ndarray | None = None, version=None,
                 message=None) -> bytes:
    header: dict = {"op": op}
    if version is not None:
        header["version"] = version
    if sigma is not None:
        header["sigma"] = _encode_sigma(sigma)
    if shape is not None:
        header["shape"] = [int(d) for d in shape]
    if context is not None:
        header["context"] = context
    if message is not None:
        header["message"] = message
    if payload is not None:
        raw = np.ascontiguousarray(payload, dtype="<f4").tobytes()
        header["payload_len"] = len(raw)
    else:
        raw = b""
        header["payload_len"] = 0
    return json.dumps(header, separators=(",", ":")).encode() + b"\n" + raw


# ---------------------------------------------------------------------------
# transports with deadline-aware reads
# ---------------------------------------------------------------------------

class _Transport:
    """Byte stream with a read deadline; concrete classes supply fds."""

    def __init__(self):
        self._buf = bytearray()

    def _read_fd(self):
        raise NotImplementedError

    def _write(self, data: bytes):
        raise NotImplementedError

    def close(self):
        raise NotImplementedError

    def send(self, data: bytes):
        try:
            self._write(data)
        except (BrokenPipeError, ConnectionError, OSError) as exc:
            raise BridgeClosed(f"bridge: connection lost ({exc})") from exc

    def _fill(self, timeout: float):
        fd = self._read_fd()
        ready, _, _ = select.select([fd], [], [], timeout)
        if not ready:
            raise BridgeTimeout(f"bridge: no response within {timeout:.0f}s")
        chunk = os.read(fd, 1 << 16) if isinstance(fd, int) else fd.recv(1 << 16)
        if not chunk:
            raise BridgeClosed("bridge: connection lost")
        self._buf.extend(chunk)

    def read_line(self, timeout: float) -> bytes:
        while True:
            idx = self._buf.find(b"\n")
            if idx >= 0:
                line = bytes(self._buf[:idx])
                del self._buf[: idx + 1]
                return line
            if len(self._buf) > 1 << 20:
                raise BridgeProtocolError("bridge: header line too long")
            self._fill(timeout)

    def read_exact(self, count: int, timeout: float) -> bytes:
        while len(self._buf) < count:
            self._fill(timeout)
        data = bytes(self._buf[:count])
        del self._buf[:count]
        return data


class _PipeTransport(_Transport):
    def __init__(self, command: str):
        super().__init__()
        argv = shlex.split(command)
        if not argv:
            raise BridgeConnectError("empty bridge command")
        try:
            self.proc = subprocess.Popen(
                argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE
            )
        except OSError as exc:
            raise BridgeConnectError(f"bridge: cannot spawn {argv[0]!r}: {exc}") from exc

    def _read_fd(self):
        return self.proc.stdout.fileno()

    def _write(self, data: bytes):
        self.proc.stdin.write(data)
        self.proc.stdin.flush()

    def close(self):
        for stream in (self.proc.stdin, self.proc.stdout):
            try:
                stream.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


class _TcpTransport(_Transport):
    def __init__(self, host: str, port: int):
        super().__init__()
        try:
            self.sock = socket.create_connection((host, port), timeout=10)
        except OSError as exc:
            raise BridgeConnectError(f"bridge: cannot reach {host}:{port}: {exc}") from exc
        self.sock.setblocking(False)

    def _read_fd(self):
        return self.sock

    def _write(self, data: bytes):
        self.sock.setblocking(True)
        try:
            self.sock.sendall(data)
        finally:
            self.sock.setblocking(False)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


def _open_transport(endpoint: str) -> _Transport:
    kind, _, rest = endpoint.partition(":")
    if kind == "cmd" and rest:
        return _PipeTransport(rest)
    if kind == "tcp" and rest:
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise BridgeConnectError(f"bad tcp endpoint {endpoint!r}")
        return _TcpTransport(host, int(port))
    raise BridgeConnectError(f"unsupported bridge endpoint {endpoint!r}")


# ---------------------------------------------------------------------------
# session
# ---------------------------------------------------------------------------

class BridgeSession:
    """One connection: handshake on open, then lock-step denoise requests."""

    def __init__(self, endpoint: str, shape, timeout: float = DEFAULT_TIMEOUT):
        self.endpoint = endpoint
        self.shape = tuple(int(d) for d in shape)
        self.timeout = float(timeout)
        self._transport = _open_transport(endpoint)
        try:
            self._handshake()
        except BridgeError:
            self._transport.close()
            raise

    def _read_frame(self):
        line = self._transport.read_line(self.timeout)
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise BridgeProtocolError(f"bridge: malformed header: {exc}") from exc
        if not isinstance(header, dict) or "op" not in header:
            raise BridgeProtocolError("bridge: header missing op")
        payload_len = int(header.get("payload_len", 0))
        payload = (
            self._transport.read_exact(payload_len, self.timeout)
            if payload_len else b""
        )
        return header, payload

    def _handshake(self):
        self._transport.send(
            encode_frame("hello", version=PROTOCOL_VERSION, shape=self.shape)
        )
        header, _ = self._read_frame()
        if header["op"] == "error":
            raise BridgeProtocolError(f"bridge: {header.get('message', 'server error')}")
        if header["op"] != "hello":
            raise BridgeProtocolError(f"bridge: expected hello, got {header['op']!r}")
        version = str(header.get("version", ""))
        if version != PROTOCOL_VERSION:
            raise BridgeProtocolError(
                f"bridge: unsupported protocol version {version!r}"
            )
        peer_shape = tuple(header.get("shape") or ())
        if peer_shape and peer_shape != self.shape:
            raise BridgeProtocolError(
                f"bridge: shape mismatch: server {peer_shape}, client {self.shape}"
            )

    def denoise(self, x: np.ndarray, sigma: float, context=None) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if arr.shape != self.shape:
            raise BridgeProtocolError(
                f"bridge: tensor shape {arr.shape} != session shape {self.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise BridgeProtocolError("bridge: refusing to send non-finite values")
        self._transport.send(
            encode_frame("denoise", sigma=float(sigma), shape=self.shape,
                         context=context, payload=arr)
        )
        header, payload = self._read_frame()
        if header["op"] == "error":
            raise BridgeProtocolError(f"bridge: {header.get('message', 'server error')}")
        if header["op"] != "denoise":
            raise BridgeProtocolError(f"bridge: unexpected op {header['op']!r}")
        expected = 4 * int(np.prod(self.shape))
        if len(payload) != expected:
            raise BridgeProtocolError(
                f"bridge: payload length {len(payload)}, expected {expected}"
            )
        out = np.frombuffer(payload, dtype="<f4").astype(np.float64)
        if not np.all(np.isfinite(out)):
            raise BridgeProtocolError("bridge: server returned non-finite values")
        return out.reshape(self.shape)

    def close(self):
        try:
            self._transport.send(encode_frame("bye"))
        except BridgeError:
            pass
        self._transport.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class BridgeModel:
    """ScoreModel adapter over one or more bridge sessions.

    pool_size > 1 opens that many connections and hands them out per call,
    which lets callers run denoise requests in parallel threads while each
    connection still sees strictly serial traffic.
    """

    thread_safe = True

    def __init__(self, endpoint: str, shape, timeout: float = DEFAULT_TIMEOUT,
                 pool_size: int = 1):
        if pool_size < 1:
            raise BridgeConnectError("pool_size must be >= 1")
        self.endpoint = endpoint
        self.shape = tuple(int(d) for d in shape)
        self._pool: "queue.Queue[BridgeSession]" = queue.Queue()
        self._sessions = []
        try:
            for _ in range(pool_size):
                session = BridgeSession(endpoint, shape, timeout=timeout)
                self._sessions.append(session)
                self._pool.put(session)
        except BridgeError:
            self.close()
            raise

    def denoise(self, x: np.ndarray, sigma: float, context=None) -> np.ndarray:
        session = self._pool.get()
        try:
            return session.denoise(x, sigma, context=context)
        finally:
            self._pool.put(session)

    def close(self):
        for session in self._sessions:
            session.close()
        self._sessions = []

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
