"""Line protocol emulating the controller <-> spectrum-analyzer feedback loop.

Requests (LF-terminated printable ASCII, at most 64 KiB)::

    SET <1bit|phase> <payload>   ->  PWR <dbm:%.4f>
    GET-COUNT                    ->  COUNT <uint>
    RESET <seed-uint64>          ->  OK

Any failure answers ``ERR <code> <text>``: 400 malformed, 409 another client
is connected, 413 payload size mismatch, 500 evaluation failure. Every line
gets exactly one response and the connection stays open after errors.

``1bit`` payloads use the codebook hex packing (row-major, little-endian
bits); ``phase`` payloads are comma-separated radians in row-major order.
"""

from __future__ import annotations

import logging
import math
import socket
import socketserver
import threading

import numpy as np

from .channel import OracleError, Scenario, SimulatedOracle
from .codebook import pack_indices, unpack_indices
from .geometry import PhaseProfile, PhaseStateSet, RisGeometry, profile_state_indices

log = logging.getLogger(__name__)

MAX_LINE = 64 * 1024
UINT64_MAX = 2**64 - 1


class ProtocolError(Exception):
    def __init__(self, code: int, text: str):
        self.code = code
        self.text = text
        super().__init__(f"{code} {text}")


def parse_endpoint(endpoint: str | tuple[str, int]) -> tuple[str, int]:
    if isinstance(endpoint, tuple):
        return endpoint
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint must look like host:port, got {endpoint!r}")
    return host or "127.0.0.1", int(port)


def encode_profile(profile: PhaseProfile, states: PhaseStateSet | None = None) -> tuple[str, str]:
    """Pick the wire encoding: ``1bit`` when every coefficient is a member of a 2-state set."""
    states = states or PhaseStateSet.one_bit()
    if states.is_discrete and len(states.states) == 2:
        try:
            idx = profile_state_indices(profile, states)
        except ValueError:
            pass
        else:
            return "1bit", pack_indices(idx.ravel(), 1)
    coeffs = np.asarray(profile.coefficients).ravel()
    if np.any(np.abs(np.abs(coeffs) - 1.0) > 1e-9):
        raise ValueError("phase encoding carries unit-amplitude coefficients only")
    return "phase", ",".join(repr(float(x)) for x in np.angle(coeffs))


def decode_payload(encoding: str, payload: str, geom: RisGeometry, states: PhaseStateSet) -> PhaseProfile:
    count = geom.n_elements
    if encoding == "1bit":
        if len(states.states) != 2:
            raise ProtocolError(400, "1bit encoding needs a two-state surface")
        if len(payload) % 2 or any(c not in "0123456789abcdefABCDEF" for c in payload):
            raise ProtocolError(400, "payload is not valid hex")
        if len(payload) // 2 != (count + 7) // 8:
            raise ProtocolError(413, f"expected {(count + 7) // 8} bytes for {count} elements")
        idx = np.array(unpack_indices(payload, count, 1)).reshape(geom.rows_z, geom.cols_y)
        return PhaseProfile(states.coefficients()[idx], geom, states)
    if encoding == "phase":
        parts = payload.split(",")
        try:
            phases = np.array([float(p) for p in parts])
        except ValueError:
            raise ProtocolError(400, "phase payload must be comma-separated numbers") from None
        if not np.all(np.isfinite(phases)):
            raise ProtocolError(400, "non-finite phase")
        if phases.size != count:
            raise ProtocolError(413, f"expected {count} phases, got {phases.size}")
        return PhaseProfile(np.exp(1j * phases).reshape(geom.rows_z, geom.cols_y), geom)
    raise ProtocolError(400, f"unknown encoding {encoding!r}")


class Session:
    """Request interpreter bound to one scenario oracle (transport-free, for reuse and tests)."""

    def __init__(self, scenario: Scenario, seed: int | None = None):
        self.scenario = scenario
        self.oracle = SimulatedOracle(scenario, seed)
        st = scenario.ris.phase_states
        self.states = st if st.is_discrete and len(st.states) == 2 else PhaseStateSet.one_bit()

    def handle(self, raw: bytes) -> str:
        try:
            return self._handle(raw)
        except ProtocolError as exc:
            return f"ERR {exc.code} {exc.text}"
        except Exception as exc:  # never go silent
            log.exception("request failed")
            return f"ERR 500 {type(exc).__name__}"

    def _handle(self, raw: bytes) -> str:
        if len(raw) > MAX_LINE:
            raise ProtocolError(400, "line exceeds 64 KiB")
        if any(b < 0x20 or b > 0x7E for b in raw):
            raise ProtocolError(400, "non-printable byte in request")
        line = raw.decode("ascii")
        parts = line.split(" ")
        cmd = parts[0]
        if cmd == "GET-COUNT":
            if len(parts) != 1:
                raise ProtocolError(400, "GET-COUNT takes no arguments")
            return f"COUNT {self.oracle.count}"
        if cmd == "RESET":
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) > UINT64_MAX:
                raise ProtocolError(400, "usage: RESET <seed-uint64>")
            self.oracle.reset(int(parts[1]))
            return "OK"
        if cmd == "SET":
            if len(parts) != 3 or not parts[2]:
                raise ProtocolError(400, "usage: SET <1bit|phase> <payload>")
            profile = decode_payload(parts[1], parts[2], self.scenario.geometry, self.states)
            power = self.oracle.query(profile)
            if not math.isfinite(power):
                raise ProtocolError(500, "non-finite power")
            return f"PWR {power:.4f}"
        raise ProtocolError(400, "unknown command")


class _Handler(socketserver.StreamRequestHandler):
    server: "RisServer"

    def handle(self):
        if not self.server.client_lock.acquire(blocking=False):
            self.wfile.write(b"ERR 409 another client is connected\n")
            return
        try:
            self.server.active.add(self.request)
            session = self.server.session
            while True:
                raw = self.rfile.readline(MAX_LINE + 2)
                if not raw:
                    break
                if not raw.endswith(b"\n"):
                    if len(raw) <= MAX_LINE:
                        break  # EOF inside a line
                    while raw and not raw.endswith(b"\n"):
                        raw = self.rfile.readline(MAX_LINE + 2)
                    reply = "ERR 400 line exceeds 64 KiB"
                else:
                    reply = session.handle(raw[:-1])
                self.wfile.write(reply.encode("ascii") + b"\n")
        except OSError:
            pass
        finally:
            self.server.active.discard(self.request)
            self.server.client_lock.release()


class RisServer(socketserver.ThreadingTCPServer):
    """TCP server for one scenario; the session (counter, noise stream) persists across connections."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, scenario: Scenario, endpoint: str | tuple[str, int] = ("127.0.0.1", 0),
                 seed: int | None = None):
        super().__init__(parse_endpoint(endpoint), _Handler)
        self.session = Session(scenario, seed)
        self.client_lock = threading.Lock()
        self.active: set[socket.socket] = set()
        self._thread: threading.Thread | None = None

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def start(self) -> "RisServer":
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        """Stop accepting and drop any connected client."""
        self.shutdown()
        for sock in list(self.active):
            try:
                sock.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
        self.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve(scenario: Scenario, endpoint: str | tuple[str, int] = ("127.0.0.1", 0), seed: int | None = None) -> RisServer:
    """Start a background server and return it (``server.endpoint`` has the bound address)."""
    return RisServer(scenario, endpoint, seed).start()


class RemoteOracle:
    """Power oracle backed by a :class:`RisServer` across a socket."""

    def __init__(self, endpoint: str | tuple[str, int], timeout: float = 5.0, states: PhaseStateSet | None = None):
        self.address = parse_endpoint(endpoint)
        self.timeout = timeout
        self.states = states or PhaseStateSet.one_bit()
        self.count = 0
        self._sock: socket.socket | None = None
        self._file = None

    def _connect(self):
        if self._sock is None:
            try:
                self._sock = socket.create_connection(self.address, timeout=self.timeout)
            except OSError as exc:
                raise OracleError(f"cannot reach {self.address[0]}:{self.address[1]}: {exc}") from exc
            self._file = self._sock.makefile("rwb")

    def request(self, line: str) -> str:
        self._connect()
        try:
            self._file.write(line.encode("ascii") + b"\n")
            self._file.flush()
            reply = self._file.readline(MAX_LINE + 2)
        except OSError as exc:
            self.close()
            raise OracleError(f"transport failure after {self.count} queries: {exc}") from exc
        if not reply.endswith(b"\n"):
            self.close()
            raise OracleError(f"connection closed after {self.count} queries")
        return reply[:-1].decode("ascii", errors="replace")

    def query(self, profile: PhaseProfile) -> float:
        enc, payload = encode_profile(profile, self.states)
        reply = self.request(f"SET {enc} {payload}")
        if reply.startswith("PWR "):
            try:
                value = float(reply[4:])
            except ValueError:
                raise OracleError(f"protocol violation: {reply!r}") from None
            self.count += 1
            return value
        raise OracleError(f"server error: {reply}")

    def remote_count(self) -> int:
        reply = self.request("GET-COUNT")
        if not reply.startswith("COUNT "):
            raise OracleError(f"protocol violation: {reply!r}")
        return int(reply[6:])

    def reset(self, seed: int) -> None:
        reply = self.request(f"RESET {seed}")
        if reply != "OK":
            raise OracleError(f"reset failed: {reply}")
        self.count = 0

    def close(self) -> None:
        if self._sock is not None:
            try:
                self._file.close()
                self._sock.close()
            finally:
                self._sock = self._file = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def remote_oracle(endpoint: str | tuple[str, int], timeout: float = 5.0,
                  states: PhaseStateSet | None = None) -> RemoteOracle:
    return RemoteOracle(endpoint, timeout, states)
