"""Wire framing, loopback/TCP channels, and transcript recording.

Frame layout (little-endian throughout):

    offset 0   msg_type      1 byte
    offset 1   sender_id     2 bytes unsigned
    offset 3   receiver_id   2 bytes unsigned
    offset 5   payload_len   8 bytes unsigned
    offset 13  payload

Field elements travel as 8-byte unsigned, floats as IEEE binary64.
Matrices are prefixed with two 4-byte dims (rows, cols) and sent
row-major; flat scalar arrays with one 4-byte count.  No compression and
no variable-width encodings, so every byte is accounted for exactly.

Transcripts record the sender side of every frame with a per-channel
sequence number.  The canonical order (sender, receiver, seq) is
independent of arrival interleaving, which is what makes loopback and
TCP runs byte-comparable.
"""

from __future__ import annotations

import hashlib
import json
import queue
import socket
import struct
import threading
import time
from dataclasses import dataclass, field

from .errors import (
    FramingError,
    ProtocolError,
    ProtocolVersionError,
    TransportError,
)
from .matrix import Matrix

HEADER_LEN = 13
_HEADER = struct.Struct("<BHHQ")

# message tags
HELLO = 0x01
MASKED_DATA = 0x02
MASKED_MASK = 0x03
RE_RANDOMS = 0x04
RE_COMPONENTS = 0x05
PAIR_RESULT = 0x06
SELF_GRAM = 0x07
ALPHA = 0x08
DONE = 0x09

KIND_NAMES = {
    HELLO: "hello",
    MASKED_DATA: "masked_data",
    MASKED_MASK: "masked_mask",
    RE_RANDOMS: "re_randoms",
    RE_COMPONENTS: "re_components",
    PAIR_RESULT: "pair_result",
    SELF_GRAM: "self_gram",
    ALPHA: "alpha",
    DONE: "done",
}

FUNCTION_PARTY_ID = 0


@dataclass(frozen=True)
class Frame:
    kind: int
    sender: int
    receiver: int
    payload: bytes = field(repr=False)


def frame_encode(kind: int, sender: int, receiver: int, payload: bytes) -> bytes:
    return _HEADER.pack(kind, sender, receiver, len(payload)) + payload


def frame_decode(data: bytes) -> Frame:
    if len(data) < HEADER_LEN:
        raise FramingError(f"truncated frame: {len(data)} bytes, header needs {HEADER_LEN}")
    kind, sender, receiver, plen = _HEADER.unpack_from(data)
    if kind not in KIND_NAMES:
        raise ProtocolVersionError(f"unknown message tag 0x{kind:02x}")
    if len(data) != HEADER_LEN + plen:
        raise FramingError(
            f"frame length mismatch at byte {min(len(data), HEADER_LEN + plen)}: "
            f"header says {HEADER_LEN + plen}, got {len(data)}"
        )
    return Frame(kind, sender, receiver, data[HEADER_LEN:])


# -- payload codecs -------------------------------------------------------


def matrix_payload(m: Matrix) -> bytes:
    dom = m.domain
    parts = [struct.pack("<II", m.rows, m.cols)]
    parts.extend(dom.to_bytes(x) for x in m.data)
    return b"".join(parts)


def matrix_from_payload(b: bytes, domain, offset: int = 0) -> tuple:
    rows, cols = struct.unpack_from("<II", b, offset)
    offset += 8
    n = rows * cols
    if len(b) < offset + 8 * n:
        raise FramingError(f"matrix payload truncated at byte {len(b)}")
    data = tuple(domain.from_bytes(b[offset + 8 * k : offset + 8 * k + 8]) for k in range(n))
    return Matrix(rows, cols, data, domain), offset + 8 * n


def scalars_payload(xs, domain) -> bytes:
    parts = [struct.pack("<I", len(xs))]
    parts.extend(domain.to_bytes(x) for x in xs)
    return b"".join(parts)


def scalars_from_payload(b: bytes, domain, offset: int = 0) -> tuple:
    (n,) = struct.unpack_from("<I", b, offset)
    offset += 4
    if len(b) < offset + 8 * n:
        raise FramingError(f"scalar array truncated at byte {len(b)}")
    xs = tuple(domain.from_bytes(b[offset + 8 * k : offset + 8 * k + 8]) for k in range(n))
    return xs, offset + 8 * n


def u64_payload(v: int) -> bytes:
    return struct.pack("<Q", v)


def u64_from_payload(b: bytes) -> int:
    return struct.unpack("<Q", b[:8])[0]


# pair-tagged payloads: u16 alice, u16 bob, u8 part tag, then body
PART_A1, PART_B1, PART_B2 = 1, 2, 3
SIDE_X, SIDE_Y = 0, 1


def pair_matrix_payload(alice: int, bob: int, part: int, m: Matrix) -> bytes:
    return struct.pack("<HHB", alice, bob, part) + matrix_payload(m)


def pair_matrix_from_payload(b: bytes, domain) -> tuple:
    alice, bob, part = struct.unpack_from("<HHB", b)
    m, _ = matrix_from_payload(b, domain, offset=5)
    return alice, bob, part, m


def pair_scalars_payload(alice: int, bob: int, tag: int, xs, domain) -> bytes:
    return struct.pack("<HHB", alice, bob, tag) + scalars_payload(xs, domain)


def pair_scalars_from_payload(b: bytes, domain) -> tuple:
    alice, bob, tag = struct.unpack_from("<HHB", b)
    xs, _ = scalars_from_payload(b, domain, offset=5)
    return alice, bob, tag, xs


def payload_elements(kind: int, payload: bytes) -> int:
    """Protocol scalar count of a payload; framing metadata is not counted."""
    if kind in (HELLO, DONE):
        return 0
    if kind == ALPHA:
        return 1
    if kind in (MASKED_DATA, MASKED_MASK, SELF_GRAM):
        rows, cols = struct.unpack_from("<II", payload)
        return rows * cols
    if kind == PAIR_RESULT:
        rows, cols = struct.unpack_from("<II", payload, 5)
        return rows * cols
    if kind in (RE_RANDOMS, RE_COMPONENTS):
        (n,) = struct.unpack_from("<I", payload, 5)
        return n
    raise ProtocolVersionError(f"unknown message tag 0x{kind:02x}")


# -- transcript ------------------------------------------------------------


@dataclass(frozen=True)
class TranscriptEntry:
    sender: int
    receiver: int
    seq: int  # per (sender, receiver) channel, starting at 0
    kind: int
    n_bytes: int  # full frame size incl. header
    n_elements: int
    payload_sha: str

    def key(self):
        return (self.sender, self.receiver, self.seq)


class Transcript:
    """Thread-safe sender-side record of every frame in a run."""

    def __init__(self):
        self._lock = threading.Lock()
        self.entries = []

    def record(self, entry: TranscriptEntry):
        with self._lock:
            self.entries.append(entry)

    def extend(self, entries):
        with self._lock:
            self.entries.extend(entries)

    def sorted_entries(self) -> list:
        return sorted(self.entries, key=TranscriptEntry.key)

    def totals(self) -> dict:
        """Recomputable byte/element/frame totals per scope and message kind."""
        out = {
            scope: {"bytes": 0, "elements": 0, "frames": 0}
            for scope in ("ip_ip", "ip_fp", "total")
        }
        per_kind = {}
        for e in self.entries:
            scope = (
                "ip_fp"
                if FUNCTION_PARTY_ID in (e.sender, e.receiver)
                else "ip_ip"
            )
            for s in (scope, "total"):
                out[s]["bytes"] += e.n_bytes
                out[s]["elements"] += e.n_elements
                out[s]["frames"] += 1
            k = per_kind.setdefault(
                KIND_NAMES[e.kind], {"bytes": 0, "elements": 0, "frames": 0}
            )
            k["bytes"] += e.n_bytes
            k["elements"] += e.n_elements
            k["frames"] += 1
        out["per_kind"] = {k: per_kind[k] for k in sorted(per_kind)}
        return out

    def per_channel_bytes(self) -> dict:
        chans = {}
        for e in self.entries:
            key = (e.sender, e.receiver)
            chans[key] = chans.get(key, 0) + e.n_bytes
        return chans

    def canonical_json(self) -> str:
        """Deterministic serialization; excludes wall-clock information."""
        frames = [
            {
                "sender": e.sender,
                "receiver": e.receiver,
                "seq": e.seq,
                "kind": KIND_NAMES[e.kind],
                "bytes": e.n_bytes,
                "elements": e.n_elements,
                "payload_sha": e.payload_sha,
            }
            for e in self.sorted_entries()
        ]
        return json.dumps({"version": 1, "frames": frames}, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def to_json_entries(self) -> list:
        return json.loads(self.canonical_json())["frames"]

    @staticmethod
    def from_json_entries(frames) -> "Transcript":
        name_to_kind = {v: k for k, v in KIND_NAMES.items()}
        t = Transcript()
        for f in frames:
            t.record(
                TranscriptEntry(
                    sender=f["sender"],
                    receiver=f["receiver"],
                    seq=f["seq"],
                    kind=name_to_kind[f["kind"]],
                    n_bytes=f["bytes"],
                    n_elements=f["elements"],
                    payload_sha=f["payload_sha"],
                )
            )
        return t


# -- endpoints -------------------------------------------------------------


class LoopbackEndpoint:
    """In-memory duplex endpoint; semantically identical to the TCP one."""

    RECV_TIMEOUT = 120.0  # guards against a dead peer wedging the run

    def __init__(self, out_q: queue.Queue, in_q: queue.Queue):
        self._out = out_q
        self._in = in_q

    def send_bytes(self, data: bytes):
        self._out.put(data)

    def recv_frame(self) -> Frame:
        try:
            data = self._in.get(timeout=self.RECV_TIMEOUT)
        except queue.Empty:
            raise TransportError("recv timed out waiting for peer") from None
        if data is None:
            raise TransportError("channel closed by peer")
        return frame_decode(data)

    def close(self):
        self._out.put(None)


def loopback_pair() -> tuple:
    a_to_b: queue.Queue = queue.Queue()
    b_to_a: queue.Queue = queue.Queue()
    return LoopbackEndpoint(a_to_b, b_to_a), LoopbackEndpoint(b_to_a, a_to_b)


class TcpEndpoint:
    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._send_lock = threading.Lock()
        self._buf = b""

    def send_bytes(self, data: bytes):
        with self._send_lock:
            self._sock.sendall(data)

    def _read_exact(self, n: int) -> bytes:
        while len(self._buf) < n:
            try:
                chunk = self._sock.recv(65536)
            except socket.timeout:
                raise TransportError("recv timed out waiting for peer") from None
            if not chunk:
                raise TransportError("connection closed mid-frame")
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def recv_frame(self) -> Frame:
        header = self._read_exact(HEADER_LEN)
        kind, sender, receiver, plen = _HEADER.unpack(header)
        payload = self._read_exact(plen)
        return frame_decode(header + payload)

    def close(self):
        try:
            self._sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self._sock.close()


def tcp_listen(host: str, port: int) -> socket.socket:
    try:
        srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        srv.bind((host, port))
        srv.listen(64)
        return srv
    except OSError as exc:
        raise TransportError(f"cannot listen on {host}:{port}: {exc}") from exc


IO_TIMEOUT = 120.0


def tcp_accept(srv: socket.socket) -> TcpEndpoint:
    srv.settimeout(IO_TIMEOUT)
    try:
        sock, _ = srv.accept()
    except socket.timeout:
        raise TransportError(f"accept timed out on {srv.getsockname()}") from None
    sock.settimeout(IO_TIMEOUT)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return TcpEndpoint(sock)


def tcp_connect(host: str, port: int, retries: int = 200, delay: float = 0.025) -> TcpEndpoint:
    last = None
    for _ in range(retries):
        try:
            sock = socket.create_connection((host, port), timeout=10.0)
            sock.settimeout(IO_TIMEOUT)
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            return TcpEndpoint(sock)
        except OSError as exc:
            last = exc
            time.sleep(delay)
    raise TransportError(f"cannot connect to {host}:{port}: {last}")


def channel_pair(kind: str, host: str = "127.0.0.1", port: int = 0) -> tuple:
    """Connected endpoint pair of the requested transport (test helper)."""
    if kind == "loopback":
        return loopback_pair()
    if kind == "tcp":
        srv = tcp_listen(host, port)
        actual_port = srv.getsockname()[1]
        result = {}

        def _accept():
            result["ep"] = tcp_accept(srv)

        t = threading.Thread(target=_accept)
        t.start()
        client = tcp_connect(host, actual_port)
        t.join()
        srv.close()
        return result["ep"], client
    raise TransportError(f"unknown transport kind {kind!r}")


class Channel:
    """One direction-aware channel between two parties, with recording.

    Sends are recorded into the transcript with a per-channel sequence
    number; receives are not (the peer records them as its own sends).
    """

    def __init__(self, endpoint, local_id: int, peer_id: int, transcript: Transcript):
        self.endpoint = endpoint
        self.local_id = local_id
        self.peer_id = peer_id
        self.transcript = transcript
        self._seq = 0

    def send(self, kind: int, payload: bytes):
        frame = frame_encode(kind, self.local_id, self.peer_id, payload)
        if self.transcript is not None:
            self.transcript.record(
                TranscriptEntry(
                    sender=self.local_id,
                    receiver=self.peer_id,
                    seq=self._seq,
                    kind=kind,
                    n_bytes=len(frame),
                    n_elements=payload_elements(kind, payload),
                    payload_sha=hashlib.sha256(payload).hexdigest()[:16],
                )
            )
        self._seq += 1
        self.endpoint.send_bytes(frame)

    def recv(self, expect_kind: int = None) -> Frame:
        frame = self.endpoint.recv_frame()
        if frame.sender != self.peer_id:
            raise ProtocolError(
                f"party {self.local_id} expected a frame from {self.peer_id}, "
                f"got one from {frame.sender}"
            )
        if expect_kind is not None and frame.kind != expect_kind:
            raise ProtocolError(
                f"party {self.local_id} expected {KIND_NAMES[expect_kind]} from "
                f"{self.peer_id}, got {KIND_NAMES.get(frame.kind, hex(frame.kind))}"
            )
        return frame

    def close(self):
        self.endpoint.close()
