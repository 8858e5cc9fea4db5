"""Message channels between the coordinator and its clients.

Both transports move serialized frames, so an in-process run exercises the
same bytes as a TCP run. A channel can be told to refuse message types; in
FedAvg mode shard messages are refused, which keeps raw records on clients.
"""
from __future__ import annotations

import logging
import queue
import socket
import threading
from collections import Counter
from typing import Iterable, Optional

from ..errors import FedThalError, MalformedPayload, PrivacyViolation
from .wire import decode_payload, frame_length, serialize_message, type_name

log = logging.getLogger(__name__)

DEFAULT_PORT = 7461
DEFAULT_TIMEOUT = 60.0


class ChannelClosed(FedThalError):
    pass


class Channel:
    """One end of a bidirectional, ordered message stream."""

    def __init__(self, forbidden: Iterable[str] = ()):
        self.forbidden = frozenset(forbidden)
        self.sent = Counter()
        self.received = Counter()

    def _guard(self, name: str) -> None:
        if name in self.forbidden:
            raise PrivacyViolation(f"message type {name!r} is not allowed on this channel")

    def send(self, msg) -> None:
        name = type_name(msg)
        self._guard(name)
        self._send_frame(serialize_message(msg))
        self.sent[name] += 1

    def recv(self):
        msg = self._recv_message()
        name = type_name(msg)
        self._guard(name)
        self.received[name] += 1
        return msg

    def _send_frame(self, frame: bytes) -> None:
        raise NotImplementedError

    def _recv_message(self):
        raise NotImplementedError

    def close(self) -> None:
        pass


class InprocChannel(Channel):
    def __init__(self, inbox: queue.Queue, outbox: queue.Queue, forbidden=(), timeout=DEFAULT_TIMEOUT):
        super().__init__(forbidden)
        self.inbox = inbox
        self.outbox = outbox
        self.timeout = timeout

    def _send_frame(self, frame: bytes) -> None:
        self.outbox.put(frame)

    def _recv_message(self):
        try:
            frame = self.inbox.get(timeout=self.timeout)
        except queue.Empty:
            raise ChannelClosed("timed out waiting for a message") from None
        if frame is None:
            raise ChannelClosed("peer closed the channel")
        n = frame_length(frame[:4])
        payload = frame[4:]
        if len(payload) != n:
            raise MalformedPayload("truncated frame")
        return decode_payload(payload)

    def close(self) -> None:
        self.outbox.put(None)


def inproc_pair(forbidden=(), timeout=DEFAULT_TIMEOUT):
    """(coordinator_end, client_end)."""
    a, b = queue.Queue(), queue.Queue()
    return (InprocChannel(a, b, forbidden, timeout), InprocChannel(b, a, forbidden, timeout))


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(min(n - len(buf), 1 << 20))
        if not chunk:
            break
        buf.extend(chunk)
    return bytes(buf)


class TcpChannel(Channel):
    def __init__(self, sock: socket.socket, forbidden=(), timeout=DEFAULT_TIMEOUT):
        super().__init__(forbidden)
        self.sock = sock
        self.sock.settimeout(timeout)
        self._lock = threading.Lock()

    def _send_frame(self, frame: bytes) -> None:
        with self._lock:
            self.sock.sendall(frame)

    def _recv_message(self):
        try:
            header = _recv_exact(self.sock, 4)
            if not header:
                raise ChannelClosed("peer closed the connection")
            try:
                n = frame_length(header)
                payload = _recv_exact(self.sock, n)
                if len(payload) != n:
                    raise MalformedPayload(f"truncated frame: expected {n} bytes, got {len(payload)}")
                return decode_payload(payload)
            except MalformedPayload:
                self.close()
                raise
        except socket.timeout:
            raise ChannelClosed("timed out waiting for a message") from None
        except OSError as exc:
            raise ChannelClosed(str(exc)) from exc

    def close(self) -> None:
        try:
            self.sock.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.sock.close()


class TcpListener:
    """Coordinator-side listening socket on the loopback interface."""

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT, timeout=DEFAULT_TIMEOUT):
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self.sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self.sock.bind((host, port))
        self.sock.listen()
        self.sock.settimeout(timeout)
        self.host = host
        self.timeout = timeout

    @property
    def port(self) -> int:
        return self.sock.getsockname()[1]

    def accept(self, forbidden=()) -> TcpChannel:
        conn, _ = self.sock.accept()
        conn.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        return TcpChannel(conn, forbidden, self.timeout)

    def close(self) -> None:
        self.sock.close()


def tcp_connect(host: str, port: int, forbidden=(), timeout=DEFAULT_TIMEOUT) -> TcpChannel:
    sock = socket.create_connection((host, port), timeout=timeout)
    sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
    return TcpChannel(sock, forbidden, timeout)
