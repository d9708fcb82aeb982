"""
Query transports: real sockets, or an in-memory channel to a responder callable
"""
import logging
import socket
import struct
import time
from abc import ABC, abstractmethod
from typing import Callable, Optional, Tuple

from client.exceptions import LookupTimeoutError, TransportError

logger = logging.getLogger(__name__)

TCP_LENGTH = struct.Struct('!H')
MAX_DATAGRAM = 65535

Address = Tuple[str, int]
Accept = Callable[[bytes], bool]


class Transport(ABC):
    """
    Sends one encoded query and returns one response

    Counters record what went on the wire so tests can assert transport usage.
    """

    def __init__(self):
        self.udp_queries = 0
        self.udp_responses = 0
        self.tcp_queries = 0

    @abstractmethod
    def udp_exchange(self, wire: bytes, server: Address, timeout: float, accept: Accept) -> bytes:
        """
        Send a datagram and wait for a response that accept() approves

        Responses rejected by accept are discarded and the wait continues
        until the timeout expires.
        """

    @abstractmethod
    def tcp_exchange(self, wire: bytes, server: Address, timeout: float) -> bytes:
        """Length-prefixed query/response over a fresh connection"""


def _family(host: str) -> int:
    return socket.AF_INET6 if ':' in host else socket.AF_INET


class SocketTransport(Transport):
    def __init__(self, clock: Callable[[], float] = time.monotonic):
        super().__init__()
        self.clock = clock

    def udp_exchange(self, wire: bytes, server: Address, timeout: float, accept: Accept) -> bytes:
        with socket.socket(_family(server[0]), socket.SOCK_DGRAM) as sock:
            # connected socket: datagrams from other sources never reach recv
            sock.connect(server)
            sock.send(wire)
            self.udp_queries += 1
            deadline = self.clock() + timeout
            while True:
                remaining = deadline - self.clock()
                if remaining <= 0:
                    raise LookupTimeoutError(f"no response from {server[0]}:{server[1]} within {timeout}s")
                sock.settimeout(remaining)
                try:
                    data = sock.recv(MAX_DATAGRAM)
                except socket.timeout:
                    raise LookupTimeoutError(f"no response from {server[0]}:{server[1]} within {timeout}s")
                except OSError as e:
                    raise TransportError(f"UDP exchange with {server[0]}:{server[1]} failed: {e}")
                self.udp_responses += 1
                if accept(data):
                    return data

    def tcp_exchange(self, wire: bytes, server: Address, timeout: float) -> bytes:
        self.tcp_queries += 1
        try:
            with socket.create_connection(server, timeout=timeout) as sock:
                sock.sendall(TCP_LENGTH.pack(len(wire)) + wire)
                (length,) = TCP_LENGTH.unpack(self._recv_exact(sock, TCP_LENGTH.size))
                return self._recv_exact(sock, length)
        except socket.timeout:
            raise LookupTimeoutError(f"TCP exchange with {server[0]}:{server[1]} timed out after {timeout}s")
        except OSError as e:
            raise TransportError(f"TCP exchange with {server[0]}:{server[1]} failed: {e}")

    @staticmethod
    def _recv_exact(sock: socket.socket, count: int) -> bytes:
        chunks = bytearray()
        while len(chunks) < count:
            chunk = sock.recv(count - len(chunks))
            if not chunk:
                raise TransportError(f"connection closed after {len(chunks)} of {count} octets")
            chunks += chunk
        return bytes(chunks)


Responder = Callable[[bytes, Optional[int]], Optional[bytes]]


class InMemoryTransport(Transport):
    """
    Hands queries straight to a responder(wire, udp_budget) callable

    udp_budget is passed for UDP exchanges and None for TCP, mirroring the
    repository server. A None reply over UDP behaves like a lost datagram.
    """

    def __init__(self, responder: Responder, udp_budget: int = 4096):
        super().__init__()
        self.responder = responder
        self.udp_budget = udp_budget

    def udp_exchange(self, wire: bytes, server: Address, timeout: float, accept: Accept) -> bytes:
        self.udp_queries += 1
        reply = self.responder(wire, self.udp_budget)
        if reply is None:
            raise LookupTimeoutError("no response (dropped)")
        self.udp_responses += 1
        if not accept(reply):
            raise LookupTimeoutError("only non-matching responses arrived")
        return reply

    def tcp_exchange(self, wire: bytes, server: Address, timeout: float) -> bytes:
        self.tcp_queries += 1
        reply = self.responder(wire, None)
        if reply is None:
            raise TransportError("connection closed without a response")
        return reply
