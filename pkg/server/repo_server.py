"""
Repository server: UDP and TCP listeners over a hot-reloaded zone snapshot
"""
import logging
import os
import socket
import socketserver
import struct
import threading
from dataclasses import dataclass
from typing import Optional, Tuple

from config.record_types import CLASSIC_UDP_LIMIT, MAX_TCP_MESSAGE
from config.settings import LISTEN, MAX_UDP_PAYLOAD, RELOAD_INTERVAL, ZONE_PATH
from publisher.zone import Zone
from publisher.zone_parser import read_zone_file
from server.responder import respond

logger = logging.getLogger(__name__)

TCP_LENGTH = struct.Struct('!H')
TCP_IDLE_TIMEOUT = 10.0


class ServerStartupError(RuntimeError):
    pass


def parse_listen(listen: str) -> Tuple[str, int]:
    """
    Split 'host:port' (or '[v6]:port') into its parts

    Args:
        listen: Listen address

    Returns:
        (host, port)
    """
    host, sep, port = listen.rpartition(':')
    if not sep or not port.isdigit():
        raise ValueError(f"listen address {listen!r} must be host:port")
    return host.strip('[]') or '127.0.0.1', int(port)


@dataclass(frozen=True)
class ServerConfig:
    host: str = '127.0.0.1'
    port: int = 5353
    zone_path: str = ZONE_PATH
    max_udp_payload: int = MAX_UDP_PAYLOAD
    reload_interval: float = RELOAD_INTERVAL

    def __post_init__(self):
        if not CLASSIC_UDP_LIMIT <= self.max_udp_payload <= 0xFFFF:
            raise ValueError(f"max_udp_payload must be in 512-65535, got {self.max_udp_payload}")
        if not 0 <= self.port <= 0xFFFF:
            raise ValueError(f"port {self.port} out of range")

    @classmethod
    def from_listen(cls, listen: str = LISTEN, **kwargs) -> 'ServerConfig':
        host, port = parse_listen(listen)
        return cls(host=host, port=port, **kwargs)


class ZoneWatcher:
    """
    Holds the current zone snapshot and swaps it when the file's serial changes

    The file is polled for (mtime, size, inode) changes; a changed file that
    fails to parse keeps the previous snapshot in service.
    """

    def __init__(self, path: str):
        self.path = path
        try:
            self._stamp = self._file_stamp()
            self._zone = read_zone_file(path)
        except (OSError, ValueError) as e:
            raise ServerStartupError(f"cannot load zone file {path}: {e}")
        logger.info(f"Loaded zone {self._zone.origin} serial {self._zone.serial} "
                    f"({len(self._zone.entries)} certificates)")

    @property
    def zone(self) -> Zone:
        return self._zone

    def _file_stamp(self) -> tuple:
        st = os.stat(self.path)
        return st.st_mtime_ns, st.st_size, st.st_ino

    def poll(self) -> bool:
        """
        Check the zone file once

        Returns:
            True when a new snapshot was installed
        """
        try:
            stamp = self._file_stamp()
        except OSError as e:
            logger.warning(f"Zone file {self.path} unavailable: {e}")
            return False
        if stamp == self._stamp:
            return False
        self._stamp = stamp

        try:
            zone = read_zone_file(self.path)
        except (OSError, ValueError) as e:
            logger.warning(f"Keeping serial {self._zone.serial}, reload failed: {e}")
            return False
        if zone.serial == self._zone.serial:
            logger.debug(f"Zone file touched but serial still {zone.serial}")
            return False

        self._zone = zone
        logger.info(f"Reloaded zone {zone.origin} serial {zone.serial} ({len(zone.entries)} certificates)")
        return True

    def run(self, stop: threading.Event, interval: float) -> None:
        while not stop.wait(interval):
            self.poll()


class _UdpHandler(socketserver.BaseRequestHandler):
    def handle(self):
        data, sock = self.request
        repo = self.server.repo
        try:
            reply = respond(data, repo.watcher.zone, repo.config.max_udp_payload, repo.config.max_udp_payload)
        except Exception:
            logger.exception(f"Failed to answer datagram from {self.client_address}")
            return
        if reply is not None:
            sock.sendto(reply, self.client_address)


class _TcpHandler(socketserver.StreamRequestHandler):
    timeout = TCP_IDLE_TIMEOUT

    def _read_exact(self, count: int) -> Optional[bytes]:
        data = self.rfile.read(count)
        return data if len(data) == count else None

    def handle(self):
        repo = self.server.repo
        while True:
            try:
                prefix = self._read_exact(TCP_LENGTH.size)
                if prefix is None:
                    return
                (length,) = TCP_LENGTH.unpack(prefix)
                message = self._read_exact(length)
                if message is None:
                    return
            except (socket.timeout, ConnectionError):
                return

            try:
                reply = respond(message, repo.watcher.zone, None, repo.config.max_udp_payload)
            except Exception:
                logger.exception(f"Failed to answer TCP query from {self.client_address}")
                return
            if reply is None:
                return
            if len(reply) > MAX_TCP_MESSAGE:
                logger.error(f"Response of {len(reply)} octets does not fit TCP framing")
                return
            try:
                self.wfile.write(TCP_LENGTH.pack(len(reply)) + reply)
                self.wfile.flush()
            except ConnectionError:
                return


class _Listener:
    """Common setup of the UDP and TCP socketserver classes"""
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address, handler, repo: 'RepoServer'):
        self.repo = repo
        self.address_family = socket.AF_INET6 if ':' in address[0] else socket.AF_INET
        super().__init__(address, handler)


class _UdpListener(_Listener, socketserver.ThreadingUDPServer):
    max_packet_size = 65535


class _TcpListener(_Listener, socketserver.ThreadingTCPServer):
    pass


class RepoServer:
    """
    Authoritative UDP+TCP responder for one zone file

    Port 0 binds an ephemeral UDP port and then TCP on the same number.
    Usable as a context manager: started on enter, stopped on exit.
    """

    def __init__(self, config: ServerConfig):
        self.config = config
        self.watcher = ZoneWatcher(config.zone_path)
        self._stop = threading.Event()
        self._threads = []
        self._running = False

        address = (config.host, config.port)
        try:
            self._udp = _UdpListener(address, _UdpHandler, self)
        except OSError as e:
            raise ServerStartupError(f"cannot bind UDP {config.host}:{config.port}: {e}")
        try:
            self._tcp = _TcpListener((config.host, self._udp.server_address[1]), _TcpHandler, self)
        except OSError as e:
            self._udp.server_close()
            raise ServerStartupError(f"cannot bind TCP {config.host}:{self._udp.server_address[1]}: {e}")

    @property
    def address(self) -> Tuple[str, int]:
        return self.config.host, self._udp.server_address[1]

    def start(self) -> None:
        targets = (
            ('udp', self._udp.serve_forever, ()),
            ('tcp', self._tcp.serve_forever, ()),
            ('reload', self.watcher.run, (self._stop, self.config.reload_interval)),
        )
        self._running = True
        for name, target, args in targets:
            thread = threading.Thread(target=target, args=args, name=f"certdns-{name}", daemon=True)
            thread.start()
            self._threads.append(thread)
        host, port = self.address
        logger.info(f"✅ Serving {self.watcher.zone.origin} on {host}:{port} (UDP+TCP, max UDP {self.config.max_udp_payload})")

    def stop(self) -> None:
        self._stop.set()
        for listener in (self._udp, self._tcp):
            # shutdown blocks forever unless serve_forever is running
            if self._running:
                listener.shutdown()
            listener.server_close()
        self._running = False
        for thread in self._threads:
            thread.join(timeout=2.0)
        self._threads = []
        logger.info("Server stopped")

    def wait(self) -> None:
        self._stop.wait()

    def __enter__(self) -> 'RepoServer':
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def serve(config: ServerConfig) -> None:
    """
    Run the repository server until interrupted

    Args:
        config: Listen address, zone file and UDP cap
    """
    server = RepoServer(config)
    server.start()
    try:
        server.wait()
    except KeyboardInterrupt:
        logger.info("Interrupted")
    finally:
        server.stop()
