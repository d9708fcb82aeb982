"""
certdns command line
Publish certificates into a zone file, serve the zone, and fetch certificates back
"""
import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import argparse
import logging
from typing import List, Optional

from client import exceptions as client_errors
from client.resolver_client import LookupRequest, LookupTarget, ResolverClient, TransportPolicy, save_certificates
from client.transport import InMemoryTransport
from codec.keytag import compute_keytag
from codec.names import DomainName
from config.settings import (
    DEFAULT_TTL,
    EDNS_PAYLOAD,
    LISTEN,
    LOG_FORMAT,
    LOG_LEVEL,
    MAX_UDP_PAYLOAD,
    PROFILE,
    QUERY_TIMEOUT,
    RELOAD_INTERVAL,
    UDP_RETRIES,
    ZONE_PATH,
)
from identity.cert_identity import extract_identity
from pipelines.publish_pipeline import load_certificate, publish, unpublish
from publisher import zone as zone_model
from publisher.entry_builder import PublishProfile, build_entry, decide_owner, transport_report
from publisher.zone_parser import read_zone_file
from server.repo_server import ServerConfig, parse_listen, serve
from server.responder import respond

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_NOT_FOUND = 3  # argparse exits with 2 on usage errors


def cmd_publish(args) -> int:
    profile = PublishProfile.from_settings(args.profile, args.deny_list)
    certs = [load_certificate(path) for path in args.cert]
    entries = publish(certs, args.zone, args.ttl, profile, args.origin)
    for entry in entries:
        print(f"{entry.owner} {entry.record.type_text} {entry.record.key_tag} {entry.record.algorithm_text}")
    return EXIT_OK


def cmd_remove(args) -> int:
    removed = unpublish(args.zone, DomainName.from_text(args.owner), args.keytag)
    print(f"removed {removed}")
    return EXIT_OK


def cmd_keytag(args) -> int:
    if args.raw:
        with open(args.file, 'rb') as f:
            data = f.read()
    else:
        data = extract_identity(load_certificate(args.file)).spki_der
    print(compute_keytag(data))
    return EXIT_OK


def cmd_map(args) -> int:
    decision = decide_owner(load_certificate(args.cert), PublishProfile.from_settings(args.profile))
    print(decision.describe())
    return EXIT_OK


def cmd_inspect(args) -> int:
    for line in extract_identity(load_certificate(args.cert)).describe():
        print(line)
    return EXIT_OK


def cmd_sizes(args) -> int:
    profile = PublishProfile.from_settings(args.profile)
    for path in args.cert:
        report = transport_report(build_entry(load_certificate(path), DEFAULT_TTL, profile))
        print(' '.join(f"{key}={value}" for key, value in report.items()))
    return EXIT_OK


def cmd_zone_list(args) -> int:
    zone = read_zone_file(args.zone)
    print(f"; {zone.origin} serial {zone.serial}")
    for entry in zone.sorted_entries():
        record = entry.record
        print(f"{entry.owner} {record.type_text} {record.key_tag} {record.algorithm_text} {len(record.payload)}")
    return EXIT_OK


def cmd_serve(args) -> int:
    host, port = parse_listen(args.listen)
    serve(ServerConfig(host, port, args.zone, args.max_udp, args.reload_interval))
    return EXIT_OK


def cmd_fetch(args) -> int:
    if args.zone:
        # offline: answer from the zone file without any socket
        zone = read_zone_file(args.zone)
        client = ResolverClient(InMemoryTransport(lambda wire, budget: respond(wire, zone, budget)))
    else:
        client = ResolverClient()

    request = LookupRequest(
        target=LookupTarget.parse(args.target),
        server=parse_listen(args.server),
        edns_payload=None if args.no_edns else args.edns,
        transport_policy=TransportPolicy.TCP_ONLY if args.tcp else TransportPolicy.UDP_THEN_TCP,
        key_tag=args.keytag,
        timeout=args.timeout,
        udp_retries=args.retries,
    )
    result = client.lookup(request)
    for record in result.records:
        print(f"{result.owner} {record.type_text} {record.key_tag} {record.algorithm_text} {len(record.payload)}")
    if args.out:
        save_certificates(result, args.out)
    logger.info(f"{result.transport_used.value.upper()} response of {result.message_size} octets"
                f"{' after TCP retry' if result.retried_over_tcp else ''}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='certdns', description='DNS certificate repository')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('publish', help='Publish certificates into a zone file')
    p.add_argument('--cert', nargs='+', required=True, help='DER or PEM certificate files')
    p.add_argument('--zone', default=ZONE_PATH, help='Zone file (created when missing)')
    p.add_argument('--ttl', type=int, default=DEFAULT_TTL)
    p.add_argument('--profile', choices=['generic', 'polito'], default=PROFILE)
    p.add_argument('--deny-list', help='File of owner names / e-mail addresses never to publish')
    p.add_argument('--origin', help='Apex of a newly created zone')
    p.set_defaults(func=cmd_publish)

    p = sub.add_parser('remove', help='Remove certificates from a zone file')
    p.add_argument('--owner', required=True)
    p.add_argument('--keytag', type=int)
    p.add_argument('--zone', default=ZONE_PATH)
    p.set_defaults(func=cmd_remove)

    p = sub.add_parser('keytag', help="Key tag of a certificate's public key")
    p.add_argument('file')
    p.add_argument('--raw', action='store_true', help='Hash the file octets as they are')
    p.set_defaults(func=cmd_keytag)

    p = sub.add_parser('map', help='Owner name a certificate would be published under')
    p.add_argument('cert')
    p.add_argument('--profile', choices=['generic', 'polito'], default=PROFILE)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser('inspect', help='Dump the identity fields of a certificate')
    p.add_argument('cert')
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser('sizes', help='Response sizes against the transport limits')
    p.add_argument('cert', nargs='+')
    p.add_argument('--profile', choices=['generic', 'polito'], default=PROFILE)
    p.set_defaults(func=cmd_sizes)

    p = sub.add_parser('zone-list', help='List the certificates in a zone file')
    p.add_argument('--zone', default=ZONE_PATH)
    p.set_defaults(func=cmd_zone_list)

    p = sub.add_parser('serve', help='Run the repository server')
    p.add_argument('--listen', default=LISTEN)
    p.add_argument('--zone', default=ZONE_PATH)
    p.add_argument('--max-udp', type=int, default=MAX_UDP_PAYLOAD)
    p.add_argument('--reload-interval', type=float, default=RELOAD_INTERVAL)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser('fetch', help='Retrieve certificates for an e-mail address or host')
    p.add_argument('target')
    p.add_argument('--server', default=LISTEN)
    p.add_argument('--edns', type=int, default=EDNS_PAYLOAD)
    p.add_argument('--no-edns', action='store_true', help='Plain 512-octet UDP')
    p.add_argument('--tcp-only', dest='tcp', action='store_true', help='Skip UDP entirely')
    p.add_argument('--keytag', type=int)
    p.add_argument('--timeout', type=float, default=QUERY_TIMEOUT)
    p.add_argument('--retries', type=int, default=UDP_RETRIES)
    p.add_argument('--out', help='Directory for <owner>.<keytag>.cer files')
    p.add_argument('--zone', help='Answer from this zone file instead of a server')
    p.set_defaults(func=cmd_fetch)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL, format=LOG_FORMAT)

    try:
        return args.func(args)
    except (zone_model.NotFoundError, client_errors.NotFoundError) as e:
        print(f"certdns: not found: {e}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (ValueError, OSError, RuntimeError, client_errors.ResolverError) as e:
        print(f"certdns: {e}", file=sys.stderr)
        return EXIT_DATA_ERROR


if __name__ == "__main__":
    sys.exit(main())
