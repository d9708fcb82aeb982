"""
DNS protocol tables: record types, classes, rcodes and CERT mnemonics
"""

# Resource record types
TYPE_NS = 2
TYPE_SOA = 6
TYPE_CERT = 37
TYPE_OPT = 41               # EDNS0 pseudo-record
TYPE_ANY = 255

TYPE_NAMES = {
    TYPE_NS: 'NS',
    TYPE_SOA: 'SOA',
    TYPE_CERT: 'CERT',
    TYPE_OPT: 'OPT',
    TYPE_ANY: 'ANY',
}

# Classes
CLASS_IN = 1
CLASS_CH = 3
CLASS_HS = 4
CLASS_ANY = 255
CLASS_NAMES = {CLASS_IN: 'IN', CLASS_CH: 'CH', CLASS_HS: 'HS', CLASS_ANY: 'ANY'}

# Opcodes and response codes
OPCODE_QUERY = 0
RCODE_NOERROR = 0
RCODE_FORMERR = 1
RCODE_SERVFAIL = 2
RCODE_NXDOMAIN = 3
RCODE_NOTIMP = 4
RCODE_REFUSED = 5

RCODE_NAMES = {
    RCODE_NOERROR: 'NOERROR',
    RCODE_FORMERR: 'FORMERR',
    RCODE_SERVFAIL: 'SERVFAIL',
    RCODE_NXDOMAIN: 'NXDOMAIN',
    RCODE_NOTIMP: 'NOTIMP',
    RCODE_REFUSED: 'REFUSED',
}

# CERT certificate types
CERT_TYPE_PKIX = 1          # X.509 as profiled by PKIX
CERT_TYPE_SPKI = 2
CERT_TYPE_PGP = 3
CERT_TYPE_URI = 253         # URI pointing at the certificate
CERT_TYPE_OID = 254         # type identified by an OID prefix in the payload

CERT_TYPE_MNEMONICS = {
    CERT_TYPE_PKIX: 'PKIX',
    CERT_TYPE_SPKI: 'SPKI',
    CERT_TYPE_PGP: 'PGP',
    CERT_TYPE_URI: 'URI',
    CERT_TYPE_OID: 'OID',
}

# CERT / KEY / SIG algorithm numbers; 0 means outside the DNSSEC algorithm list
ALGORITHM_NONE = 0
ALGORITHM_RSAMD5 = 1
ALGORITHM_DH = 2
ALGORITHM_DSA = 3
ALGORITHM_ECC = 4
ALGORITHM_RSASHA1 = 5

ALGORITHM_MNEMONICS = {
    ALGORITHM_RSAMD5: 'RSAMD5',
    ALGORITHM_DH: 'DH',
    ALGORITHM_DSA: 'DSA',
    ALGORITHM_ECC: 'ECC',
    ALGORITHM_RSASHA1: 'RSASHA1',
}

# Certificate signature algorithm OID -> CERT algorithm field
SIGNATURE_ALGORITHMS = {
    '1.2.840.113549.1.1.4': ALGORITHM_RSAMD5,   # md5WithRSAEncryption
    '1.2.840.113549.1.1.5': ALGORITHM_RSASHA1,  # sha1WithRSAEncryption
    '1.2.840.10040.4.3': ALGORITHM_DSA,         # dsa-with-sha1
}

# Message size limits (octets)
CLASSIC_UDP_LIMIT = 512
EDNS_MAX_PAYLOAD = 4096
ETHERNET_TCP_PAYLOAD = 1460   # 1500 MTU - 20 IP - 20 TCP
ETHERNET_UDP_PAYLOAD = 1472   # 1500 MTU - 20 IP - 8 UDP
MAX_TCP_MESSAGE = 65535       # two-octet length prefix
