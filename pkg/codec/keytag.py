"""
Key tag computation for CERT records
"""
import numpy as np

KEYTAG_MASK = 0xFFFF


def compute_keytag(key: bytes) -> int:
    """
    Compute the two-octet key tag of a key

    Octets at even offsets are added shifted left by eight bits, octets at
    odd offsets are added as they are, then the carry above bit 16 is folded
    back once. The publisher feeds the DER SubjectPublicKeyInfo here.

    Args:
        key: Key octets (any length, including empty)

    Returns:
        Key tag in 0..65535
    """
    octets = np.frombuffer(bytes(key), dtype=np.uint8)
    # uint64 sums stay exact far beyond any key size the repository handles
    high = int(octets[0::2].sum(dtype=np.uint64))
    low = int(octets[1::2].sum(dtype=np.uint64))
    ac = (high << 8) + low
    ac += (ac >> 16) & KEYTAG_MASK
    return ac & KEYTAG_MASK
