"""
Resolver client errors
"""


class ResolverError(Exception):
    pass


class LookupTimeoutError(ResolverError):
    """No matching response before the deadline"""


class TransportError(ResolverError):
    """Socket-level failure other than a timeout (refused, reset, short read)"""


class MalformedResponseError(ResolverError):
    pass


class NotFoundError(ResolverError):
    """
    The server has no CERT data for the owner

    reason is 'NXDOMAIN' (name does not exist) or 'NODATA' (name exists, no
    matching certificate).
    """
    NXDOMAIN = 'NXDOMAIN'
    NODATA = 'NODATA'

    def __init__(self, reason: str, owner: str):
        self.reason = reason
        self.owner = owner
        super().__init__(f"{owner}: {reason}")
