"""
Global configuration file
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Zone publication
ORIGIN = os.getenv('CERTDNS_ORIGIN', 'polito.it')
ZONE_PATH = os.getenv('CERTDNS_ZONE_PATH', 'zones/certdns.db')
DEFAULT_TTL = int(os.getenv('CERTDNS_DEFAULT_TTL', '86400'))  # TTL of the example CERT RR
PROFILE = os.getenv('CERTDNS_PROFILE', 'generic')  # 'generic' or 'polito'

# SOA / NS boilerplate, labels relative to the origin
PRIMARY_NS = os.getenv('CERTDNS_PRIMARY_NS', 'ns1')
HOSTMASTER = os.getenv('CERTDNS_HOSTMASTER', 'hostmaster')
INITIAL_SERIAL = 1
SOA_REFRESH = 3600
SOA_RETRY = 600
SOA_EXPIRE = 604800
SOA_MINIMUM = 300

# Repository server
LISTEN = os.getenv('CERTDNS_LISTEN', '127.0.0.1:5353')
MAX_UDP_PAYLOAD = int(os.getenv('CERTDNS_MAX_UDP', '4096'))
RELOAD_INTERVAL = float(os.getenv('CERTDNS_RELOAD_INTERVAL', '1.0'))  # seconds between zone file polls

# Resolver client
EDNS_PAYLOAD = int(os.getenv('CERTDNS_EDNS_PAYLOAD', '4096'))
QUERY_TIMEOUT = float(os.getenv('CERTDNS_TIMEOUT', '3.0'))
UDP_RETRIES = int(os.getenv('CERTDNS_UDP_RETRIES', '2'))

# Logging
LOG_LEVEL = os.getenv('CERTDNS_LOG_LEVEL', 'INFO')
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
