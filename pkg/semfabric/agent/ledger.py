"""Bandwidth ledger: exact byte counts of what crossed the wire."""

import math
import threading
from dataclasses import dataclass, asdict
from typing import Dict

DEFAULT_CHARS_PER_TOKEN = 4


def estimate_tokens(text: str, chars_per_token: int = DEFAULT_CHARS_PER_TOKEN) -> int:
    """ceil(chars / chars_per_token)."""
    return math.ceil(len(text) / chars_per_token)


@dataclass
class BandwidthLedger:
    """Byte totals per traffic class; total is always their sum."""
    resolver_bytes: int = 0
    source_request_bytes: int = 0
    source_response_bytes: int = 0
    baseline_bytes: int = 0

    def __post_init__(self):
        self._lock = threading.Lock()

    @property
    def total(self) -> int:
        return (self.resolver_bytes + self.source_request_bytes
                + self.source_response_bytes + self.baseline_bytes)

    @property
    def transferred(self) -> int:
        """Bytes moved by chunk retrieval (everything but the baseline)."""
        return self.resolver_bytes + self.source_request_bytes + self.source_response_bytes

    def add_resolver(self, request_bytes: int, response_bytes: int):
        with self._lock:
            self.resolver_bytes += request_bytes + response_bytes

    def add_source(self, request_bytes: int, response_bytes: int):
        with self._lock:
            self.source_request_bytes += request_bytes
            self.source_response_bytes += response_bytes

    def add_baseline(self, nbytes: int):
        with self._lock:
            self.baseline_bytes += nbytes

    def to_dict(self) -> Dict:
        d = asdict(self)
        d["total"] = self.total
        return d
