"""Entropy sources: seeded pseudorandom, remote quantum, byte replay, and mixes.

Every source hands out :class:`UnitDraw` values in [0, 1).  Quantum-backed
sources turn 7 bytes into 53 bits and divide by 2**53.  :class:`MixedSource`
picks the quantum source with probability ``p`` using a coin drawn from the
pseudo stream, so a quantum outage never stalls selection.

The pseudo generator is CPython's ``random.Random`` (Mersenne Twister,
19937-bit state); ``random()`` output is stable across Python versions for a
given integer seed.
"""

from __future__ import annotations

import json
import logging
import math
import os
import random
import time
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import requests

log = logging.getLogger(__name__)

PSEUDO = "pseudo"
QUANTUM = "quantum"

DEFAULT_ENDPOINT = "https://qrng.anu.edu.au/API/jsonI.php"
ENDPOINT_ENV = "QCOMPOSE_QRNG_ENDPOINT"

FALLBACK_FAIL = "fail"
FALLBACK_USE_PSEUDO = "use_pseudo"

BYTES_PER_DRAW = 7
MIX_PRESETS = (0.0, 0.05, 0.15, 0.25)
DEFAULT_MIX_RATIO = 0.15


class EntropyUnavailable(RuntimeError):
    """No value can be served under the configured fallback policy."""


class QuantumFetchError(RuntimeError):
    """A quantum byte request failed (timeout, bad status, malformed body, exhausted replay)."""


@dataclass(frozen=True)
class UnitDraw:
    value: float
    origin: str


@dataclass
class EntropyStats:
    pseudo_draws: int = 0
    quantum_draws: int = 0
    quantum_fetch_failures: int = 0
    fallback_events: int = 0

    @property
    def total(self) -> int:
        return self.pseudo_draws + self.quantum_draws

    @property
    def quantum_fraction(self) -> float:
        return self.quantum_draws / self.total if self.total else 0.0

    def snapshot(self) -> dict:
        return asdict(self)


def check_mix_ratio(p: float) -> float:
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise ValueError(f"mix ratio must be in [0, 1], got {p}")
    return float(p)


def bytes_to_unit(data: bytes) -> float:
    """Map 7 bytes to [0, 1) using their top 53 bits."""
    if len(data) != BYTES_PER_DRAW:
        raise ValueError(f"need {BYTES_PER_DRAW} bytes, got {len(data)}")
    return (int.from_bytes(data, "big") >> 3) / 9007199254740992.0


@dataclass
class QuantumClientConfig:
    endpoint_url: str = DEFAULT_ENDPOINT
    block_size: int = 1024
    low_watermark: int = 256
    request_timeout: float = 10.0
    fallback_policy: str = FALLBACK_USE_PSEUDO

    def __post_init__(self):
        if not 1 <= self.block_size <= 1024:
            raise ValueError(f"block_size must be in 1..1024, got {self.block_size}")
        if not 0 <= self.low_watermark < self.block_size:
            raise ValueError("low_watermark must be below block_size")
        if self.fallback_policy not in (FALLBACK_FAIL, FALLBACK_USE_PSEUDO):
            raise ValueError(f"unknown fallback policy {self.fallback_policy!r}")

    @classmethod
    def from_env(cls, **overrides) -> "QuantumClientConfig":
        if "endpoint_url" not in overrides and os.environ.get(ENDPOINT_ENV):
            overrides["endpoint_url"] = os.environ[ENDPOINT_ENV]
        return cls(**overrides)


class PseudoSource:
    origin = PSEUDO

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def next_unit(self) -> UnitDraw:
        return UnitDraw(self._rng.random(), PSEUDO)


class _ByteBackedSource:
    """Quantum-origin unit draws assembled from a byte supply."""

    origin = QUANTUM
    fetch_failures = 0

    def take(self, count: int) -> bytes:
        raise NotImplementedError

    def next_unit(self) -> UnitDraw:
        return UnitDraw(bytes_to_unit(self.take(BYTES_PER_DRAW)), QUANTUM)


class QuantumClient(_ByteBackedSource):
    """Buffered HTTP client for an ANU-style QRNG endpoint.

    Requests ``GET <endpoint>?length=<block_size>&type=uint8`` and expects a
    JSON body ``{"success": true, "data": [0..255, ...]}``.  The buffer is
    topped up by one block whenever it falls below ``low_watermark``.
    """

    def __init__(
        self,
        config: Optional[QuantumClientConfig] = None,
        *,
        audit_path: Optional[Path] = None,
        record_path: Optional[Path] = None,
        session: Optional[requests.Session] = None,
    ):
        self.config = config or QuantumClientConfig.from_env()
        self.audit_path = Path(audit_path) if audit_path else None
        self.record_path = Path(record_path) if record_path else None
        self._session = session or requests.Session()
        self._buffer = bytearray()
        self.requests = 0
        self.fetch_failures = 0
        self.bytes_received = 0
        self.latencies: list = []

    def _audit(self, nbytes: int, outcome: str, latency: float) -> None:
        if self.audit_path is None:
            return
        stamp = datetime.now(timezone.utc).isoformat(timespec="milliseconds")
        with open(self.audit_path, "a") as fh:
            fh.write(f"{stamp}\t{nbytes}\t{outcome}\t{latency:.4f}\n")

    def _request_block(self) -> bytes:
        n = self.config.block_size
        self.requests += 1
        start = time.perf_counter()
        try:
            resp = self._session.get(
                self.config.endpoint_url,
                params={"length": n, "type": "uint8"},
                timeout=self.config.request_timeout,
            )
            if resp.status_code != 200:
                raise QuantumFetchError(f"HTTP {resp.status_code}")
            try:
                body = resp.json()
            except ValueError:
                raise QuantumFetchError("response is not JSON") from None
            if not isinstance(body, dict) or body.get("success") is not True:
                raise QuantumFetchError("server reported failure")
            data = body.get("data")
            if not isinstance(data, list) or len(data) != n:
                raise QuantumFetchError(f"expected {n} values")
            if not all(isinstance(v, int) and 0 <= v <= 255 for v in data):
                raise QuantumFetchError("values outside 0..255")
            block = bytes(data)
        except requests.RequestException as exc:
            latency = time.perf_counter() - start
            self.fetch_failures += 1
            self._audit(0, f"error:{type(exc).__name__}", latency)
            raise QuantumFetchError(str(exc)) from exc
        except QuantumFetchError as exc:
            latency = time.perf_counter() - start
            self.fetch_failures += 1
            self._audit(0, f"error:{exc}", latency)
            raise
        latency = time.perf_counter() - start
        self.latencies.append(latency)
        self.bytes_received += len(block)
        self._audit(len(block), "ok", latency)
        if self.record_path is not None:
            with open(self.record_path, "ab") as fh:
                fh.write(block)
        return block

    def take(self, count: int) -> bytes:
        """Return exactly ``count`` bytes, refilling in whole blocks."""
        if count < 1:
            raise ValueError("count must be >= 1")
        while len(self._buffer) < count:
            self._buffer += self._request_block()
        out = bytes(self._buffer[:count])
        del self._buffer[:count]
        if len(self._buffer) < self.config.low_watermark:
            try:
                self._buffer += self._request_block()
            except QuantumFetchError:
                log.debug("prefetch failed; %d bytes still buffered", len(self._buffer))
        return out

    fetch = take


def quantum_fetch(client: QuantumClient, count: int) -> bytes:
    return client.take(count)


class ReplaySource(_ByteBackedSource):
    """Serves bytes from a recorded file, in order, starting at ``start``."""

    def __init__(self, path, start: int = 0, stop: Optional[int] = None):
        self.path = Path(path)
        data = self.path.read_bytes()
        self._data = data[start:stop]
        self._pos = 0
        self.fetch_failures = 0

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def take(self, count: int) -> bytes:
        if self._pos + count > len(self._data):
            self.fetch_failures += 1
            raise QuantumFetchError(f"replay file {self.path.name} exhausted")
        out = self._data[self._pos:self._pos + count]
        self._pos += count
        return out


class StaticByteSource(_ByteBackedSource):
    """In-memory byte supply; mostly for tests and examples."""

    def __init__(self, data: bytes):
        self._data = bytes(data)
        self._pos = 0
        self.fetch_failures = 0

    def take(self, count: int) -> bytes:
        if self._pos + count > len(self._data):
            self.fetch_failures += 1
            raise QuantumFetchError("static byte supply exhausted")
        out = self._data[self._pos:self._pos + count]
        self._pos += count
        return out


class MixedSource:
    """Serves quantum draws with probability ``p``, pseudo draws otherwise."""

    def __init__(self, pseudo: PseudoSource, quantum=None, p: float = 0.0, fallback_policy: Optional[str] = None):
        self.pseudo = pseudo
        self.quantum = quantum
        self.p = check_mix_ratio(p)
        if p > 0 and quantum is None:
            raise ValueError("a quantum source is required when p > 0")
        if fallback_policy is None:
            config = getattr(quantum, "config", None)
            fallback_policy = config.fallback_policy if config else FALLBACK_USE_PSEUDO
        self.fallback_policy = fallback_policy
        self.stats = EntropyStats()

    def next_unit(self) -> UnitDraw:
        coin = self.pseudo.next_unit().value
        if coin < self.p:
            try:
                draw = self.quantum.next_unit()
            except QuantumFetchError as exc:
                self.stats.quantum_fetch_failures = self.quantum.fetch_failures
                if self.fallback_policy == FALLBACK_FAIL:
                    raise EntropyUnavailable(str(exc)) from exc
                self.stats.fallback_events += 1
            else:
                self.stats.quantum_fetch_failures = self.quantum.fetch_failures
                self.stats.quantum_draws += 1
                return draw
        self.stats.pseudo_draws += 1
        return self.pseudo.next_unit()


def next_unit(source) -> UnitDraw:
    return source.next_unit()


def next_int_below(source, n: int) -> int:
    """floor(n * u) for a fresh unit draw u; the generalised ``Int(n * Rnd)``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return min(int(n * source.next_unit().value), n - 1)


def mixed_next(pseudo, quantum, p: float) -> UnitDraw:
    """One-off mixed draw; long runs should hold a :class:`MixedSource` to keep stats."""
    return MixedSource(pseudo, quantum, p).next_unit()


def write_replay_file(path, nbytes: int, seed: int) -> Path:
    """Write ``nbytes`` deterministic bytes; a stand-in recording for offline runs."""
    path = Path(path)
    path.write_bytes(random.Random(seed).randbytes(nbytes))
    return path


def describe_source(source) -> str:
    if isinstance(source, QuantumClient):
        return json.dumps({"kind": "http", "endpoint": source.config.endpoint_url})
    if isinstance(source, ReplaySource):
        return json.dumps({"kind": "replay", "path": source.path.name})
    return type(source).__name__
