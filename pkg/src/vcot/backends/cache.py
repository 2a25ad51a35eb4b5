"""Content-addressed response cache keyed by canonical request bytes."""

from __future__ import annotations

import hashlib
import json
import os
import threading
from pathlib import Path
from typing import Callable

from .wire import canonical_json


def cache_key(profile_id: str, endpoint_name: str, canonical_request: bytes) -> str:
    """SHA-256 over profile id, endpoint name, and the canonical request."""
    h = hashlib.sha256()
    h.update(profile_id.encode("utf-8"))
    h.update(endpoint_name.encode("utf-8"))
    h.update(canonical_request)
    return h.hexdigest()


class ResponseCache:
    """Directory of JSON responses, one file per cache key.

    Writes are atomic (tmp file + rename) and serialized per process; a
    corrupt entry is evicted and refetched rather than surfaced.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> dict | None:
        path = self._path(key)
        with self._lock:
            try:
                with open(path, "rb") as fh:
                    value = json.loads(fh.read().decode("utf-8"))
            except FileNotFoundError:
                self.misses += 1
                return None
            except (OSError, ValueError, UnicodeDecodeError):
                # Corrupt entry: evict and treat as a miss.
                try:
                    path.unlink()
                except OSError:
                    pass
                self.misses += 1
                return None
            self.hits += 1
            return value

    def put(self, key: str, response: dict) -> None:
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        with self._lock:
            with open(tmp, "wb") as fh:
                fh.write(canonical_json(response))
            os.replace(tmp, path)


def cached_call(
    cache: ResponseCache | None,
    profile_id: str,
    endpoint_name: str,
    request: dict,
    fetch: Callable[[], dict],
) -> dict:
    """Serve ``request`` from the cache, invoking ``fetch`` only on a miss."""
    if cache is None:
        return fetch()
    key = cache_key(profile_id, endpoint_name, canonical_json(request))
    hit = cache.get(key)
    if hit is not None:
        return hit
    response = fetch()
    cache.put(key, response)
    return response
