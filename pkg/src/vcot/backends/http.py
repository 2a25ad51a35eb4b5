"""HTTP client for backends that speak the wire contract."""

from __future__ import annotations

import json
import logging
import time

import httpx

from ..errors import BackendUnavailableError, ProtocolError
from .profile import BackendProfile
from .wire import canonical_json

logger = logging.getLogger(__name__)


class HttpModelService:
    """Posts canonical JSON to the profile's endpoint URLs.

    Non-2xx responses and transport errors are retried with exponential
    backoff up to ``profile.retry_limit`` times; a response that finally
    arrives malformed is a protocol error, not a retry trigger.
    """

    def __init__(self, profile: BackendProfile, client: httpx.Client | None = None):
        self.profile = profile
        headers = {"content-type": "application/json"}
        if profile.bearer_token:
            headers["authorization"] = f"Bearer {profile.bearer_token}"
        self._headers = headers
        self._client = client or httpx.Client(timeout=profile.timeout)

    def handle(self, endpoint: str, request: dict) -> dict:
        url = self.profile.endpoint_for(endpoint)
        body = canonical_json(request)
        attempts = self.profile.retry_limit + 1
        last_failure = ""
        for attempt in range(attempts):
            if attempt:
                delay = self.profile.retry_backoff * 2 ** (attempt - 1)
                logger.debug("retrying %s in %.2fs (%s)", endpoint, delay, last_failure)
                time.sleep(delay)
            try:
                response = self._client.post(url, content=body, headers=self._headers)
            except httpx.HTTPError as exc:
                last_failure = f"transport error: {exc}"
                continue
            if 200 <= response.status_code < 300:
                try:
                    return json.loads(response.content.decode("utf-8"))
                except (ValueError, UnicodeDecodeError) as exc:
                    raise ProtocolError(
                        f"{endpoint} returned non-JSON body: {response.content[:200]!r}"
                    ) from exc
            last_failure = f"HTTP {response.status_code}: {response.text[:200]}"
        raise BackendUnavailableError(
            f"{endpoint} at {url} failed after {attempts} attempts ({last_failure})"
        )

    def close(self) -> None:
        self._client.close()
