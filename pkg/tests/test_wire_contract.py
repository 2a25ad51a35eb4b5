from __future__ import annotations

import base64
import json
from pathlib import Path

import httpx
import pytest
from fastapi.testclient import TestClient

from vcot.backends import (
    BackendProfile,
    HttpModelService,
    MockModelService,
    ModelGateway,
    canonical_json,
    wire,
)
from vcot.errors import BackendUnavailableError, ProtocolError
from vcot.service import create_app

GOLDEN = Path(__file__).parent / "golden"
TINY_PNG_B64 = (
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAIAAACQd1PeAAAADElEQVR4nGP4z8AAAAMBAQDJ/pLvAAAAAElFTkSuQmCC"
)


def http_profile(**overrides) -> BackendProfile:
    base = dict(
        id="svc",
        text_endpoint="http://testserver/v1/generate",
        image_endpoint="http://testserver/v1/image",
        caption_endpoint="http://testserver/v1/caption",
        embed_endpoint="http://testserver/v1/embed",
        retry_limit=2,
        retry_backoff=0.0,
        embed_dim=64,
    )
    base.update(overrides)
    return BackendProfile(**base)


class TestGoldenRequests:
    """Serialized requests for all four endpoints are pinned byte-exactly."""

    @pytest.mark.parametrize(
        "name,request_obj",
        [
            (
                "generate_request.json",
                wire.generate_request(
                    prompt="bridge the gap between packing and arriving",
                    temperature=0.5,
                    n=4,
                    max_tokens=256,
                    logprobs=True,
                    seed=7,
                ),
            ),
            ("image_request.json", wire.image_request("a quiet harbor at dawn", 4, 7)),
            ("caption_request.json", wire.caption_request(TINY_PNG_B64)),
            (
                "embed_request.json",
                wire.embed_request(
                    [
                        {"kind": "text", "text": "mix the batter"},
                        {"kind": "image", "png_base64": TINY_PNG_B64},
                    ]
                ),
            ),
        ],
    )
    def test_byte_identical_to_golden(self, name, request_obj):
        assert canonical_json(request_obj) == (GOLDEN / name).read_bytes()

    def test_canonical_form_is_sorted_and_compact(self):
        data = canonical_json({"b": 1, "a": [1, 2], "c": {"z": 0.5, "y": "é"}})
        assert data == '{"a":[1,2],"b":1,"c":{"y":"é","z":0.5}}'.encode("utf-8")
        # key order must not leak from insertion order
        flipped = canonical_json({"c": {"y": "é", "z": 0.5}, "a": [1, 2], "b": 1})
        assert flipped == data


class TestHttpClientAgainstService:
    """The HTTP gateway round-trips through the FastAPI wire service."""

    @pytest.fixture
    def gateway(self) -> ModelGateway:
        client = TestClient(create_app(MockModelService()))
        service = HttpModelService(http_profile(), client=client)
        return ModelGateway(http_profile(), service=service)

    def test_generate_matches_in_process_mock(self, gateway, mock_gateway):
        over_http = gateway.generate_text("P", temperature=0.0, n=1)
        in_process = mock_gateway.generate_text("P", temperature=0.0, n=1)
        assert over_http == in_process

    def test_image_caption_embed_round_trip(self, gateway):
        asset = gateway.generate_image("a red barn", n=1, seed=0)[0]
        assert gateway.caption_image(asset) == "a picture of a red barn"
        embs = gateway.embed([("image", asset), ("text", "a red barn")])
        assert embs[0].vector == embs[1].vector

    def test_bearer_token_enforced(self):
        app = create_app(MockModelService(), token="sekrit")
        denied = HttpModelService(http_profile(retry_limit=0), client=TestClient(app))
        with pytest.raises(BackendUnavailableError):
            denied.handle(wire.GENERATE, wire.generate_request("p", 0.0, 1, 16, False, 0))
        allowed = HttpModelService(
            http_profile(retry_limit=0, bearer_token="sekrit"), client=TestClient(app)
        )
        response = allowed.handle(wire.GENERATE, wire.generate_request("p", 0.0, 1, 16, False, 0))
        assert response["choices"][0]["text"].startswith("GEN(")


class TestRetries:
    def _flaky_transport(self, failures: int, payload: dict) -> httpx.MockTransport:
        state = {"left": failures, "calls": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            state["calls"] += 1
            if state["left"] > 0:
                state["left"] -= 1
                return httpx.Response(503, json={"error": "warming up"})
            return httpx.Response(200, json=payload)

        transport = httpx.MockTransport(handler)
        transport.state = state
        return transport

    def test_success_after_transient_failures(self):
        payload = {"choices": [{"text": "ok", "token_logprobs": None}]}
        transport = self._flaky_transport(2, payload)
        service = HttpModelService(
            http_profile(retry_limit=2), client=httpx.Client(transport=transport)
        )
        assert service.handle(wire.GENERATE, {"prompt": "p"}) == payload
        assert transport.state["calls"] == 3

    def test_exhausted_retries_raise_backend_unavailable(self):
        transport = self._flaky_transport(10, {})
        service = HttpModelService(
            http_profile(retry_limit=2), client=httpx.Client(transport=transport)
        )
        with pytest.raises(BackendUnavailableError):
            service.handle(wire.GENERATE, {"prompt": "p"})
        assert transport.state["calls"] == 3

    def test_retry_yields_same_cache_entry_as_immediate_success(self, tmp_path):
        from vcot.backends import ResponseCache

        payload = {"choices": [{"text": "stable", "token_logprobs": None}]}
        flaky = HttpModelService(
            http_profile(retry_limit=3),
            client=httpx.Client(transport=self._flaky_transport(2, payload)),
        )
        immediate = HttpModelService(
            http_profile(retry_limit=3),
            client=httpx.Client(transport=self._flaky_transport(0, payload)),
        )
        request = wire.generate_request("p", 0.0, 1, 16, False, 0)

        gw_a = ModelGateway(http_profile(), service=flaky, cache=ResponseCache(tmp_path / "a"))
        gw_b = ModelGateway(http_profile(), service=immediate, cache=ResponseCache(tmp_path / "b"))
        assert gw_a.generate_text("p", 0.0, 1, max_tokens=16) == gw_b.generate_text(
            "p", 0.0, 1, max_tokens=16
        )
        files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
        files_b = sorted(p.name for p in (tmp_path / "b").iterdir())
        assert files_a == files_b
        assert [(tmp_path / "a" / f).read_bytes() for f in files_a] == [
            (tmp_path / "b" / f).read_bytes() for f in files_b
        ]

    def test_malformed_body_is_protocol_error(self):
        transport = httpx.MockTransport(
            lambda request: httpx.Response(200, content=b"not json")
        )
        service = HttpModelService(
            http_profile(retry_limit=0), client=httpx.Client(transport=transport)
        )
        with pytest.raises(ProtocolError):
            service.handle(wire.GENERATE, {"prompt": "p"})


class TestServiceValidation:
    def test_bad_input_is_400_with_error_body(self):
        client = TestClient(create_app(MockModelService()))
        resp = client.post("/v1/embed", json={"inputs": [{"kind": "text", "text": "!!!"}]})
        assert resp.status_code == 400
        assert "error" in resp.json()

    def test_caption_of_tiny_png_uses_content_hash(self):
        import hashlib

        client = TestClient(create_app(MockModelService()))
        resp = client.post("/v1/caption", json={"png_base64": TINY_PNG_B64})
        raw = base64.b64decode(TINY_PNG_B64)
        assert resp.json()["caption"] == f"a picture of {hashlib.sha256(raw).hexdigest()[:8]}"

    def test_embed_dim_declared(self):
        client = TestClient(create_app(MockModelService()))
        resp = client.post("/v1/embed", json={"inputs": [{"kind": "text", "text": "hello"}]})
        body = resp.json()
        assert body["dim"] == 64
        assert len(body["embeddings"][0]) == 64
