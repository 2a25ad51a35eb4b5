from __future__ import annotations

import io

import pytest
from fastapi.testclient import TestClient
from PIL import Image

from vcot_sidecar.app import create_app
from vcot_sidecar.config import SidecarConfig


def png_bytes(color=(40, 90, 200), size=(16, 16)) -> bytes:
    buf = io.BytesIO()
    Image.new("RGB", size, color).save(buf, format="PNG")
    return buf.getvalue()


@pytest.fixture(scope="session")
def client() -> TestClient:
    return TestClient(create_app(SidecarConfig()))
