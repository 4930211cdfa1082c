"""Service-level conformance: unit-norm/count/dim over randomized batches,
and the training pipeline's remote client consuming a live instance."""

import random
import socket
import threading
import time

import numpy as np
import pytest
import uvicorn
from fastapi.testclient import TestClient

from embed_service.app import ServiceConfig, create_app

WORDS = "كتاب مدرسة علم بحر شمس قمر سلام قلم alpha beta gamma 42 3.14 نص".split()


def random_text(rng):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randrange(0, 30)))


class TestRandomizedBatches:
    def test_hundred_batches_unit_norm_count_dim(self):
        app = create_app(ServiceConfig(model="hash:96", max_batch=64))
        client = TestClient(app)
        dim = client.get("/info").json()["dim"]
        rng = random.Random(123)
        for batch_no in range(100):
            texts = [random_text(rng) for _ in range(rng.randrange(1, 33))]
            body = client.post("/embed", json={"texts": texts}).json()
            assert len(body["vectors"]) == len(texts), f"batch {batch_no}: count mismatch"
            assert body["dim"] == dim, f"batch {batch_no}: dim drifted"
            for vec in body["vectors"]:
                assert len(vec) == dim
                assert abs(np.linalg.norm(vec) - 1.0) < 1e-4


@pytest.fixture(scope="module")
def live_url():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    app = create_app(ServiceConfig(model="hash:128", port=port, max_batch=256))
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.monotonic() + 10
    while not server.started:
        if time.monotonic() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.05)
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestPrimaryClientIntegration:
    def test_remote_client_consumes_service(self, live_url):
        longdoc = pytest.importorskip("longdoc.embed")
        client = longdoc.RemoteEmbedder(live_url)
        info = client.info
        assert info.name == "hash:128" and info.dim == 128
        rng = random.Random(7)
        for _ in range(20):
            texts = [random_text(rng) for _ in range(rng.randrange(1, 17))]
            vectors = client.embed_batch(texts)
            assert len(vectors) == len(texts)
            for vec in vectors:
                assert vec.shape == (128,)
                assert abs(float(np.linalg.norm(vec)) - 1.0) < 1e-4

    def test_remote_client_surfaces_contract_error(self, live_url):
        longdoc = pytest.importorskip("longdoc.embed")
        client = longdoc.RemoteEmbedder(live_url, expected_dim=64)
        with pytest.raises(longdoc.DimMismatchError):
            client.embed_batch(["x"])
