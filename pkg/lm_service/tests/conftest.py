"""Shared fixtures: a hand-countable training stream and a live server."""

import threading

import pytest

from lm_service.model import TrigramInfillModel
from lm_service.server import FillServer, ServiceState

TINY = "the cat sat on the mat the cat ate the rat a dog sat on a log".split()
TINY_K = 0.5
TINY_VSIZE = 11  # 10 distinct words + the unknown symbol


@pytest.fixture()
def tiny_model():
    return TrigramInfillModel(TINY, k=TINY_K)


@pytest.fixture()
def live_server():
    """A running server with NO model installed yet; tests install one via
    the returned state to exercise the 503 -> 200 transition."""
    state = ServiceState()
    server = FillServer(("127.0.0.1", 0), state)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    try:
        yield f"http://{host}:{port}", state
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)
