"""HTTP backend conformance against the in-repo stub server."""

import base64

import pytest
import requests

from langloop.backends import ChatMessage, HttpBackend, complete
from langloop.errors import BackendUnavailable
from langloop.stubserver import ChatStubServer, validate_chat_body


@pytest.fixture()
def stub():
    with ChatStubServer() as server:
        yield server


def test_stub_echoes_message_count(stub):
    backend = HttpBackend(stub.base_url, model="test-model", max_attempts=1)
    messages = [
        ChatMessage("system", "you are a controller"),
        ChatMessage("user", "hello"),
        ChatMessage("assistant", "hi"),
    ]
    # extend with a final user turn so the request carries 4 messages total
    assert complete(messages + [ChatMessage("user", "again")], backend) == "4"
    assert complete(messages, backend) == "3"


def test_image_request_passes_schema_validation(stub):
    backend = HttpBackend(stub.base_url, model="test-model", max_attempts=1)
    png = b"\x89PNG\r\n\x1a\nfakebytes"
    out = complete(
        [
            ChatMessage("system", "monitor"),
            ChatMessage("user", "what do you see?", images=(png,)),
        ],
        backend,
    )
    assert out == "2"
    body = stub.requests_seen[-1]
    parts = body["messages"][1]["content"]
    assert parts[0] == {"type": "text", "text": "what do you see?"}
    url = parts[1]["image_url"]["url"]
    prefix = "data:image/png;base64,"
    assert url.startswith(prefix)
    assert base64.b64decode(url[len(prefix):]) == png


def test_stub_rejects_malformed_bodies(stub):
    bad_bodies = [
        {"messages": [{"role": "user", "content": "x"}]},  # no model
        {"model": "m", "messages": []},
        {"model": "m", "messages": [{"role": "wizard", "content": "x"}]},
        {"model": "m", "messages": [{"role": "user", "content": "x"}], "stream": True},
        {"model": "m", "messages": [{"role": "user", "content": [{"type": "audio"}]}]},
    ]
    for body in bad_bodies:
        resp = requests.post(f"{stub.base_url}/chat/completions", json=body, timeout=5)
        assert resp.status_code == 400, body
        assert "error" in resp.json()
    assert validate_chat_body({"model": "m", "messages": [{"role": "user", "content": "x"}]}) is None


def test_temperature_is_passed_through_when_configured(stub):
    backend = HttpBackend(stub.base_url, model="m", temperature=0.3, max_attempts=1)
    complete([ChatMessage("system", "s"), ChatMessage("user", "u")], backend)
    assert stub.requests_seen[-1]["temperature"] == 0.3


def test_retries_recover_from_transient_500s(stub):
    backend = HttpBackend(stub.base_url, model="m", max_attempts=3)
    stub.fail_next = 2
    assert complete([ChatMessage("system", "s"), ChatMessage("user", "u")], backend) == "2"


def test_retries_exhaust_to_backend_unavailable(stub):
    backend = HttpBackend(stub.base_url, model="m", max_attempts=2)
    stub.fail_next = 5
    with pytest.raises(BackendUnavailable):
        complete([ChatMessage("system", "s"), ChatMessage("user", "u")], backend)
    stub.fail_next = 0


def test_client_error_is_not_retried(stub):
    # 400 is a content error: surfaced immediately, requests_seen untouched
    backend = HttpBackend(stub.base_url, model="", max_attempts=3)
    before = len(stub.requests_seen)
    with pytest.raises(BackendUnavailable):
        complete([ChatMessage("system", "s"), ChatMessage("user", "u")], backend)
    assert len(stub.requests_seen) == before


def test_unreachable_endpoint(tmp_path):
    backend = HttpBackend("http://127.0.0.1:9", model="m", max_attempts=2, timeout_s=0.2)
    with pytest.raises(BackendUnavailable):
        complete([ChatMessage("system", "s"), ChatMessage("user", "u")], backend)
