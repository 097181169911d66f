"""Conformance stub for the chat-completions wire protocol.

Validates every request body against the documented schema and answers via
a pluggable responder, so tests (and manual runs) can exercise the HTTP
backend without any real model endpoint. Schema violations come back as
HTTP 400 with the offending field named.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable

Responder = Callable[[dict], str]

_ALLOWED_TOP_KEYS = {"model", "messages", "temperature"}
_ALLOWED_ROLES = {"system", "user", "assistant"}


def validate_chat_body(body: object) -> str | None:
    """Return None if the body conforms, else a description of the violation."""
    if not isinstance(body, dict):
        return "body must be a JSON object"
    unknown = set(body) - _ALLOWED_TOP_KEYS
    if unknown:
        return f"unknown top-level keys: {sorted(unknown)}"
    if not isinstance(body.get("model"), str) or not body["model"]:
        return "field 'model' must be a non-empty string"
    messages = body.get("messages")
    if not isinstance(messages, list) or not messages:
        return "field 'messages' must be a non-empty list"
    for i, msg in enumerate(messages):
        if not isinstance(msg, dict):
            return f"messages[{i}] must be an object"
        if set(msg) != {"role", "content"}:
            return f"messages[{i}] must have exactly 'role' and 'content'"
        if msg["role"] not in _ALLOWED_ROLES:
            return f"messages[{i}].role invalid: {msg['role']!r}"
        content = msg["content"]
        if isinstance(content, str):
            continue
        if not isinstance(content, list) or not content:
            return f"messages[{i}].content must be a string or non-empty list"
        for j, part in enumerate(content):
            if not isinstance(part, dict):
                return f"messages[{i}].content[{j}] must be an object"
            kind = part.get("type")
            if kind == "text":
                if not isinstance(part.get("text"), str):
                    return f"messages[{i}].content[{j}].text must be a string"
            elif kind == "image_url":
                url = part.get("image_url", {})
                if not isinstance(url, dict) or not isinstance(url.get("url"), str):
                    return f"messages[{i}].content[{j}].image_url.url must be a string"
                if not url["url"].startswith("data:image/"):
                    return f"messages[{i}].content[{j}] image must be a data URL"
            else:
                return f"messages[{i}].content[{j}].type invalid: {kind!r}"
    return None


def count_messages_responder(body: dict) -> str:
    return str(len(body["messages"]))


class ChatStubServer:
    """Threaded HTTP server speaking the chat-completions protocol."""

    def __init__(self, responder: Responder = count_messages_responder, port: int = 0):
        self.responder = responder
        self.requests_seen: list[dict] = []
        self.fail_next = 0  # return 500 for this many upcoming requests (retry testing)
        stub = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, fmt, *args):  # silence default stderr chatter
                pass

            def do_POST(self):
                if not self.path.endswith("/chat/completions"):
                    self.send_error(404)
                    return
                if stub.fail_next > 0:
                    stub.fail_next -= 1
                    self._reply(500, {"error": "injected failure"})
                    return
                length = int(self.headers.get("Content-Length", "0"))
                try:
                    body = json.loads(self.rfile.read(length))
                except ValueError:
                    self._reply(400, {"error": "body is not valid JSON"})
                    return
                problem = validate_chat_body(body)
                if problem is not None:
                    self._reply(400, {"error": problem})
                    return
                stub.requests_seen.append(body)
                text = stub.responder(body)
                self._reply(
                    200,
                    {
                        "object": "chat.completion",
                        "model": body["model"],
                        "choices": [
                            {
                                "index": 0,
                                "message": {"role": "assistant", "content": text},
                                "finish_reason": "stop",
                            }
                        ],
                    },
                )

            def _reply(self, status: int, payload: dict):
                blob = json.dumps(payload).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(blob)))
                self.end_headers()
                self.wfile.write(blob)

        self._server = ThreadingHTTPServer(("127.0.0.1", port), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "ChatStubServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "ChatStubServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


def main() -> None:  # manual target: python -m langloop.stubserver
    import argparse

    parser = argparse.ArgumentParser(description="Run the chat-completions stub server")
    parser.add_argument("--port", type=int, default=8080)
    args = parser.parse_args()
    server = ChatStubServer(port=args.port).start()
    print(f"stub listening on {server.base_url}")
    try:
        threading.Event().wait()
    except KeyboardInterrupt:
        server.stop()


if __name__ == "__main__":
    main()
