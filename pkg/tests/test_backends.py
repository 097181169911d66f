import json
import re

import pytest

from langloop.backends import (
    ChatMessage,
    ReplayBackend,
    ScriptedBackend,
    ScriptedRule,
    canonical_digest,
    complete,
    record_session,
)
from langloop.errors import IoFailure, NoRuleMatched, ReplayMiss


def rule(pattern: str, template: str) -> ScriptedRule:
    return ScriptedRule(re.compile(pattern, re.DOTALL), template)


def msgs(user_text: str) -> list[ChatMessage]:
    return [ChatMessage("system", "sys"), ChatMessage("user", user_text)]


def test_chat_message_invariants():
    with pytest.raises(ValueError):
        ChatMessage("system", "x", images=(b"png",))
    with pytest.raises(ValueError):
        ChatMessage("user", "")
    ChatMessage("user", "", images=(b"png",))  # ok: image-only user message
    with pytest.raises(ValueError):
        ChatMessage("oracle", "x")


def test_complete_preconditions():
    backend = ScriptedBackend([rule(".", "hi")])
    with pytest.raises(ValueError):
        complete([], backend)
    with pytest.raises(ValueError):
        complete([ChatMessage("user", "no system first")], backend)


def test_scripted_rule_order_and_captures():
    backend = ScriptedBackend(
        [
            rule(r"target at (\w+)", r"Turning \1.\nACTION: rotate_\1"),
            rule(".", "fallback"),
        ]
    )
    out = complete(msgs("observation: target at left"), backend)
    assert out == "Turning left.\nACTION: rotate_left"
    assert complete(msgs("nothing relevant"), backend) == "fallback"


def test_scripted_no_rule_matched():
    backend = ScriptedBackend([rule("specific", "x")])
    with pytest.raises(NoRuleMatched):
        complete(msgs("other"), backend)


def test_digest_ignores_object_identity_but_not_content():
    a = [ChatMessage("system", "s"), ChatMessage("user", "q", images=(b"img1",))]
    b = [ChatMessage("system", "s"), ChatMessage("user", "q", images=(b"img1",))]
    c = [ChatMessage("system", "s"), ChatMessage("user", "q", images=(b"img2",))]
    assert canonical_digest(a) == canonical_digest(b)
    assert canonical_digest(a) != canonical_digest(c)
    assert canonical_digest(a) != canonical_digest(a[:1])


def test_record_then_replay_in_order(tmp_path):
    sink = tmp_path / "session.jsonl"
    scripted = ScriptedBackend([rule(r"ask (\d+)", r"answer \1"), rule(".", "generic")])
    recorder = record_session(scripted, sink)
    sent = ["ask 1", "ask 2", "ask 1", "other", "ask 3"]
    responses = [complete(msgs(t), recorder) for t in sent]
    recorder.close()

    lines = sink.read_text().splitlines()
    assert len(lines) == 5
    assert [json.loads(l)["response"] for l in lines] == responses
    assert len(recorder.exchanges) == 5
    assert all(e.backend_id == "scripted" for e in recorder.exchanges)

    replay = ReplayBackend(sink)
    assert [complete(msgs(t), replay) for t in sent] == responses


def test_repeated_identical_requests_replay_in_order(tmp_path):
    sink = tmp_path / "session.jsonl"
    backend = QueueLike(["first", "second"])
    recorder = record_session(backend, sink)
    complete(msgs("same"), recorder)
    complete(msgs("same"), recorder)
    recorder.close()
    replay = ReplayBackend(sink)
    assert complete(msgs("same"), replay) == "first"
    assert complete(msgs("same"), replay) == "second"
    with pytest.raises(ReplayMiss):
        complete(msgs("same"), replay)


class QueueLike:
    backend_id = "scripted"

    def __init__(self, responses):
        self.responses = list(responses)

    def complete(self, messages):
        return self.responses.pop(0)


def test_empty_session_replay_misses(tmp_path):
    sink = tmp_path / "empty.jsonl"
    recorder = record_session(ScriptedBackend([rule(".", "x")]), sink)
    recorder.close()
    assert sink.read_text() == ""
    replay = ReplayBackend(sink)
    with pytest.raises(ReplayMiss):
        complete(msgs("anything"), replay)


def test_unwritable_sink_raises_io_failure(tmp_path):
    with pytest.raises(IoFailure):
        record_session(ScriptedBackend([rule(".", "x")]), tmp_path / "missing_dir" / "s.jsonl")


def test_missing_transcript_raises_io_failure(tmp_path):
    with pytest.raises(IoFailure):
        ReplayBackend(tmp_path / "absent.jsonl")
