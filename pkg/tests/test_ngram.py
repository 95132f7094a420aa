import json
import math

import pytest

from codebpc.corpus import make_document, manifest_from_documents
from codebpc.errors import InputError
from codebpc.ngram import (
    UNK,
    UniformModel,
    load_model,
    ngram_logprob,
    ngram_train,
    save_model,
    trace_from_model,
)
from codebpc.trace import load_trace, write_trace


def manifest_of(text, doc_id="doc"):
    return manifest_from_documents([make_document(doc_id, text)])


# ---------------------------------------------------------------------------
# training


def test_bigram_hand_count_abab():
    # "abab": context 'a' is followed by 'b' both times it has a successor
    alpha = 0.5
    model = ngram_train(manifest_of("abab"), order=2, alpha=alpha, token_mode="char")
    assert model.vocab == (UNK, "a", "b")
    v = model.vocab_size
    p = math.exp(model.logprob_nats(["a"], "b"))
    assert abs(p - (2 + alpha) / (2 + alpha * v)) < 1e-12


def test_unigram_is_context_free():
    model = ngram_train(manifest_of("aabbb"), order=1, alpha=1.0, token_mode="char")
    p1 = model.logprob_nats([], "a")
    p2 = model.logprob_nats(["b", "b", "b"], "a")
    assert p1 == p2


def test_unseen_context_is_uniform():
    model = ngram_train(manifest_of("abab"), order=2, alpha=0.25, token_mode="char")
    p = math.exp(model.logprob_nats(["z"], "a"))  # 'z' context never trained
    assert abs(p - 1.0 / model.vocab_size) < 1e-12


def test_trigram_hand_computed_conditional():
    # 20-char fixture; context (a, b) has successors c:3 d:2 e:1 (6 total)
    text = "abcabdabcabeabcabdab"
    assert len(text) == 20
    alpha = 1.0
    model = ngram_train(manifest_of(text), order=3, alpha=alpha, token_mode="char")
    v = model.vocab_size
    assert v == 6  # a b c d e + unk
    p_c = math.exp(model.logprob_nats(["a", "b"], "c"))
    assert abs(p_c - (3 + alpha) / (6 + alpha * v)) < 1e-12
    p_e = math.exp(model.logprob_nats(["a", "b"], "e"))
    assert abs(p_e - (1 + alpha) / (6 + alpha * v)) < 1e-12


def test_train_validates_inputs():
    with pytest.raises(InputError):
        ngram_train(manifest_from_documents([]), order=2, alpha=1.0)
    with pytest.raises(InputError):
        ngram_train(manifest_of("ab"), order=0, alpha=1.0)
    with pytest.raises(InputError):
        ngram_train(manifest_of("ab"), order=2, alpha=0.0)


def test_normalization_sums_to_one():
    model = ngram_train(manifest_of("the cat sat on the mat"), order=3, alpha=0.3, token_mode="char")
    for context in ([], ["t"], ["t", "h"], ["q", "q"]):
        total = math.fsum(
            math.exp(model.logprob_nats(context, tok)) for tok in model.vocab
        )
        assert abs(total - 1.0) < 1e-12


def test_markov_property():
    # altering a token more than order-1 positions back leaves the event alone
    model = ngram_train(manifest_of("abcabdabcabe"), order=3, alpha=0.5, token_mode="char")
    tokens_a = list("abcabd")
    tokens_b = list("zbcabd")  # differs only at position 0
    trace_a = ngram_logprob(model, tokens_a)
    trace_b = ngram_logprob(model, tokens_b)
    for i in range(3, len(tokens_a)):  # i - (k-1) > 0 from position 3 on
        assert trace_a.events[i].logprob_nats == trace_b.events[i].logprob_nats


def test_oov_maps_to_unk():
    model = ngram_train(manifest_of("abab"), order=1, alpha=1.0, token_mode="char")
    # p(unk) = (0 + alpha) / (4 + alpha*3)
    p = math.exp(model.logprob_nats([], "Q"))
    assert abs(p - 1.0 / (4 + 3)) < 1e-12


# ---------------------------------------------------------------------------
# scoring / traces


def test_uniform_model_logprobs():
    model = UniformModel(256)
    trace = ngram_logprob(model, list("abcd"))
    for ev in trace.events:
        assert abs(ev.logprob_nats + math.log(256)) < 1e-15


def test_context_limit_restricts_conditioning():
    model = ngram_train(manifest_of("abcabcabc"), order=3, alpha=1.0, token_mode="char")
    unlimited = ngram_logprob(model, list("abcabc"))
    limited = ngram_logprob(model, list("abcabc"), context_limit=1)
    # with a 1-token window there is no preceding context at all
    assert limited.events[2].logprob_nats == model.logprob_nats([], "c")
    assert unlimited.events[2].logprob_nats == model.logprob_nats(["a", "b"], "c")


def test_trace_roundtrip_identity(tmp_path):
    model = ngram_train(manifest_of("abcabd"), order=2, alpha=1.0, token_mode="char")
    manifest = manifest_of("abcabd")
    trace = trace_from_model(model, manifest)
    path = tmp_path / "t.jsonl"
    write_trace(trace, path)
    loaded = load_trace(path, expected_char_counts={"doc": 6})
    assert loaded.model_name == trace.model_name
    assert loaded.events == trace.events


def test_trace_writes_are_byte_identical(tmp_path):
    model = ngram_train(manifest_of("abcabd"), order=2, alpha=1.0, token_mode="char")
    manifest = manifest_of("abcabd")
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_trace(trace_from_model(model, manifest), p1)
    write_trace(trace_from_model(model, manifest), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_trace_rejects_positive_logprob(tmp_path):
    path = tmp_path / "bad.jsonl"
    lines = [
        json.dumps({"model_name": "m", "context_window_used": None}),
        json.dumps({"doc_id": "d", "token_index": 0, "char_len": 1, "logprob_nats": 0.5}),
    ]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InputError, match="positive logprob"):
        load_trace(path)


def test_load_trace_rejects_nonmonotone_index(tmp_path):
    path = tmp_path / "bad.jsonl"
    lines = [
        json.dumps({"model_name": "m", "context_window_used": None}),
        json.dumps({"doc_id": "d", "token_index": 1, "char_len": 1, "logprob_nats": -1.0}),
        json.dumps({"doc_id": "d", "token_index": 1, "char_len": 1, "logprob_nats": -1.0}),
    ]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InputError, match="not increasing"):
        load_trace(path)


def test_load_trace_truncated_line_reports_lineno(tmp_path):
    path = tmp_path / "bad.jsonl"
    header = json.dumps({"model_name": "m", "context_window_used": None})
    good = json.dumps({"doc_id": "d", "token_index": 0, "char_len": 1, "logprob_nats": -1.0})
    path.write_text(header + "\n" + good + "\n" + '{"doc_id": "d", "token_in')
    with pytest.raises(InputError, match=":3"):
        load_trace(path)


def test_load_trace_char_mismatch(tmp_path):
    model = ngram_train(manifest_of("abcd"), order=1, alpha=1.0, token_mode="char")
    path = tmp_path / "t.jsonl"
    write_trace(trace_from_model(model, manifest_of("abcd")), path)
    with pytest.raises(InputError, match="character mismatch"):
        load_trace(path, expected_char_counts={"doc": 99})


# ---------------------------------------------------------------------------
# model persistence


def test_model_roundtrip(tmp_path):
    manifest = manifest_of("def f(x):\n    return x\n")
    model = ngram_train(manifest, order=3, alpha=0.5, token_mode="char")
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.order == model.order
    assert loaded.vocab == model.vocab
    for ctx, tok in ([[], "d"], [["d", "e"], "f"], [["q"], "z"]):
        assert loaded.logprob_nats(ctx, tok) == model.logprob_nats(ctx, tok)
