import copy

import pytest

from nullframe.manifest import (
    BUILTIN_NAMES,
    AmbiguousSignature,
    ManifestError,
    NoConsistentSignature,
    ParseError,
    ValidationError,
    build,
    builtin_text,
    load_builtin,
    load_manifest,
    parse_text,
    signature_listing,
)
from nullframe.verify import toy_document


def test_builtins_load():
    for name in BUILTIN_NAMES:
        loaded = load_builtin(name)
        assert loaded.spec.name == name


def test_bronze16_signature_inferred():
    loaded = load_builtin("bronze16")
    assert loaded.spec.metric.timelike == (3, 7)
    assert loaded.signature_candidates == ((3, 7),)
    assert any("printed signature" in n and "differ" in n for n in loaded.discrepancies)


def test_minimal11_signature_inferred():
    loaded = load_builtin("minimal11")
    assert loaded.spec.metric.timelike == (4,)
    assert any("printed signature" in n for n in loaded.discrepancies)


def test_unknown_builtin():
    with pytest.raises(ManifestError):
        builtin_text("nope")


def test_parse_error_position():
    with pytest.raises(ParseError) as info:
        parse_text("name: x\nambient: [1, 2\n")
    assert info.value.line is not None and info.value.col is not None


def test_eta_not_unit():
    doc = toy_document("plane")
    doc["lm"]["eta"] = [0, 1, 1, 0]
    with pytest.raises(ValidationError, match="lm.eta not unit spacelike"):
        build(doc)


def test_wrong_embedding_count():
    doc = parse_text(builtin_text("bronze16"))
    doc["embedding"] = doc["embedding"][:15]
    with pytest.raises(ValidationError) as info:
        build(doc)
    assert info.value.path == "embedding"


def test_bad_expression_reports_path():
    doc = toy_document("plane")
    doc["embedding"][1] = "t1 +"
    with pytest.raises(ValidationError) as info:
        build(doc)
    assert info.value.path == "embedding[1]"


def test_not_bronze():
    doc = toy_document("plane")
    doc["bronze"] = {"diagonal": [1, 1, 1, 1]}
    with pytest.raises(ValidationError):
        build(doc)


def test_timelike_count_must_match_index():
    doc = toy_document("plane")
    doc["ambient"]["timelike_positions"] = [1, 2]
    with pytest.raises(ValidationError):
        build(doc)


def test_unknown_claim():
    doc = toy_document("plane")
    doc["claimed"]["colour"] = "blue"
    with pytest.raises(ValidationError):
        build(doc)


def _null_line_doc():
    doc = copy.deepcopy(toy_document("null_curve"))
    del doc["ambient"]["timelike_positions"]
    doc["claimed"] = {"rad_dim": 1, "rad_indices": [1]}
    return doc


def test_inferred_signature_for_null_line():
    # t -> (t, t, 0) is null only when coordinate 1 or 2 is timelike; with q = 1 both work
    with pytest.raises(AmbiguousSignature) as info:
        build(_null_line_doc())
    assert sorted(info.value.candidates) == [(0,), (1,)]


def test_no_consistent_signature():
    doc = _null_line_doc()
    doc["embedding"] = ["t1", "0", "0"]
    with pytest.raises(NoConsistentSignature):
        build(doc)


def test_signature_listing():
    listing = signature_listing(parse_text(builtin_text("bronze16")))
    assert listing == [((3, 7), 2)]
    assert [c for c, _ in signature_listing(_null_line_doc())] == [(0,), (1,)]


def test_load_manifest_from_file(tmp_path):
    p = tmp_path / "m.yaml"
    p.write_text(builtin_text("minimal11"), encoding="ascii")
    assert load_manifest(p).spec.param_dim == 6
    with pytest.raises(ManifestError):
        load_manifest(tmp_path / "missing.yaml")


def test_non_ascii_manifest(tmp_path):
    p = tmp_path / "m.yaml"
    p.write_bytes("name: \xe9\n".encode("latin-1"))
    with pytest.raises(ParseError):
        load_manifest(p)


def test_frame_matrix_rank():
    doc = parse_text(builtin_text("minimal11"))
    doc["frame"]["matrix"][1] = list(doc["frame"]["matrix"][0])
    with pytest.raises(ValidationError):
        build(doc)
