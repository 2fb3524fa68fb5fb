import json

import numpy as np
import pytest

from msvi.core.exceptions import ConfigError, ProblemFileError, ProblemValidationError
from msvi.repositories.problems_repo import from_document, load_problem, save_problem, to_document
from msvi.services.problems import gen_random_affine, gen_random_walk_socp


def tiny_document():
    return {
        "format": "msvi-problem/1",
        "probabilities": [0.5, 0.5],
        "stages": [[[0, 1]], [[0], [1]]],
        "stage_dims": [1, 1],
        "sets": [
            [{"kind": "box", "lower": [-1.0], "upper": [1.0]}, {"kind": "box", "lower": [-1.0], "upper": [1.0]}],
            [{"kind": "box", "lower": [-1.0], "upper": [1.0]}, {"kind": "ball", "center": [0.0], "radius": 2.0}],
        ],
        "operator": {
            "kind": "affine",
            "matrices": [[[1.0, 0.0], [0.0, 1.0]], [[2.0, 0.0], [0.0, 1.0]]],
            "offsets": [[0.0, 1.0], [-1.0, 0.5]],
        },
    }


def test_round_trip_affine(tmp_path):
    instance = gen_random_affine(5, 2, 2, seed=7)
    path = save_problem(instance, tmp_path / "affine.json")
    loaded = load_problem(path)
    assert loaded == instance
    assert loaded.family == "random_affine"
    assert loaded.params == {"m": 5, "n0": 2, "n1": 2}


def test_round_trip_socp_keeps_known_solution(tmp_path):
    instance = gen_random_walk_socp(2, 1)
    loaded = load_problem(save_problem(instance, tmp_path / "nested" / "socp.json"))
    assert loaded == instance
    np.testing.assert_array_equal(loaded.known_solution.values, 1.0)


def test_generator_document(tmp_path):
    instance = gen_random_affine(4, 1, 2, seed=9)
    path = save_problem(instance, tmp_path / "gen.json", as_generator=True)
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["operator"] == {"kind": "generator", "family": "random_affine", "params": {"m": 4, "n0": 1, "n1": 2}, "seed": 9}
    assert "probabilities" not in doc
    assert load_problem(path) == instance


def test_generator_document_with_mismatching_data():
    doc = to_document(gen_random_affine(3, 1, 1, seed=1), as_generator=True)
    doc["probabilities"] = [0.2, 0.3, 0.5]
    with pytest.raises(ProblemValidationError, match="probabilities"):
        from_document(doc)


def test_custom_instance_has_no_generator(make_single_atom):
    with pytest.raises(ConfigError):
        to_document(make_single_atom(), as_generator=True)


def test_explicit_document_with_mixed_sets():
    instance = from_document(tiny_document())
    assert instance.atom_count == 2
    assert len(instance.sets.products) == 2
    assert instance.family == "custom"


def test_probabilities_must_sum_to_one():
    doc = tiny_document()
    doc["probabilities"] = [0.5, 0.4]
    with pytest.raises(ProblemValidationError, match="probabilities"):
        from_document(doc)


def test_stages_must_refine():
    doc = tiny_document()
    doc["probabilities"] = [0.25] * 4
    doc["stages"] = [[[0, 1, 2, 3]], [[0, 1], [2, 3]], [[0, 2], [1, 3]]]
    doc["stage_dims"] = [1, 1, 1]
    with pytest.raises(ProblemValidationError, match="stages"):
        from_document(doc)


def test_schema_error_names_the_field():
    doc = tiny_document()
    doc["operator"]["matrices"] = "no es una matriz"
    with pytest.raises(ProblemFileError) as info:
        from_document(doc)
    assert info.value.field.startswith("operator")


def test_unknown_field_is_rejected():
    doc = tiny_document()
    doc["color"] = "azul"
    with pytest.raises(ProblemFileError) as info:
        from_document(doc)
    assert info.value.field == "color"


def test_missing_explicit_field():
    doc = tiny_document()
    del doc["sets"]
    with pytest.raises(ProblemFileError) as info:
        from_document(doc)
    assert info.value.field == "sets"


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ProblemFileError, match="no se pudo leer"):
        load_problem(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope", encoding="utf-8")
    with pytest.raises(ProblemFileError, match="JSON inválido"):
        load_problem(bad)


@pytest.mark.parametrize(
    ("params", "field"),
    [
        ({"m": "diez", "n0": 1, "n1": 1}, "operator.params.m"),
        ({"m": 3, "n0": 1.5, "n1": 1}, "operator.params.n0"),
        ({"m": 3, "n0": 1, "n1": 0}, "operator.params.n1"),
        ({"m": 3, "n0": 1, "n1": 1, "k": 2}, "operator.params.k"),
    ],
)
def test_generator_params_are_validated(params, field):
    doc = {"operator": {"kind": "generator", "family": "random_affine", "params": params, "seed": 0}}
    with pytest.raises(ProblemFileError) as info:
        from_document(doc)
    assert info.value.field == field


def test_socp_generator_params_are_validated():
    doc = {"operator": {"kind": "generator", "family": "random_walk_socp", "params": {"N": 2, "ell": 1, "noise": -1.0}}}
    with pytest.raises(ProblemFileError) as info:
        from_document(doc)
    assert info.value.field == "operator.params.noise"
