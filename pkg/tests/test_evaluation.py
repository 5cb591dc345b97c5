import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metaharmon.crosswalk import Strategy, crosswalk_schema
from metaharmon.embedding import Hyperparams, train
from metaharmon.evaluation import (
    PerturbationSpec,
    evaluate,
    format_report,
    generate_benchmark,
    perturb_name,
    report_to_json,
    synthetic_standard_schema,
)
from metaharmon.levmatch import levenshtein
from metaharmon.model import (
    ColumnMeta,
    CrosswalkResult,
    StandardEntry,
    StandardSchema,
    validate_schema,
)
from metaharmon.textify import textify_schema


@pytest.fixture(scope="module")
def synth_schema():
    return synthetic_standard_schema(60, seed=0)


@pytest.fixture(scope="module")
def synth_model(synth_schema):
    hyper = Hyperparams(dim=128, epochs=40, learning_rate=0.0075, negatives=2, seed=0)
    return train(textify_schema(synth_schema), hyper)


def _rng(seed=0):
    return np.random.default_rng(seed)


_names = st.lists(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8),
    min_size=1,
    max_size=3,
).map(" ".join)


class TestPerturbationSpec:
    @pytest.mark.parametrize("field", ["typo_rate", "abbreviation_rate", "reorder_rate"])
    @pytest.mark.parametrize("bad", [-0.1, 1.5])
    def test_rates_bounded(self, field, bad):
        with pytest.raises(ValueError):
            PerturbationSpec(**{field: bad})

    def test_default_is_identity(self):
        assert perturb_name("weathered bottle", PerturbationSpec(), _rng()) == "weathered bottle"


class TestPerturbName:
    def test_synonyms_swap_whole_tokens(self):
        spec = PerturbationSpec(synonyms={"plastic": "polymer"})
        out = perturb_name("plastic plastics", spec, _rng())
        assert out == "polymer plastics"

    @given(name=_names, seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=200, deadline=None)
    def test_typo_is_one_edit(self, name, seed):
        out = perturb_name(name, PerturbationSpec(typo_rate=1.0), _rng(seed))
        assert levenshtein(name, out) == 1

    def test_abbreviation_truncates_one_long_token(self):
        out = perturb_name("weathered bottle", PerturbationSpec(abbreviation_rate=1.0), _rng())
        tokens = out.split()
        originals = ("weathered", "bottle")
        changed = [(t, o) for t, o in zip(tokens, originals) if t != o]
        assert len(changed) == 1
        short, original = changed[0]
        assert original.startswith(short) and len(short) in (3, 4)

    def test_abbreviation_needs_a_long_token(self):
        out = perturb_name("worn can", PerturbationSpec(abbreviation_rate=1.0), _rng())
        assert out == "worn can"

    @given(seed=st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_reorder_preserves_tokens(self, seed):
        out = perturb_name("one two three four", PerturbationSpec(reorder_rate=1.0), _rng(seed))
        assert sorted(out.split()) == ["four", "one", "three", "two"]

    def test_single_token_never_reorders(self):
        assert perturb_name("bottle", PerturbationSpec(reorder_rate=1.0), _rng()) == "bottle"

    def test_same_seed_same_draw(self):
        spec = PerturbationSpec(typo_rate=0.5, abbreviation_rate=0.5, reorder_rate=0.5)
        a = [perturb_name("weathered plastic bottle", spec, _rng(7)) for _ in range(5)]
        b = [perturb_name("weathered plastic bottle", spec, _rng(7)) for _ in range(5)]
        assert a == b

    def test_synonyms_apply_before_typo(self):
        spec = PerturbationSpec(typo_rate=1.0, synonyms={"bag": "sack"})
        out = perturb_name("torn bag", spec, _rng(3))
        assert levenshtein("torn sack", out) == 1


class TestGenerateBenchmark:
    def test_requires_refined_base(self, synth_schema):
        raw = StandardSchema(name="raw", entries=synth_schema.entries, normalized=False)
        with pytest.raises(ValueError, match="refined"):
            generate_benchmark(raw, PerturbationSpec(), n_sources=1)

    def test_rejects_empty_base(self):
        empty = StandardSchema(name="empty", entries=(), normalized=True)
        with pytest.raises(ValueError, match="empty"):
            generate_benchmark(empty, PerturbationSpec(), n_sources=1)

    def test_deterministic_for_a_seed(self, synth_schema):
        spec = PerturbationSpec(typo_rate=0.3, abbreviation_rate=0.2, reorder_rate=0.2, seed=11)
        first = generate_benchmark(synth_schema, spec, n_sources=3, columns_per_source=20)
        second = generate_benchmark(synth_schema, spec, n_sources=3, columns_per_source=20)
        assert first == second

    def test_seed_changes_the_draw(self, synth_schema):
        specs = [PerturbationSpec(typo_rate=0.5, seed=s) for s in (1, 2)]
        drawn = [
            generate_benchmark(synth_schema, spec, n_sources=1, columns_per_source=20)[0]
            for spec in specs
        ]
        assert drawn[0] != drawn[1]

    def test_shape_and_ids(self, synth_schema):
        sources, truth = generate_benchmark(
            synth_schema, PerturbationSpec(seed=4), n_sources=3, columns_per_source=15
        )
        assert [s.dataset_id for s in sources] == ["synthetic-00", "synthetic-01", "synthetic-02"]
        assert all(len(s.columns) == 15 for s in sources)
        assert all(c.name for s in sources for c in s.columns)

    def test_columns_capped_at_schema_size(self, synth_schema):
        sources, _ = generate_benchmark(
            synth_schema, PerturbationSpec(seed=4), n_sources=1, columns_per_source=10_000
        )
        assert len(sources[0].columns) == len(synth_schema.entries)

    def test_truth_covers_every_column(self, synth_schema):
        spec = PerturbationSpec(typo_rate=0.4, abbreviation_rate=0.4, reorder_rate=0.4, seed=9)
        sources, truth = generate_benchmark(synth_schema, spec, n_sources=4, columns_per_source=30)
        ids = {e.id for e in synth_schema.entries}
        for source in sources:
            for column in source.columns:
                assert truth[column.name] in ids

    def test_unperturbed_names_map_to_their_entries(self, synth_schema):
        sources, truth = generate_benchmark(
            synth_schema, PerturbationSpec(seed=2), n_sources=2, columns_per_source=40
        )
        by_name = {e.meta.name: e.id for e in synth_schema.entries}
        for source in sources:
            for column in source.columns:
                assert truth[column.name] == by_name[column.name]


def _result(column, entry_id, path, score=100, method="levenshtein", confidence="qualified", alternates=()):
    return CrosswalkResult(
        source_column=column,
        matched_entry_id=entry_id,
        predicted_path=path,
        score=score,
        method=method,
        confidence=confidence,
        alternates=alternates,
    )


@pytest.fixture(scope="module")
def tiny_schema():
    # c1 and c2 are refined duplicates: same tokens, same path, distinct ids.
    entries = (
        StandardEntry(id="a1", meta=ColumnMeta(name="alpha item"), path=("p", "a leaf")),
        StandardEntry(id="b1", meta=ColumnMeta(name="beta item"), path=("p", "b leaf")),
        StandardEntry(id="c1", meta=ColumnMeta(name="gamma item"), path=("q",)),
        StandardEntry(id="c2", meta=ColumnMeta(name="gamma item"), path=("q",)),
    )
    return StandardSchema(name="tiny", entries=entries, normalized=True)


class TestEvaluate:
    def test_all_correct(self, tiny_schema):
        predictions = [
            _result("alpha item", "a1", ("p", "a leaf")),
            _result("beta item", "b1", ("p", "b leaf")),
        ]
        truth = {"alpha item": "a1", "beta item": "b1"}
        report = evaluate(predictions, truth, tiny_schema)
        assert report.n_queries == 2
        assert report.top1_accuracy == 1.0
        assert report.topk_accuracy == 1.0
        assert report.ontology_path_accuracy == 1.0
        assert report.confusions == ()

    def test_alternates_count_toward_topk_only(self, tiny_schema):
        predictions = [
            _result("alpha item", "b1", ("p", "b leaf"), alternates=(("a1", 80.0),)),
        ]
        report = evaluate(predictions, {"alpha item": "a1"}, tiny_schema)
        assert report.top1_accuracy == 0.0
        assert report.topk_accuracy == 1.0

    def test_unmatched_prediction_scores_nothing(self, tiny_schema):
        predictions = [_result("alpha item", None, (), score=0, confidence="unmatched")]
        report = evaluate(predictions, {"alpha item": "a1"}, tiny_schema)
        assert report.top1_accuracy == 0.0
        assert report.topk_accuracy == 0.0
        assert report.ontology_path_accuracy == 0.0
        assert report.confusions == (("alpha item", "", "a1"),)

    def test_path_accuracy_is_independent_of_identity(self, tiny_schema):
        # Wrong entry, right tier path: path accuracy credits it, top-1 does not.
        predictions = [_result("a col", "b1", ("p", "a leaf"))]
        report = evaluate(predictions, {"a col": "a1"}, tiny_schema)
        assert report.top1_accuracy == 0.0
        assert report.ontology_path_accuracy == 1.0

    def test_refined_duplicates_are_interchangeable(self, tiny_schema):
        predictions = [_result("gamma item", "c2", ("q",))]
        report = evaluate(predictions, {"gamma item": "c1"}, tiny_schema)
        assert report.top1_accuracy == 1.0
        assert report.confusions == ()

    def test_missing_truth_column_raises(self, tiny_schema):
        predictions = [_result("unknown col", "a1", ("p", "a leaf"))]
        with pytest.raises(ValueError, match="unknown col"):
            evaluate(predictions, {"alpha item": "a1"}, tiny_schema)

    def test_empty_predictions(self, tiny_schema):
        report = evaluate([], {}, tiny_schema)
        assert report.n_queries == 0
        assert report.top1_accuracy == 0.0
        assert report.topk_accuracy == 0.0
        assert report.ontology_path_accuracy == 0.0

    def test_method_and_confidence_tallies(self, tiny_schema):
        predictions = [
            _result("alpha item", "a1", ("p", "a leaf"), method="embedding"),
            _result("beta item", "b1", ("p", "b leaf"), method="embedding", confidence="weak"),
            _result("gamma item", "c1", ("q",), method="classifier"),
        ]
        truth = {"alpha item": "a1", "beta item": "b1", "gamma item": "c1"}
        report = evaluate(predictions, truth, tiny_schema)
        assert report.method_counts == {"embedding": 2, "classifier": 1}
        assert report.confidence_counts == {"qualified": 2, "weak": 1}


class TestReports:
    def _report(self, tiny_schema):
        predictions = [
            _result("alpha item", "a1", ("p", "a leaf")),
            _result("beta item", "a1", ("p", "a leaf"), score=40, confidence="weak"),
        ]
        return evaluate(predictions, {"alpha item": "a1", "beta item": "b1"}, tiny_schema)

    def test_json_round_trip(self, tiny_schema):
        text = report_to_json(self._report(tiny_schema))
        assert text.endswith("\n")
        payload = json.loads(text)
        assert payload["n_queries"] == 2
        assert payload["top1_accuracy"] == 0.5
        assert payload["confusions"] == [["beta item", "a1", "b1"]]
        assert list(payload["method_counts"]) == sorted(payload["method_counts"])

    def test_table_lines(self, tiny_schema):
        text = format_report(self._report(tiny_schema))
        assert "top-1 accuracy" in text and "0.500" in text
        assert "predicted a1, expected b1" in text

    def test_confusion_display_cap(self, tiny_schema):
        predictions = [
            _result(f"col {i}", None, (), score=0, confidence="unmatched") for i in range(8)
        ]
        truth = {f"col {i}": "a1" for i in range(8)}
        text = format_report(evaluate(predictions, truth, tiny_schema), max_confusions=3)
        assert text.count("expected a1") == 3
        assert "showing up to 3" in text

    def test_empty_counts_render_as_dash(self, tiny_schema):
        lines = format_report(evaluate([], {}, tiny_schema)).splitlines()
        assert lines[4].split() == ["method", "counts", "-"]
        assert lines[5].split() == ["confidence", "counts", "-"]


class TestSyntheticStandardSchema:
    def test_deterministic(self):
        assert synthetic_standard_schema(40, seed=3) == synthetic_standard_schema(40, seed=3)

    def test_seed_changes_selection(self):
        a = synthetic_standard_schema(40, seed=3)
        b = synthetic_standard_schema(40, seed=4)
        assert [e.meta.name for e in a.entries] != [e.meta.name for e in b.entries]

    @pytest.mark.parametrize("bad", [0, 1801])
    def test_size_bounds(self, bad):
        with pytest.raises(ValueError):
            synthetic_standard_schema(bad, seed=0)

    def test_largest_schema_is_valid(self):
        schema = synthetic_standard_schema(1800, seed=0)
        assert schema.normalized
        assert validate_schema(schema) == []

    def test_names_unique(self, synth_schema):
        names = [e.meta.name for e in synth_schema.entries]
        assert len(set(names)) == len(names)

    def test_ids_are_sequential(self, synth_schema):
        assert [e.id for e in synth_schema.entries][:3] == ["e0001", "e0002", "e0003"]

    def test_entry_texture(self, synth_schema):
        for entry in synth_schema.entries:
            modifier, obj = entry.meta.name.split()
            assert entry.meta.business_terms == (f"{obj} {modifier}",)
            assert entry.meta.glossary_terms == (f"{modifier} {obj} survey record",)
            assert entry.path[-1] == f"{obj} items"

    def test_shared_noun_shares_path(self):
        schema = synthetic_standard_schema(1800, seed=0)
        paths = {}
        for entry in schema.entries:
            obj = entry.meta.name.split()[1]
            assert paths.setdefault(obj, entry.path) == entry.path


class TestZeroPerturbationRetrieval:
    """Unperturbed benchmark names must come back perfectly in every mode."""

    @pytest.mark.parametrize("mode", ["levenshtein", "embedding", "hybrid"])
    def test_top1_is_exact(self, mode, synth_schema, synth_model):
        sources, truth = generate_benchmark(
            synth_schema, PerturbationSpec(seed=5), n_sources=2, columns_per_source=30
        )
        model = synth_model if mode != "levenshtein" else None
        results = [
            r
            for source in sources
            for r in crosswalk_schema(source, synth_schema, model=model, strategy=Strategy(mode=mode))
        ]
        report = evaluate(results, truth, synth_schema)
        assert report.top1_accuracy == 1.0
        assert report.ontology_path_accuracy == 1.0
        if mode != "embedding":
            # Exact names hit score 100 directly or via the edit-distance
            # fallback; raw cosine confidence makes no such promise.
            assert report.confidence_counts == {"qualified": 60}
