"""Distribution entropy, classification rules, and cross-cutting assessment."""

from __future__ import annotations

import math

import pytest

from taxoforge.classify import (
    CrossCuttingStatus,
    DistributionStats,
    FactorClass,
    assess_cross_cutting,
    classification_census,
    classify,
    distribution_stats,
    entropy,
    primary_domain,
)
from taxoforge.errors import TaxoforgeError
from taxoforge.integrate import OccurrenceVector
from tests.conftest import make_factor


def hand_entropy(counts):
    """Independent oracle: direct summation over the count shares."""
    total = sum(counts)
    return -sum((c / total) * math.log(c / total) for c in counts if c)


class TestEntropy:
    def test_uniform_five(self):
        vector = OccurrenceVector.from_mapping(
            {"P": 1, "S": 1, "U": 1, "O": 1, "F": 1}
        )
        assert entropy(vector) == pytest.approx(1.609, abs=5e-4)
        assert entropy(vector) == pytest.approx(math.log(5), abs=1e-12)

    def test_single_type(self):
        assert entropy(OccurrenceVector.from_mapping({"P": 1})) == 0.0

    def test_skewed_counts(self):
        vector = OccurrenceVector.from_mapping(
            {"P": 1, "S": 1, "U": 1, "O": 4, "F": 2}
        )
        oracle = hand_entropy([1, 1, 1, 4, 2])
        assert entropy(vector) == pytest.approx(1.427, abs=1e-3)
        assert entropy(vector) == pytest.approx(oracle, abs=1e-12)

    @pytest.mark.parametrize("k,expected", [(5, 1.61), (4, 1.39), (3, 1.10), (2, 0.69)])
    def test_uniform_values(self, k, expected):
        counts = {code: 1 for code in "PSUGOF"[:k]}
        assert entropy(OccurrenceVector.from_mapping(counts)) == pytest.approx(
            expected, abs=5e-3
        )

    def test_zero_vector_rejected(self):
        with pytest.raises(TaxoforgeError):
            entropy(OccurrenceVector.from_mapping({}))


class TestClassify:
    @pytest.mark.parametrize(
        "active,expected",
        [
            (6, FactorClass.UNIVERSAL),
            (5, FactorClass.UNIVERSAL),
            (4, FactorClass.MULTI_SPACE),
            (3, FactorClass.MULTI_SPACE),
            (2, FactorClass.SPACE_SPECIFIC),
            (1, FactorClass.SPACE_SPECIFIC),
        ],
    )
    def test_thresholds(self, active, expected):
        stats = DistributionStats(
            active_type_count=active, entropy_nats=0.0, total_mentions=active
        )
        assert classify(stats) is expected

    def test_stats_invariants(self):
        vector = OccurrenceVector.from_mapping({"P": 2, "S": 2})
        stats = distribution_stats(vector)
        assert stats.active_type_count == 2
        assert stats.entropy_nats == pytest.approx(math.log(2))
        assert stats.total_mentions == 4


class TestPrimaryDomain:
    @pytest.mark.parametrize(
        "name,expected",
        [
            ("safety", "SAFETY & SECURITY"),
            ("water features", "NATURAL ELEMENTS"),
            ("thermal comfort", "COMFORT"),
        ],
    )
    def test_worked_examples(self, name, expected, default_kb, default_lexicon):
        factor = make_factor(name, {"P": 1})
        assert primary_domain(factor, default_kb, default_lexicon) == expected

    def test_unassignable_raises(self, default_kb, default_lexicon):
        factor = make_factor("zzz", {"P": 1})
        with pytest.raises(TaxoforgeError, match="no domain"):
            primary_domain(factor, default_kb, default_lexicon)

    def test_deterministic(self, default_kb, default_lexicon):
        factor = make_factor("lighting", {"P": 1, "S": 1, "O": 1})
        first = primary_domain(factor, default_kb, default_lexicon)
        assert all(
            primary_domain(factor, default_kb, default_lexicon) == first
            for _ in range(5)
        )


class TestCrossCutting:
    def test_safety_limited(self, default_kb, default_lexicon):
        factor = make_factor("safety", {"P": 1, "S": 1, "U": 1, "O": 1, "F": 1})
        cc = assess_cross_cutting(factor, default_kb, default_lexicon)
        assert not cc.flagged
        assert cc.status is CrossCuttingStatus.LIMITED

    def test_accessibility_very_high(self, default_kb, default_lexicon):
        factor = make_factor(
            "accessibility", {"P": 1, "S": 1, "U": 1, "O": 4, "F": 2}
        )
        cc = assess_cross_cutting(factor, default_kb, default_lexicon)
        assert cc.flagged
        assert cc.status is CrossCuttingStatus.VERY_HIGH
        assert cc.score == 4

    def test_lighting_high(self, default_kb, default_lexicon):
        factor = make_factor("lighting", {"P": 1, "S": 1, "O": 1})
        cc = assess_cross_cutting(factor, default_kb, default_lexicon)
        assert cc.flagged
        assert cc.status is CrossCuttingStatus.HIGH
        assert set(cc.relevant_domains) == {
            "COMFORT",
            "SAFETY & SECURITY",
            "INFRASTRUCTURE",
        }

    def test_status_mapping(self):
        assert CrossCuttingStatus.from_score(0) is CrossCuttingStatus.LIMITED
        assert CrossCuttingStatus.from_score(1) is CrossCuttingStatus.LIMITED
        assert CrossCuttingStatus.from_score(2) is CrossCuttingStatus.MODERATE
        assert CrossCuttingStatus.from_score(3) is CrossCuttingStatus.HIGH
        assert CrossCuttingStatus.from_score(7) is CrossCuttingStatus.VERY_HIGH


class TestCensus:
    def test_fixture_census(self, classification_fixture):
        census = classification_census(classification_fixture)
        assert census.universal == 4
        assert census.multi_space == 5
        assert census.space_specific == 3
        assert census.total == 12

    def test_fixture_class_labels(self, classification_fixture):
        by_name = {r.name: r.factor_class for r in classification_fixture}
        assert by_name["safety"] is FactorClass.UNIVERSAL
        assert by_name["accessibility"] is FactorClass.UNIVERSAL
        assert by_name["comfort"] is FactorClass.UNIVERSAL
        assert by_name["security"] is FactorClass.UNIVERSAL
        assert by_name["thermal comfort"] is FactorClass.MULTI_SPACE
        assert by_name["physical comfort"] is FactorClass.MULTI_SPACE
        assert by_name["lighting"] is FactorClass.MULTI_SPACE
        assert by_name["visibility"] is FactorClass.MULTI_SPACE
        assert by_name["temperature"] is FactorClass.MULTI_SPACE
        assert by_name["street travel safety"] is FactorClass.SPACE_SPECIFIC
        assert by_name["water features"] is FactorClass.SPACE_SPECIFIC
        assert by_name["biodiversity"] is FactorClass.SPACE_SPECIFIC

    def test_reported_scale_identities(self):
        assert 278 + 354 + 397 == 1029
        assert round(100 * 278 / 1029, 1) == 27.0
        assert round(100 * 354 / 1029, 1) == 34.4
        assert round(100 * 397 / 1029, 1) == 38.6
        assert round(100 * 124 / 1029, 1) == 12.1
