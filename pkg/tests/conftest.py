"""Shared fixtures: default config files, the worked-example corpus, and
builders for the small factor sets the worked tables exercise."""

from __future__ import annotations

from pathlib import Path

import pytest

from taxoforge.classify import classify_factors
from taxoforge.corpus import SPACE_TYPES, load_corpus, load_rules
from taxoforge.integrate import IntegratedFactor, IntegratedFactorSet, OccurrenceVector, integrate
from taxoforge.knowledge import (
    default_kb_path,
    default_lexicon_path,
    default_rules_path,
    load_kb,
)
from taxoforge.similarity import (
    SimilarityMatrix,
    SimilarityWeights,
    build_matrix,
    load_lexicon,
)

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def default_rules():
    return load_rules(default_rules_path())


@pytest.fixture(scope="session")
def default_kb():
    return load_kb(default_kb_path())


@pytest.fixture(scope="session")
def default_lexicon():
    return load_lexicon(default_lexicon_path())


@pytest.fixture(scope="session")
def sample_corpus():
    return load_corpus(FIXTURES / "sample_corpus.csv")


@pytest.fixture(scope="session")
def sample_factors(sample_corpus, default_rules):
    return integrate(sample_corpus, default_rules)


@pytest.fixture(scope="session")
def sample_matrix(sample_factors, default_lexicon):
    return build_matrix(sample_factors, SimilarityWeights(), default_lexicon)


def make_factor(
    name: str, counts: dict, index: int = 0, studies: dict | None = None
) -> IntegratedFactor:
    vector = OccurrenceVector.from_mapping(counts)
    if studies is None:
        studies = {
            code: frozenset({f"{name}-{code}"}) if vector.get(code) else frozenset()
            for code in SPACE_TYPES
        }
    return IntegratedFactor(
        canonical_name=name,
        occurrence=vector,
        studies=studies,
        insertion_index=index,
    )


def make_factor_set(patterns: dict[str, dict]) -> IntegratedFactorSet:
    factors = tuple(
        make_factor(name, counts, index)
        for index, (name, counts) in enumerate(patterns.items())
    )
    return IntegratedFactorSet(
        factors=factors,
        raw_record_count=sum(f.occurrence.total for f in factors),
    )


# Occurrence patterns from the worked classification examples.
CLASSIFICATION_PATTERNS = {
    "safety": {"P": 1, "S": 1, "U": 1, "O": 1, "F": 1},
    "accessibility": {"P": 1, "S": 1, "U": 1, "O": 4, "F": 2},
    "street travel safety": {"S": 1},
    "comfort": {"P": 1, "S": 1, "U": 1, "O": 1, "F": 1},
    "thermal comfort": {"P": 1, "O": 1, "U": 1},
    "physical comfort": {"P": 1, "U": 1, "O": 1, "F": 1},
    "lighting": {"P": 1, "S": 1, "O": 1},
    "water features": {"P": 1},
    "security": {"P": 1, "S": 1, "U": 1, "O": 1, "F": 1},
    "visibility": {"P": 1, "S": 1, "O": 1},
    "biodiversity": {"P": 1, "G": 1},
    "temperature": {"P": 1, "O": 1, "U": 1},
}


@pytest.fixture(scope="session")
def classification_factor_set():
    return make_factor_set(CLASSIFICATION_PATTERNS)


@pytest.fixture(scope="session")
def classification_fixture(classification_factor_set, default_kb, default_lexicon):
    return classify_factors(classification_factor_set, default_kb, default_lexicon)


# The eight worked cluster-assignment factors plus their cited neighbours,
# with the cited pair scores seeded into a small matrix.
CLUSTER_FIXTURE_PATTERNS = {
    "safety": {"P": 1, "S": 1, "U": 1, "O": 1, "F": 1},
    "lighting": {"P": 1, "S": 1, "O": 1},
    "thermal comfort": {"P": 1, "U": 1, "O": 1},
    "wheelchair access": {"F": 1},
    "water features": {"P": 1},
    "biodiversity": {"P": 1, "G": 1},
    "surveillance": {"S": 1, "U": 1},
    "accessibility": {"P": 1, "S": 1, "U": 1, "O": 4, "F": 2},
    "security": {"P": 1, "U": 1},
    "protection": {"P": 1, "S": 1},
    "monitoring": {"S": 1, "U": 1},
    "visibility": {"P": 1, "S": 1, "O": 1},
    "illumination": {"S": 1, "O": 1},
    "temperature": {"P": 1, "U": 1, "O": 1},
    "microclimate": {"P": 1, "O": 1},
    "humidity": {"P": 1, "O": 1},
    "barrier-free": {"U": 1, "F": 1},
    "ada compliance": {"F": 1},
    "physical access": {"U": 1, "F": 1},
    "inclusion": {"S": 1, "U": 1, "O": 1, "F": 1},
    "natural elements": {"P": 1, "G": 1},
    "fountains": {"P": 1},
    "aquatic": {"P": 1},
    "vegetation": {"P": 1, "G": 1},
    "ecology": {"P": 1, "G": 1},
    "wildlife": {"G": 1},
}

CLUSTER_FIXTURE_PAIRS = {
    ("safety", "security"): 0.77,
    ("safety", "surveillance"): 0.68,
    ("safety", "protection"): 0.72,
    ("lighting", "visibility"): 0.72,
    ("lighting", "illumination"): 0.89,
    ("thermal comfort", "temperature"): 0.93,
    ("thermal comfort", "microclimate"): 0.85,
    ("thermal comfort", "humidity"): 0.78,
    ("wheelchair access", "accessibility"): 0.91,
    ("wheelchair access", "barrier-free"): 0.86,
    ("wheelchair access", "ada compliance"): 0.89,
    ("water features", "natural elements"): 0.69,
    ("water features", "fountains"): 0.85,
    ("water features", "aquatic"): 0.76,
    ("biodiversity", "vegetation"): 0.82,
    ("biodiversity", "ecology"): 0.88,
    ("biodiversity", "wildlife"): 0.75,
    ("surveillance", "security"): 0.84,
    ("surveillance", "monitoring"): 0.79,
    ("accessibility", "physical access"): 0.91,
    ("accessibility", "barrier-free"): 0.86,
    ("accessibility", "inclusion"): 0.73,
}


def seeded_matrix(names: list[str], pairs: dict, weights=None) -> SimilarityMatrix:
    n = len(names)
    index = {name: i for i, name in enumerate(names)}
    scores = [[0.0] * n for _ in range(n)]
    for i in range(n):
        scores[i][i] = 1.0
    for (a, b), score in pairs.items():
        scores[index[a]][index[b]] = score
        scores[index[b]][index[a]] = score
    return SimilarityMatrix(
        names=tuple(names),
        scores=scores,
        components={},
        weights=weights or SimilarityWeights(),
    )


@pytest.fixture(scope="session")
def cluster_fixture():
    factor_set = make_factor_set(CLUSTER_FIXTURE_PATTERNS)
    matrix = seeded_matrix(list(CLUSTER_FIXTURE_PATTERNS), CLUSTER_FIXTURE_PAIRS)
    return factor_set, matrix


def build_pipeline_outputs(factor_set, kb, lexicon, matrix=None):
    """Run phases 2..6 in memory and return everything emit needs."""
    from taxoforge.applicability import indicators_for
    from taxoforge.cluster import assign_categories
    from taxoforge.pipeline import effective_domains
    from taxoforge.placement import place_cross_cutting

    if matrix is None:
        matrix = build_matrix(factor_set, SimilarityWeights(), lexicon)
    classifications = classify_factors(factor_set, kb, lexicon)
    assignments = assign_categories(factor_set, classifications, kb, matrix, lexicon)
    placements = place_cross_cutting(
        factor_set, classifications, kb, matrix, assignments, lexicon
    )
    domains = effective_domains(classifications, assignments, placements)
    indicators = indicators_for(factor_set.factors, classifications, domains, kb)
    return classifications, assignments, placements, indicators


@pytest.fixture(scope="session")
def sample_framework(sample_factors, sample_matrix, default_kb, default_lexicon):
    from taxoforge.emit import build_framework, validate

    classifications, assignments, placements, indicators = build_pipeline_outputs(
        sample_factors, default_kb, default_lexicon, sample_matrix
    )
    framework = build_framework(
        sample_factors,
        classifications,
        assignments,
        placements,
        indicators,
        default_kb,
    )
    report = validate(framework, sample_factors)
    return framework, report
