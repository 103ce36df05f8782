"""Distribution statistics and factor classification.

Counts-based classes: a factor active in five or more space types is
Universal, three or four Multi-space, one or two Space-specific. Distribution
entropy (natural log over the active-type count shares) measures evenness.
Cross-cutting detection scores each factor against every domain's keyword
lexicon and flags factors relevant to three or more domains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import TaxoforgeError
from .integrate import IntegratedFactor, IntegratedFactorSet, OccurrenceVector
from .knowledge import Domain, DomainKnowledgeBase
from .similarity import SemanticLexicon, linguistic_similarity

CROSS_CUTTING_THRESHOLD = 0.6
CROSS_CUTTING_MIN_DOMAINS = 3


def entropy(vector: OccurrenceVector) -> float:
    """Shannon entropy in nats over the active-type count shares."""
    total = vector.total
    if total == 0:
        raise TaxoforgeError("entropy is undefined for an all-zero vector")
    value = 0.0
    for count in vector.counts:
        if count > 0:
            p = count / total
            value -= p * math.log(p)
    return value


@dataclass(frozen=True)
class DistributionStats:
    active_type_count: int
    entropy_nats: float
    total_mentions: int


def distribution_stats(vector: OccurrenceVector) -> DistributionStats:
    return DistributionStats(
        active_type_count=len(vector.active_types),
        entropy_nats=entropy(vector),
        total_mentions=vector.total,
    )


class FactorClass(Enum):
    UNIVERSAL = "Universal"
    MULTI_SPACE = "Multi-space"
    SPACE_SPECIFIC = "Space-specific"


def classify(stats: DistributionStats) -> FactorClass:
    if stats.active_type_count >= 5:
        return FactorClass.UNIVERSAL
    if stats.active_type_count >= 3:
        return FactorClass.MULTI_SPACE
    return FactorClass.SPACE_SPECIFIC


class CrossCuttingStatus(Enum):
    LIMITED = "Limited"
    MODERATE = "Moderate"
    HIGH = "High"
    VERY_HIGH = "Very High"

    @classmethod
    def from_score(cls, score: int) -> "CrossCuttingStatus":
        if score <= 1:
            return cls.LIMITED
        if score == 2:
            return cls.MODERATE
        if score == 3:
            return cls.HIGH
        return cls.VERY_HIGH


@dataclass(frozen=True)
class CrossCuttingAssessment:
    relevant_domains: tuple[str, ...]
    score: int
    status: CrossCuttingStatus
    flagged: bool


def domain_relevance(name: str, domain: Domain, lexicon: SemanticLexicon) -> float:
    """Best linguistic match between a factor name and the domain's keywords."""
    return max(
        linguistic_similarity(name, keyword, lexicon) for keyword in domain.keywords
    )


def primary_domain(
    factor: IntegratedFactor,
    kb: DomainKnowledgeBase,
    lexicon: SemanticLexicon,
) -> str:
    """Domain whose keyword lexicon best matches the factor name.

    Ties break by KB domain order. Raises when no domain scores above zero;
    the pipeline treats that factor as unassignable and reports it.
    """
    best_id, best_score = None, 0.0
    for domain in kb.domains:
        score = domain_relevance(factor.canonical_name, domain, lexicon)
        if score > best_score:
            best_id, best_score = domain.identifier, score
    if best_id is None:
        raise TaxoforgeError(
            f"factor {factor.canonical_name!r} matches no domain lexicon"
        )
    return best_id


def assess_cross_cutting(
    factor: IntegratedFactor,
    kb: DomainKnowledgeBase,
    lexicon: SemanticLexicon,
    threshold: float = CROSS_CUTTING_THRESHOLD,
) -> CrossCuttingAssessment:
    relevant = tuple(
        domain.identifier
        for domain in kb.domains
        if domain_relevance(factor.canonical_name, domain, lexicon) >= threshold
    )
    score = len(relevant)
    return CrossCuttingAssessment(
        relevant_domains=relevant,
        score=score,
        status=CrossCuttingStatus.from_score(score),
        flagged=score >= CROSS_CUTTING_MIN_DOMAINS,
    )


@dataclass(frozen=True)
class ClassificationResult:
    name: str
    stats: DistributionStats
    factor_class: FactorClass
    primary_domain: str | None
    cross_cutting: CrossCuttingAssessment


def classify_factors(
    factor_set: IntegratedFactorSet,
    kb: DomainKnowledgeBase,
    lexicon: SemanticLexicon,
    threshold: float = CROSS_CUTTING_THRESHOLD,
) -> list[ClassificationResult]:
    results = []
    for factor in factor_set.factors:
        stats = distribution_stats(factor.occurrence)
        try:
            domain_id = primary_domain(factor, kb, lexicon)
        except TaxoforgeError:
            domain_id = None
        results.append(
            ClassificationResult(
                name=factor.canonical_name,
                stats=stats,
                factor_class=classify(stats),
                primary_domain=domain_id,
                cross_cutting=assess_cross_cutting(factor, kb, lexicon, threshold),
            )
        )
    return results


@dataclass(frozen=True)
class ClassificationCensus:
    universal: int
    multi_space: int
    space_specific: int
    cross_cutting: int

    @property
    def total(self) -> int:
        return self.universal + self.multi_space + self.space_specific

    def fraction(self, count: int) -> float:
        return count / self.total if self.total else 0.0


def classification_census(results: list[ClassificationResult]) -> ClassificationCensus:
    universal = sum(1 for r in results if r.factor_class is FactorClass.UNIVERSAL)
    multi = sum(1 for r in results if r.factor_class is FactorClass.MULTI_SPACE)
    specific = sum(1 for r in results if r.factor_class is FactorClass.SPACE_SPECIFIC)
    flagged = sum(1 for r in results if r.cross_cutting.flagged)
    return ClassificationCensus(
        universal=universal,
        multi_space=multi,
        space_specific=specific,
        cross_cutting=flagged,
    )


def classification_to_dict(results: list[ClassificationResult]) -> dict:
    return {
        "factors": [
            {
                "name": r.name,
                "active_type_count": r.stats.active_type_count,
                "entropy_nats": r.stats.entropy_nats,
                "total_mentions": r.stats.total_mentions,
                "class": r.factor_class.value,
                "primary_domain": r.primary_domain,
                "relevant_domains": list(r.cross_cutting.relevant_domains),
                "cross_cutting_score": r.cross_cutting.score,
                "status": r.cross_cutting.status.value,
                "flagged": r.cross_cutting.flagged,
            }
            for r in results
        ]
    }


def classification_from_dict(doc: dict) -> list[ClassificationResult]:
    results = []
    for entry in doc["factors"]:
        results.append(
            ClassificationResult(
                name=entry["name"],
                stats=DistributionStats(
                    active_type_count=entry["active_type_count"],
                    entropy_nats=entry["entropy_nats"],
                    total_mentions=entry["total_mentions"],
                ),
                factor_class=FactorClass(entry["class"]),
                primary_domain=entry["primary_domain"],
                cross_cutting=CrossCuttingAssessment(
                    relevant_domains=tuple(entry["relevant_domains"]),
                    score=entry["cross_cutting_score"],
                    status=CrossCuttingStatus(entry["status"]),
                    flagged=entry["flagged"],
                ),
            )
        )
    return results
