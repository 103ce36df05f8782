"""Final framework assembly, validation, and export writers.

The framework is a three-tier structure: categories hold subcategories, which
hold factor entries. A factor appears exactly once as a primary entry (its
home); cross-cutting factors additionally appear as secondary/tertiary stub
entries that reference the primary node. Exports are deterministic: the same
inputs produce byte-identical JSON, markdown, and flow-data files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .applicability import IndicatorRecord
from .classify import ClassificationResult
from .cluster import CategoryAssignment
from .corpus import SPACE_TYPES, SPACE_TYPE_NAMES
from .errors import TaxoforgeError
from .integrate import (
    IntegratedFactorSet,
    parse_tracking_notation,
    reduction_rate,
    tracking_notation,
)
from .knowledge import DomainKnowledgeBase
from .placement import PlacementResult, PlacementTier

SCHEMA_VERSION = 1

# Known internal inconsistencies in the source material this pipeline was
# built to reproduce. They are emitted as warnings, never as failures, so the
# outputs stay honest about printed values the computation cannot reproduce.
DISCREPANCY_NOTES: tuple[dict, ...] = (
    {
        "id": "pair-count",
        "note": (
            "Reported unique pair total 529,506 for 1,029 factors conflicts with "
            "n(n-1)/2 = 528,906; the computed value is used."
        ),
    },
    {
        "id": "entropy-row",
        "note": (
            "Reported distribution entropy 1.52 for counts (1,1,1,4,2) conflicts "
            "with the natural-log value 1.427; the computed value is used."
        ),
    },
    {
        "id": "placement-tier-row",
        "note": (
            "A reported rank-3 placement at composite 0.756 is labeled secondary "
            "although the promotion threshold is 0.80; the tier protocol output "
            "(tertiary) is used."
        ),
    },
    {
        "id": "occurrence-pattern-conflict",
        "note": (
            "The thermal comfort occurrence pattern is reported both as "
            "[P, O, U] and [P, O, F] in different source tables; fixtures label "
            "which variant they exercise."
        ),
    },
)


@dataclass(frozen=True)
class FrameworkEntry:
    canonical_name: str
    tracking_notation: str
    classification: str
    indicator: str
    tier: str
    placements: tuple[str, ...] = ()
    reference: str | None = None
    insertion_index: int = 0


@dataclass(frozen=True)
class FrameworkSubcategory:
    identifier: str
    factor_count: int
    entries: tuple[FrameworkEntry, ...]


@dataclass(frozen=True)
class FrameworkCategory:
    identifier: str
    factor_total: int
    subcategories: tuple[FrameworkSubcategory, ...]


@dataclass(frozen=True)
class FrameworkMetadata:
    total_original_factors: int
    unique_factors: int
    reduction_percentage: float
    space_types: tuple[str, ...]
    config_checksums: Mapping[str, str]


@dataclass(frozen=True)
class Framework:
    metadata: FrameworkMetadata
    categories: tuple[FrameworkCategory, ...]

    def primary_locations(self) -> dict[str, list[tuple[str, str]]]:
        """Map factor name to the (category, subcategory) of its primary entries."""
        out: dict[str, list[tuple[str, str]]] = {}
        for category in self.categories:
            for sub in category.subcategories:
                for entry in sub.entries:
                    if entry.tier == "primary":
                        out.setdefault(entry.canonical_name, []).append(
                            (category.identifier, sub.identifier)
                        )
        return out


def build_framework(
    factor_set: IntegratedFactorSet,
    classifications: Sequence[ClassificationResult],
    assignments: Sequence[CategoryAssignment],
    placement_result: PlacementResult,
    indicator_records: Sequence[IndicatorRecord],
    kb: DomainKnowledgeBase,
    total_original_factors: int | None = None,
    config_checksums: Mapping[str, str] | None = None,
) -> Framework:
    """Assemble the three-tier framework from the phase outputs."""
    if not factor_set.factors:
        raise TaxoforgeError("cannot build a framework from an empty factor set")
    names = set(factor_set.names)
    for label, collection in (
        ("classifications", [c.name for c in classifications]),
        ("assignments", [a.factor for a in assignments]),
        ("indicators", [r.name for r in indicator_records]),
    ):
        if set(collection) != names:
            raise TaxoforgeError(f"phase-output mismatch: {label} cover a different factor set")

    by_name = {f.canonical_name: f for f in factor_set.factors}
    class_by_name = {c.name: c for c in classifications}
    assign_by_name = {a.factor: a for a in assignments}
    indicator_by_name = {r.name: r for r in indicator_records}

    placements_by_name: dict[str, list] = {}
    for placement in placement_result.placements:
        placements_by_name.setdefault(placement.factor, []).append(placement)

    # (category, subcategory) -> entries
    buckets: dict[tuple[str, str], list[FrameworkEntry]] = {}

    def add_entry(category: str, subcategory: str, entry: FrameworkEntry) -> None:
        buckets.setdefault((category, subcategory), []).append(entry)

    for factor in factor_set.factors:
        name = factor.canonical_name
        result = class_by_name[name]
        notation = tracking_notation(factor.occurrence)
        indicator_text = indicator_by_name[name].indicator.text
        placements = placements_by_name.get(name)
        if result.cross_cutting.flagged and placements:
            primary = next(
                p for p in placements if p.tier is PlacementTier.PRIMARY
            )
            labels = tuple(
                f"{p.domain}/{p.subcategory} ({p.tier.value})" for p in placements
            )
            add_entry(
                primary.domain,
                primary.subcategory,
                FrameworkEntry(
                    canonical_name=name,
                    tracking_notation=notation,
                    classification=result.factor_class.value,
                    indicator=indicator_text,
                    tier="primary",
                    placements=labels,
                    insertion_index=factor.insertion_index,
                ),
            )
            for placement in placements:
                if placement.tier is PlacementTier.PRIMARY:
                    continue
                add_entry(
                    placement.domain,
                    placement.subcategory,
                    FrameworkEntry(
                        canonical_name=name,
                        tracking_notation=notation,
                        classification=result.factor_class.value,
                        indicator=indicator_text,
                        tier=placement.tier.value,
                        reference=f"{primary.domain}/{primary.subcategory}",
                        insertion_index=factor.insertion_index,
                    ),
                )
        else:
            assignment = assign_by_name[name]
            add_entry(
                assignment.category,
                assignment.subcategory,
                FrameworkEntry(
                    canonical_name=name,
                    tracking_notation=notation,
                    classification=result.factor_class.value,
                    indicator=indicator_text,
                    tier="primary",
                    insertion_index=factor.insertion_index,
                ),
            )

    categories = []
    for domain in kb.domains:
        subcategories = []
        primary_total = 0
        for sub in domain.subcategories:
            entries = buckets.get((domain.identifier, sub.identifier))
            if not entries:
                continue
            entries.sort(key=lambda e: e.insertion_index)
            count = sum(1 for e in entries if e.tier == "primary")
            primary_total += count
            subcategories.append(
                FrameworkSubcategory(
                    identifier=sub.identifier,
                    factor_count=count,
                    entries=tuple(entries),
                )
            )
        if subcategories:
            categories.append(
                FrameworkCategory(
                    identifier=domain.identifier,
                    factor_total=primary_total,
                    subcategories=tuple(subcategories),
                )
            )

    raw_total = (
        total_original_factors
        if total_original_factors is not None
        else factor_set.raw_record_count
    )
    metadata = FrameworkMetadata(
        total_original_factors=raw_total,
        unique_factors=factor_set.unique_count,
        reduction_percentage=100.0 * reduction_rate(raw_total, factor_set.unique_count),
        space_types=SPACE_TYPES,
        config_checksums=dict(config_checksums or {}),
    )
    return Framework(metadata=metadata, categories=tuple(categories))


@dataclass(frozen=True)
class ValidationCheck:
    passed: bool
    problems: tuple[str, ...] = ()


@dataclass(frozen=True)
class ValidationReport:
    completeness: ValidationCheck
    hierarchy_integrity: ValidationCheck
    indicator_consistency: ValidationCheck
    paper_discrepancy_notes: tuple[dict, ...] = field(default=DISCREPANCY_NOTES)

    @property
    def passed(self) -> bool:
        return (
            self.completeness.passed
            and self.hierarchy_integrity.passed
            and self.indicator_consistency.passed
        )


_KIND_BY_CLASS = {
    "Universal": {"Universal – All Space Types", "Universal (with emphasis"},
    "Multi-space": {"Strong:", "Multi-space:"},
    "Space-specific": {"Space-specific:"},
}


def validate(
    framework: Framework, factor_set: IntegratedFactorSet
) -> ValidationReport:
    """Run the completeness, integrity, and indicator-consistency checks.

    Content problems become report entries; this never raises on them.
    """
    locations = framework.primary_locations()

    missing = tuple(
        name for name in factor_set.names if name not in locations
    )
    completeness = ValidationCheck(passed=not missing, problems=missing)

    duplicated = tuple(
        f"{name}: {len(homes)} primary homes"
        for name, homes in sorted(locations.items())
        if len(homes) != 1
    )
    stray = tuple(
        f"{name}: not in the integrated set"
        for name in sorted(locations)
        if name not in set(factor_set.names)
    )
    hierarchy = ValidationCheck(
        passed=not duplicated and not stray, problems=duplicated + stray
    )

    mismatches = []
    for category in framework.categories:
        for sub in category.subcategories:
            for entry in sub.entries:
                expected = _KIND_BY_CLASS.get(entry.classification)
                if expected is None:
                    mismatches.append(
                        f"{entry.canonical_name}: unknown classification "
                        f"{entry.classification!r}"
                    )
                    continue
                if not any(entry.indicator.startswith(prefix) for prefix in expected):
                    mismatches.append(
                        f"{entry.canonical_name}: indicator {entry.indicator!r} "
                        f"inconsistent with class {entry.classification}"
                    )
    indicator_consistency = ValidationCheck(
        passed=not mismatches, problems=tuple(mismatches)
    )

    return ValidationReport(
        completeness=completeness,
        hierarchy_integrity=hierarchy,
        indicator_consistency=indicator_consistency,
    )


def framework_to_dict(framework: Framework) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "total_original_factors": framework.metadata.total_original_factors,
            "unique_factors": framework.metadata.unique_factors,
            "reduction_percentage": framework.metadata.reduction_percentage,
            "space_types": list(framework.metadata.space_types),
            "config_checksums": dict(framework.metadata.config_checksums),
        },
        "categories": [
            {
                "identifier": category.identifier,
                "factor_total": category.factor_total,
                "subcategories": [
                    {
                        "identifier": sub.identifier,
                        "factor_count": sub.factor_count,
                        "entries": [
                            {
                                "canonical_name": entry.canonical_name,
                                "tracking_notation": entry.tracking_notation,
                                "classification": entry.classification,
                                "indicator": entry.indicator,
                                "tier": entry.tier,
                                "placements": list(entry.placements),
                                "reference": entry.reference,
                                "insertion_index": entry.insertion_index,
                            }
                            for entry in sub.entries
                        ],
                    }
                    for sub in category.subcategories
                ],
            }
            for category in framework.categories
        ],
    }


def framework_from_dict(doc: dict) -> Framework:
    metadata = doc["metadata"]
    categories = tuple(
        FrameworkCategory(
            identifier=cat["identifier"],
            factor_total=cat["factor_total"],
            subcategories=tuple(
                FrameworkSubcategory(
                    identifier=sub["identifier"],
                    factor_count=sub["factor_count"],
                    entries=tuple(
                        FrameworkEntry(
                            canonical_name=entry["canonical_name"],
                            tracking_notation=entry["tracking_notation"],
                            classification=entry["classification"],
                            indicator=entry["indicator"],
                            tier=entry["tier"],
                            placements=tuple(entry["placements"]),
                            reference=entry["reference"],
                            insertion_index=entry["insertion_index"],
                        )
                        for entry in sub["entries"]
                    ),
                )
                for sub in cat["subcategories"]
            ),
        )
        for cat in doc["categories"]
    )
    return Framework(
        metadata=FrameworkMetadata(
            total_original_factors=metadata["total_original_factors"],
            unique_factors=metadata["unique_factors"],
            reduction_percentage=metadata["reduction_percentage"],
            space_types=tuple(metadata["space_types"]),
            config_checksums=dict(metadata["config_checksums"]),
        ),
        categories=categories,
    )


def report_to_dict(report: ValidationReport) -> dict:
    def check(c: ValidationCheck) -> dict:
        return {"passed": c.passed, "problems": list(c.problems)}

    return {
        "passed": report.passed,
        "completeness": check(report.completeness),
        "hierarchy_integrity": check(report.hierarchy_integrity),
        "indicator_consistency": check(report.indicator_consistency),
        "paper_discrepancy_notes": [dict(n) for n in report.paper_discrepancy_notes],
    }


def to_canonical_json(doc: dict) -> str:
    return json.dumps(doc, ensure_ascii=False, indent=2) + "\n"


def export_document(
    framework: Framework,
    report: ValidationReport,
    path: str | Path,
    format: str = "structured",
) -> None:
    """Write the framework document; ``structured`` is JSON, else markdown."""
    path = Path(path)
    if format == "structured":
        doc = framework_to_dict(framework)
        doc["validation"] = report_to_dict(report)
        path.write_text(to_canonical_json(doc), encoding="utf-8")
    elif format == "markdown":
        path.write_text(render_markdown(framework, report), encoding="utf-8")
    else:
        raise TaxoforgeError(f"unknown document format {format!r}")


def render_markdown(framework: Framework, report: ValidationReport) -> str:
    meta = framework.metadata
    lines = [
        "# Public Space Quality Factor Framework",
        "",
        f"- Original factor records: {meta.total_original_factors}",
        f"- Unique factors: {meta.unique_factors}",
        f"- Redundancy reduction: {meta.reduction_percentage:.1f}%",
        f"- Space types: {', '.join(meta.space_types)}",
        "",
    ]
    for category in framework.categories:
        lines.append(f"## {category.identifier} ({category.factor_total} factors)")
        lines.append("")
        for sub in category.subcategories:
            lines.append(f"### {sub.identifier} ({sub.factor_count})")
            lines.append("")
            for entry in sub.entries:
                if entry.reference is not None:
                    lines.append(
                        f"- {entry.canonical_name} ({entry.tier}) → see {entry.reference}"
                    )
                else:
                    lines.append(
                        f"- {entry.canonical_name} {entry.tracking_notation} — "
                        f"{entry.indicator} — {entry.tier}"
                    )
            lines.append("")
    lines.append("## Validation")
    lines.append("")
    lines.append(f"- Overall: {'pass' if report.passed else 'FAIL'}")
    for label, check in (
        ("Completeness", report.completeness),
        ("Hierarchy integrity", report.hierarchy_integrity),
        ("Indicator consistency", report.indicator_consistency),
    ):
        lines.append(f"- {label}: {'pass' if check.passed else 'FAIL'}")
        for problem in check.problems:
            lines.append(f"  - {problem}")
    if report.paper_discrepancy_notes:
        lines.append("")
        lines.append("### Source discrepancy notes")
        lines.append("")
        for note in report.paper_discrepancy_notes:
            lines.append(f"- [{note['id']}] {note['note']}")
    lines.append("")
    return "\n".join(lines)


@dataclass(frozen=True)
class SankeyNode:
    id: str
    label: str
    layer: str  # Subfactor | Indicator | SpaceType


@dataclass(frozen=True)
class SankeyLink:
    source: str
    target: str
    weight: int


@dataclass(frozen=True)
class SankeyExport:
    nodes: tuple[SankeyNode, ...]
    links: tuple[SankeyLink, ...]


def resolve_category(framework: Framework, wanted: str) -> FrameworkCategory:
    """Exact match first, then a unique case-insensitive prefix."""
    for category in framework.categories:
        if category.identifier == wanted:
            return category
    matches = [
        category
        for category in framework.categories
        if category.identifier.casefold().startswith(wanted.casefold())
    ]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise TaxoforgeError(f"unknown category {wanted!r}")
    names = ", ".join(category.identifier for category in matches)
    raise TaxoforgeError(f"category {wanted!r} is ambiguous: {names}")


def export_sankey(
    framework: Framework,
    category_id: str,
    subfactors: Sequence[str] | None = None,
) -> SankeyExport:
    """Flow data for one category: factors → subcategories → space types.

    Link weights are occurrence counts, so the per-type inbound totals equal
    the summed occurrence counts of the included primary-home factors.
    """
    category = resolve_category(framework, category_id)
    all_names = {
        entry.canonical_name
        for cat in framework.categories
        for sub in cat.subcategories
        for entry in sub.entries
    }
    selected: set[str] | None = None
    if subfactors is not None:
        selected = set()
        for name in subfactors:
            if name not in all_names:
                raise TaxoforgeError(f"unknown subfactor filter {name!r}")
            selected.add(name)

    nodes: list[SankeyNode] = []
    links: list[SankeyLink] = []
    factor_nodes: list[tuple[int, SankeyNode]] = []
    type_totals = {code: 0 for code in SPACE_TYPES}

    for sub in category.subcategories:
        entries = [
            entry
            for entry in sub.entries
            if entry.tier == "primary"
            and (selected is None or entry.canonical_name in selected)
        ]
        if not entries:
            continue
        sub_id = f"subcat:{sub.identifier}"
        nodes.append(SankeyNode(id=sub_id, label=sub.identifier, layer="Indicator"))
        sub_type_totals = {code: 0 for code in SPACE_TYPES}
        for entry in entries:
            vector = parse_tracking_notation(entry.tracking_notation)
            factor_id = f"factor:{entry.canonical_name}"
            factor_nodes.append(
                (
                    entry.insertion_index,
                    SankeyNode(
                        id=factor_id, label=entry.canonical_name, layer="Subfactor"
                    ),
                )
            )
            links.append(
                SankeyLink(source=factor_id, target=sub_id, weight=vector.total)
            )
            for code, count in zip(SPACE_TYPES, vector.counts):
                sub_type_totals[code] += count
        for code in SPACE_TYPES:
            count = sub_type_totals[code]
            if count > 0:
                links.append(
                    SankeyLink(source=sub_id, target=f"type:{code}", weight=count)
                )
                type_totals[code] += count

    factor_nodes.sort(key=lambda item: item[0])
    ordered_nodes = [node for _, node in factor_nodes] + nodes
    for code in SPACE_TYPES:
        if type_totals[code] > 0:
            ordered_nodes.append(
                SankeyNode(
                    id=f"type:{code}", label=SPACE_TYPE_NAMES[code], layer="SpaceType"
                )
            )
    return SankeyExport(nodes=tuple(ordered_nodes), links=tuple(links))


def render_sankey(export: SankeyExport) -> str:
    """Two-section delimited text: nodes (id,label,layer) then links."""
    lines = ["nodes", "id,label,layer"]
    for node in export.nodes:
        lines.append(f"{node.id},{node.label},{node.layer}")
    lines.append("links")
    lines.append("source,target,weight")
    for link in export.links:
        lines.append(f"{link.source},{link.target},{link.weight}")
    return "\n".join(lines) + "\n"


def write_sankey(export: SankeyExport, path: str | Path) -> None:
    Path(path).write_text(render_sankey(export), encoding="utf-8")
