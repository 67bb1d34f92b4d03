"""Structured scenario queries and the braced LLM response grammar.

The taxonomy is closed: three longitudinal activities, three lateral
activities, and six relative positions grouped into same lane / adjacent
lane / lane next to adjacent lane.  Parsing of the braced text form is
deliberately tolerant (case, quoting, whitespace); validation is strict.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .activities import LateralActivity, LongitudinalActivity
from .errors import MalformedResponseError, ResponseStructureError, VocabularyError
from .positions import RelativePosition

# --- taxonomy ---------------------------------------------------------

GROUP_SAME_LANE = "same lane"
GROUP_ADJACENT = "adjacent lane"
GROUP_NEXT_TO_ADJACENT = "lane next to adjacent lane"

GROUP_MEMBERS: dict[str, tuple[RelativePosition, ...]] = {
    GROUP_SAME_LANE: (RelativePosition.FRONT, RelativePosition.BEHIND),
    GROUP_ADJACENT: (
        RelativePosition.LEFT_ADJACENT,
        RelativePosition.RIGHT_ADJACENT,
    ),
    GROUP_NEXT_TO_ADJACENT: (
        RelativePosition.NEXT_TO_LEFT_ADJACENT,
        RelativePosition.NEXT_TO_RIGHT_ADJACENT,
    ),
}

GROUP_OF_MEMBER: dict[RelativePosition, str] = {
    member: group
    for group, members in GROUP_MEMBERS.items()
    for member in members
}

_LON_BY_LABEL = {a.value: a for a in LongitudinalActivity}
_LAT_BY_LABEL = {a.value: a for a in LateralActivity}
_POSITION_BY_LABEL = {p.value: p for p in GROUP_OF_MEMBER}


def _canon(label: str) -> str:
    return re.sub(r"\s+", " ", label.strip().strip("'\"").strip()).lower()


def _lon_from_label(label: str) -> LongitudinalActivity:
    key = _canon(label)
    if key not in _LON_BY_LABEL:
        raise VocabularyError(label.strip())
    return _LON_BY_LABEL[key]


def _lat_from_label(label: str) -> LateralActivity:
    key = _canon(label)
    if key not in _LAT_BY_LABEL:
        raise VocabularyError(label.strip())
    return _LAT_BY_LABEL[key]


def position_from_label(label: str) -> RelativePosition:
    key = _canon(label)
    if key not in _POSITION_BY_LABEL:
        raise VocabularyError(label.strip())
    return _POSITION_BY_LABEL[key]


# --- query types ------------------------------------------------------

@dataclass(frozen=True)
class PositionLabel:
    """A (group, member) pair as the response grammar states positions."""

    group: str
    member: RelativePosition

    @classmethod
    def of(cls, member: RelativePosition) -> "PositionLabel":
        return cls(GROUP_OF_MEMBER[member], member)


@dataclass(frozen=True)
class TargetSpec:
    start_position: PositionLabel
    end_position: PositionLabel
    longitudinal: LongitudinalActivity
    lateral: LateralActivity


@dataclass(frozen=True)
class ScenarioQuery:
    ego_longitudinal: LongitudinalActivity
    ego_lateral: LateralActivity
    targets: tuple[TargetSpec, ...]


def validate_query(query: ScenarioQuery) -> list[str]:
    """Strict taxonomy check; returns a list of violations (empty = valid)."""
    violations: list[str] = []
    if not query.targets:
        violations.append("at least one target is required")
    for i, tgt in enumerate(query.targets, start=1):
        for which, pos in (
            ("start", tgt.start_position),
            ("end", tgt.end_position),
        ):
            if pos.group not in GROUP_MEMBERS:
                violations.append(
                    f"target #{i} {which} position: unknown group {pos.group!r}"
                )
            elif pos.member not in GROUP_MEMBERS[pos.group]:
                violations.append(
                    f"target #{i} {which} position: member "
                    f"{pos.member.value!r} not in group {pos.group!r}"
                )
    return violations


# --- canonical JSON mirror -------------------------------------------

def query_to_json(query: ScenarioQuery) -> dict:
    return {
        "ego": {
            "longitudinal": query.ego_longitudinal.value,
            "lateral": query.ego_lateral.value,
        },
        "targets": [
            {
                "start": {
                    "group": t.start_position.group,
                    "member": t.start_position.member.value,
                },
                "end": {
                    "group": t.end_position.group,
                    "member": t.end_position.member.value,
                },
                "longitudinal": t.longitudinal.value,
                "lateral": t.lateral.value,
            }
            for t in query.targets
        ],
    }


def query_from_json(obj: dict) -> ScenarioQuery:
    def position(p: dict) -> PositionLabel:
        member = position_from_label(p["member"])
        group = _canon(p.get("group", GROUP_OF_MEMBER[member]))
        if group not in GROUP_MEMBERS:
            raise VocabularyError(p.get("group", ""))
        return PositionLabel(group, member)

    ego = obj["ego"]
    return ScenarioQuery(
        ego_longitudinal=_lon_from_label(ego["longitudinal"]),
        ego_lateral=_lat_from_label(ego["lateral"]),
        targets=tuple(
            TargetSpec(
                start_position=position(t["start"]),
                end_position=position(t["end"]),
                longitudinal=_lon_from_label(t["longitudinal"]),
                lateral=_lat_from_label(t["lateral"]),
            )
            for t in obj.get("targets", [])
        ),
    )


# --- braced text form (the LLM boundary) ------------------------------

_EGO_LON_RE = re.compile(
    r"ego\s+longitudinal\s+activity\s*:\s*\[?\s*['\"]?([^'\"\[\]\n,}{]+)",
    re.IGNORECASE,
)
_EGO_LAT_RE = re.compile(
    r"ego\s+lateral\s+activity\s*:\s*\[?\s*['\"]?([^'\"\[\]\n,}{]+)",
    re.IGNORECASE,
)
_TARGET_HEADER_RE = re.compile(
    r"target\s+vehicle\s*(?:#\s*(\d+))?\s*:", re.IGNORECASE
)
_TGT_POS_RE = {
    which: re.compile(
        r"target\s+%s\s+position\s*:\s*\{?\s*['\"]?([^'\"{}:\[\]\n]+?)['\"]?"
        r"\s*:\s*\[?\s*['\"]?([^'\"\[\]\n,}{]+)" % which,
        re.IGNORECASE,
    )
    for which in ("start", "end")
}
_TGT_LON_RE = re.compile(
    r"target\s+longitudinal\s+activity\s*:\s*\[?\s*['\"]?([^'\"\[\]\n,}{]+)",
    re.IGNORECASE,
)
_TGT_LAT_RE = re.compile(
    r"target\s+lateral\s+activity\s*:\s*\[?\s*['\"]?([^'\"\[\]\n,}{]+)",
    re.IGNORECASE,
)


def parse_llm_response(text: str) -> ScenarioQuery:
    """Tolerant parse of the braced response structure into a query.

    Targets may appear in any order and are re-ordered by their '#'
    numeral; a single unnumbered 'Target Vehicle:' block is accepted.
    """
    ego_lon = _EGO_LON_RE.search(text)
    ego_lat = _EGO_LAT_RE.search(text)
    if ego_lon is None or ego_lat is None:
        raise MalformedResponseError("missing ego block")

    headers = list(_TARGET_HEADER_RE.finditer(text))
    numbered: list[tuple[int, TargetSpec]] = []
    seen: set[int] = set()
    for i, header in enumerate(headers):
        number = int(header.group(1)) if header.group(1) else i + 1
        if number in seen:
            raise ResponseStructureError(
                f"duplicate target numeral #{number}"
            )
        seen.add(number)
        chunk_end = (
            headers[i + 1].start() if i + 1 < len(headers) else len(text)
        )
        chunk = text[header.end():chunk_end]
        numbered.append((number, _parse_target_chunk(chunk, number)))

    numbered.sort(key=lambda pair: pair[0])
    return ScenarioQuery(
        ego_longitudinal=_lon_from_label(ego_lon.group(1)),
        ego_lateral=_lat_from_label(ego_lat.group(1)),
        targets=tuple(spec for _, spec in numbered),
    )


def _parse_target_chunk(chunk: str, number: int) -> TargetSpec:
    positions = {}
    for which, pattern in _TGT_POS_RE.items():
        m = pattern.search(chunk)
        if m is None:
            raise MalformedResponseError(
                f"target #{number}: missing {which} position"
            )
        group = _canon(m.group(1))
        member = position_from_label(m.group(2))
        if group not in GROUP_MEMBERS:
            raise VocabularyError(m.group(1).strip())
        positions[which] = PositionLabel(group, member)
    lon = _TGT_LON_RE.search(chunk)
    lat = _TGT_LAT_RE.search(chunk)
    if lon is None or lat is None:
        raise MalformedResponseError(
            f"target #{number}: missing behavior block"
        )
    return TargetSpec(
        start_position=positions["start"],
        end_position=positions["end"],
        longitudinal=_lon_from_label(lon.group(1)),
        lateral=_lat_from_label(lat.group(1)),
    )


def query_to_text(query: ScenarioQuery) -> str:
    """Canonical braced serialization; parse_llm_response inverts it."""
    lines = [
        "{",
        "  Ego Vehicle: {Ego longitudinal activity: "
        f"['{query.ego_longitudinal.value}'], "
        f"Ego lateral activity: ['{query.ego_lateral.value}']}},",
    ]
    for i, t in enumerate(query.targets, start=1):
        lines += [
            f"  Target Vehicle #{i}:",
            "  {",
            f"    Target start position: {{'{t.start_position.group}': "
            f"['{t.start_position.member.value}']}},",
            f"    Target end position: {{'{t.end_position.group}': "
            f"['{t.end_position.member.value}']}},",
            f"    Target behavior: {{target longitudinal activity: "
            f"['{t.longitudinal.value}'],",
            f"      target lateral activity: ['{t.lateral.value}']}}",
            "  }",
        ]
    lines.append("}")
    return "\n".join(lines)
