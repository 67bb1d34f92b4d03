"""Turn a natural-language scenario description into a structured query.

Two paths: a remote chat-completion provider (the production path) and a
deterministic offline interpreter driven by a phrase table (the testing
path; also the fallback when no network or key is available).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

import requests

from .activities import LateralActivity, LongitudinalActivity
from .errors import (
    CredentialError,
    InputError,
    InterpretationError,
    MalformedResponseError,
    ProviderError,
    ResponseStructureError,
    VocabularyError,
)
from .positions import RelativePosition
from .schema import (
    GROUP_MEMBERS,
    GROUP_OF_MEMBER,
    PositionLabel,
    ScenarioQuery,
    TargetSpec,
    parse_llm_response,
)

# --- prompt -----------------------------------------------------------

TAXONOMY_TEXT = """Ego/Target Vehicle Activity:
  Longitudinal Activity: 'keep velocity', 'acceleration', 'deceleration'
  Lateral Activity: 'follow lane', 'lane change left', 'lane change right'
Target Vehicle Position:
  Same Lane: 'front', 'behind'
  Adjacent Lane: 'left adjacent lane', 'right adjacent lane'
  Lane Next to Adjacent Lane: 'lane next to left adjacent lane', 'lane next to right adjacent lane'"""

_SYSTEM_TEMPLATE = (
    "System, you are an AI trained to understand and classify driving "
    "scenarios based on specific frameworks. Your task is to analyze the "
    "following driving scenario and classify the behavior of both the ego "
    "vehicle and the target vehicle according to the given classification "
    "framework. Please follow the framework strictly and provide precise "
    "and clear classifications. The framework is as follows:\n"
    "{taxonomy}"
)

_FORMAT_SEGMENT = """Provide a detailed classification for both the ego vehicle and the target vehicle(s). The response should be formatted exactly as shown in this structure:
{
  Ego Vehicle: {Ego longitudinal activity: ['Your Classification'], Ego lateral activity: ['Your Classification']},
  Target Vehicle #1:
  {
    Target start position: {'Your Classification': ['Your Classification']},
    Target end position: {'Your Classification': ['Your Classification']},
    Target behavior: {target longitudinal activity: ['Your Classification'],
      target lateral activity: ['Your Classification']}
  }
  Target Vehicle #2:
  {
    ......
    ......
  }
}"""

_EXAMPLE_SEGMENT = """Example: If an ego vehicle is maintaining speed and following its lane, while another vehicle is initially in the left adjacent lane and is accelerating, then changing lanes to the right; finally driving on the front of ego vehicle, the classification would be:
{
  Ego Vehicle: {Ego longitudinal activity: ['keep velocity'], Ego lateral activity: ['follow lane']},
  Target Vehicle:
  {
    Target start position: {'adjacent lane': ['left adjacent lane']},
    Target end position: {'same lane': ['front']},
    Target behavior: {target longitudinal activity: ['acceleration'],
      target lateral activity: ['lane change right']}
  }
}"""

_CLOSING_SEGMENT = (
    "Remember to analyze carefully and provide the classification as per "
    "the structure given above."
)

CORRECTIVE_SENTENCE = (
    "Your previous answer did not follow the required structure. "
    "Respond again using exactly the structure given."
)


@dataclass(frozen=True)
class PromptBundle:
    """The five prompt segments, concatenated in fixed order."""

    system_segment: str
    description_segment: str
    format_segment: str
    example_segment: str
    closing_segment: str

    def concatenated(self) -> str:
        return "\n\n".join(
            (
                self.system_segment,
                self.description_segment,
                self.format_segment,
                self.example_segment,
                self.closing_segment,
            )
        )


def build_prompt(description: str) -> PromptBundle:
    if not description or not description.strip():
        raise InputError("scenario description must be non-empty")
    return PromptBundle(
        system_segment=_SYSTEM_TEMPLATE.format(taxonomy=TAXONOMY_TEXT),
        description_segment=f"Scenario Description: {description}",
        format_segment=_FORMAT_SEGMENT,
        example_segment=_EXAMPLE_SEGMENT,
        closing_segment=_CLOSING_SEGMENT,
    )


# --- remote path ------------------------------------------------------

@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4-1106-preview"
    api_key: str = ""
    timeout: float = 60.0
    max_retries: int = 2
    max_response_tokens: int = 800

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")


Transport = Callable[[dict, dict], str]


def _http_transport(provider: ProviderConfig) -> Transport:
    def send(payload: dict, headers: dict) -> str:
        resp = requests.post(
            provider.endpoint,
            json=payload,
            headers=headers,
            timeout=provider.timeout,
        )
        if resp.status_code in (401, 403):
            raise CredentialError(
                f"provider rejected credentials (HTTP {resp.status_code})"
            )
        resp.raise_for_status()
        body = resp.json()
        return body["choices"][0]["message"]["content"]

    return send


def interpret_remote(
    description: str,
    provider: ProviderConfig,
    transport: Optional[Transport] = None,
    raw_response_sink: Optional[Callable[[str], None]] = None,
) -> ScenarioQuery:
    """Ask the completion provider to classify the description.

    Retries on transport failures and on malformed responses, appending a
    fixed corrective sentence in the latter case.  Temperature 0 and a
    response-length cap keep the exchange as deterministic as the
    provider allows.
    """
    prompt = build_prompt(description).concatenated()
    send = transport if transport is not None else _http_transport(provider)
    headers = {"Content-Type": "application/json"}
    if provider.api_key:
        headers["Authorization"] = f"Bearer {provider.api_key}"

    attempts = provider.max_retries + 1
    last_raw: Optional[str] = None
    last_error: Optional[Exception] = None
    content = prompt
    for _ in range(attempts):
        payload = {
            "model": provider.model,
            "messages": [{"role": "user", "content": content}],
            "temperature": 0,
            "max_tokens": provider.max_response_tokens,
        }
        try:
            raw = send(payload, headers)
        except CredentialError:
            raise
        except Exception as exc:  # transport-level failure
            last_error = exc
            continue
        last_raw = raw
        if raw_response_sink is not None:
            raw_response_sink(raw)
        try:
            return parse_llm_response(raw)
        except (MalformedResponseError, VocabularyError,
                ResponseStructureError) as exc:
            last_error = exc
            content = f"{prompt}\n\n{CORRECTIVE_SENTENCE}"
    raise ProviderError(
        f"provider failed after {attempts} attempts: {last_error}",
        last_response=last_raw,
    )


# --- offline path -----------------------------------------------------
#
# Phrase table.  Patterns are matched case-insensitively, in order; the
# first match in each family wins.  Unmatched activities default to
# 'keep velocity' / 'follow lane'.

_LON_PATTERNS: tuple[tuple[str, LongitudinalActivity], ...] = (
    (r"\bdecelerat\w*", LongitudinalActivity.DECELERATION),
    (r"\bbrak\w*", LongitudinalActivity.DECELERATION),
    (r"\bslows?\s+down", LongitudinalActivity.DECELERATION),
    (r"\baccelerat\w*", LongitudinalActivity.ACCELERATION),
    (r"\bspeeds?\s+up", LongitudinalActivity.ACCELERATION),
    (r"\bmaintain\w*\b[^.]*\b(velocity|speed)", LongitudinalActivity.KEEP_VELOCITY),
    (r"\bkeep\w*\b[^.]*\b(velocity|speed)", LongitudinalActivity.KEEP_VELOCITY),
    (r"\bconstant\s+(velocity|speed)", LongitudinalActivity.KEEP_VELOCITY),
)

_LAT_PATTERNS: tuple[tuple[str, LateralActivity], ...] = (
    (r"\bchang\w+\s+lanes?\s+to\s+the\s+right", LateralActivity.LANE_CHANGE_RIGHT),
    (r"\blane\s+change\s+right", LateralActivity.LANE_CHANGE_RIGHT),
    (r"\bcuts?\s+in\s+from\s+the\s+left", LateralActivity.LANE_CHANGE_RIGHT),
    (r"\bmerges?\s+right", LateralActivity.LANE_CHANGE_RIGHT),
    (r"\bchang\w+\s+lanes?\s+to\s+the\s+left", LateralActivity.LANE_CHANGE_LEFT),
    (r"\blane\s+change\s+left", LateralActivity.LANE_CHANGE_LEFT),
    (r"\bcuts?\s+in\s+from\s+the\s+right", LateralActivity.LANE_CHANGE_LEFT),
    (r"\bmerges?\s+left", LateralActivity.LANE_CHANGE_LEFT),
    (r"\bfollow\w*\b[^.]*\blane", LateralActivity.FOLLOW_LANE),
    (r"\bmaintain\w*\b[^.]*\blane", LateralActivity.FOLLOW_LANE),
    (r"\bkeep\w*\b[^.]*\blane", LateralActivity.FOLLOW_LANE),
    (r"\bstays?\s+in\b[^.]*\blane", LateralActivity.FOLLOW_LANE),
)

_POSITION_PATTERNS: tuple[tuple[str, RelativePosition], ...] = (
    (r"in\s+front\s+of\s+the\s+ego(\s+vehicle)?(\s+in\s+the\s+same\s+lane)?",
     RelativePosition.FRONT),
    (r"ahead\s+of\s+the\s+ego(\s+vehicle)?", RelativePosition.FRONT),
    (r"behind\s+the\s+ego(\s+vehicle)?", RelativePosition.BEHIND),
    (r"lane\s+next\s+to\s+(the\s+)?left\s+adjacent\s+lane",
     RelativePosition.NEXT_TO_LEFT_ADJACENT),
    (r"lane\s+next\s+to\s+(the\s+)?right\s+adjacent\s+lane",
     RelativePosition.NEXT_TO_RIGHT_ADJACENT),
    (r"left\s+adjacent\s+lane", RelativePosition.LEFT_ADJACENT),
    (r"right\s+adjacent\s+lane", RelativePosition.RIGHT_ADJACENT),
)

# How a lane change shifts the lane-id offset behind a position label
# (convention of a vehicle travelling in +x; the labels themselves are
# direction-neutral).
_LANE_OFFSET: dict[RelativePosition, int] = {
    RelativePosition.FRONT: 0,
    RelativePosition.BEHIND: 0,
    RelativePosition.LEFT_ADJACENT: -1,
    RelativePosition.RIGHT_ADJACENT: 1,
    RelativePosition.NEXT_TO_LEFT_ADJACENT: -2,
    RelativePosition.NEXT_TO_RIGHT_ADJACENT: 2,
}
_POSITION_OF_OFFSET: dict[int, RelativePosition] = {
    -2: RelativePosition.NEXT_TO_LEFT_ADJACENT,
    -1: RelativePosition.LEFT_ADJACENT,
    0: RelativePosition.FRONT,  # a derived same-lane end is ahead of the ego
    1: RelativePosition.RIGHT_ADJACENT,
    2: RelativePosition.NEXT_TO_RIGHT_ADJACENT,
}

_SENTENCE_RE = re.compile(r"(?<=[.!?;])\s+")
_EGO_RE = re.compile(r"\bego\s+vehicle\b", re.IGNORECASE)
_TARGET_RE = re.compile(r"\btarget\s+vehicle\s*(?:#\s*(\d+))?", re.IGNORECASE)


def _first_match(patterns, text: str):
    for pattern, value in patterns:
        if re.search(pattern, text, re.IGNORECASE):
            return value
    return None


def interpret_offline(description: str) -> ScenarioQuery:
    """Deterministic keyword interpretation of a scenario description.

    Sentences are attributed to the ego or a numbered target by whichever
    vehicle is mentioned first; pronoun-only sentences continue the last
    context.  See the phrase table above for the label mapping.
    """
    if not description or not description.strip():
        raise InputError("scenario description must be non-empty")
    sentences = _SENTENCE_RE.split(description.strip())

    ego_text: list[str] = []
    target_texts: dict[int, list[str]] = {}
    context: Optional[int] = None  # None = ego, int = target number
    saw_ego = False
    for sentence in sentences:
        ego_m = _EGO_RE.search(sentence)
        tgt_m = _TARGET_RE.search(sentence)
        # a sentence opening with a pronoun continues the previous subject,
        # even when it mentions the other vehicle in a positional phrase
        pronoun_start = re.match(
            r"\s*(it|they|he|she|this|that)\b", sentence, re.IGNORECASE
        )
        if pronoun_start is not None:
            pass
        elif tgt_m is not None and (ego_m is None or tgt_m.start() < ego_m.start()):
            number = int(tgt_m.group(1)) if tgt_m.group(1) else 1
            context = number
        elif ego_m is not None:
            context = None
        if context is None:
            saw_ego = saw_ego or ego_m is not None
            ego_text.append(sentence)
        else:
            target_texts.setdefault(context, []).append(sentence)

    if not target_texts:
        raise InterpretationError("description mentions no target vehicle")
    if not saw_ego:
        raise InterpretationError("description mentions no ego vehicle")

    ego_blob = " ".join(ego_text)
    ego_lon = _first_match(_LON_PATTERNS, ego_blob) or LongitudinalActivity.KEEP_VELOCITY
    ego_lat = _first_match(_LAT_PATTERNS, ego_blob) or LateralActivity.FOLLOW_LANE

    targets = tuple(
        _interpret_target(" ".join(target_texts[n]))
        for n in sorted(target_texts)
    )
    return ScenarioQuery(
        ego_longitudinal=ego_lon, ego_lateral=ego_lat, targets=targets
    )


def _interpret_target(blob: str) -> TargetSpec:
    lon = _first_match(_LON_PATTERNS, blob) or LongitudinalActivity.KEEP_VELOCITY
    lat = _first_match(_LAT_PATTERNS, blob) or LateralActivity.FOLLOW_LANE

    mentions: list[tuple[int, int, RelativePosition]] = []
    for pattern, value in _POSITION_PATTERNS:
        for m in re.finditer(pattern, blob, re.IGNORECASE):
            mentions.append((m.start(), m.end(), value))
    mentions.sort()
    # drop mentions nested in an earlier, longer one
    flattened: list[tuple[int, RelativePosition]] = []
    covered_end = -1
    for start, end, value in mentions:
        if start > covered_end:
            flattened.append((start, value))
            covered_end = end

    if not flattened:
        raise InterpretationError(
            "target clause states no relative position"
        )
    start_pos = flattened[0][1]
    if len(flattened) > 1:
        end_pos = flattened[-1][1]
    elif lat is LateralActivity.FOLLOW_LANE:
        end_pos = start_pos
    else:
        step = 1 if lat is LateralActivity.LANE_CHANGE_RIGHT else -1
        offset = _LANE_OFFSET[start_pos] + step
        if offset not in _POSITION_OF_OFFSET:
            raise InterpretationError(
                "derived end position falls outside the taxonomy"
            )
        end_pos = _POSITION_OF_OFFSET[offset]

    return TargetSpec(
        start_position=PositionLabel.of(start_pos),
        end_position=PositionLabel.of(end_pos),
        longitudinal=lon,
        lateral=lat,
    )
