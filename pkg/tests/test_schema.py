"""Braced response grammar, canonical JSON mirror, and validation."""
import pytest

from scenario_miner.activities import LateralActivity as La
from scenario_miner.activities import LongitudinalActivity as Lo
from scenario_miner.errors import (
    MalformedResponseError,
    ResponseStructureError,
    VocabularyError,
)
from scenario_miner.positions import RelativePosition as P
from scenario_miner.schema import (
    GROUP_MEMBERS,
    PositionLabel,
    ScenarioQuery,
    TargetSpec,
    parse_llm_response,
    query_from_json,
    query_to_json,
    query_to_text,
    validate_query,
)

from conftest import WORKED_EXAMPLE_BLOCK

CUT_IN_QUERY = ScenarioQuery(
    ego_longitudinal=Lo.KEEP_VELOCITY,
    ego_lateral=La.FOLLOW_LANE,
    targets=(
        TargetSpec(
            start_position=PositionLabel.of(P.LEFT_ADJACENT),
            end_position=PositionLabel.of(P.FRONT),
            longitudinal=Lo.ACCELERATION,
            lateral=La.LANE_CHANGE_RIGHT,
        ),
    ),
)


def test_worked_example_block_parses():
    assert parse_llm_response(WORKED_EXAMPLE_BLOCK) == CUT_IN_QUERY


def test_lowercase_unquoted_equivalent():
    relaxed = (
        "{ ego vehicle: {ego longitudinal activity: [keep velocity], "
        "ego lateral activity: [follow lane]},\n"
        "target vehicle #1: {\n"
        "target start position: {adjacent lane: [left adjacent lane]},\n"
        "target end position: {same lane: [front]},\n"
        "target behavior: {target longitudinal activity: [acceleration],\n"
        "target lateral activity: [lane change right]} } }"
    )
    assert parse_llm_response(relaxed) == CUT_IN_QUERY


def test_targets_reordered_by_numeral():
    spec2 = TargetSpec(
        start_position=PositionLabel.of(P.BEHIND),
        end_position=PositionLabel.of(P.BEHIND),
        longitudinal=Lo.DECELERATION,
        lateral=La.FOLLOW_LANE,
    )
    text = query_to_text(
        ScenarioQuery(Lo.KEEP_VELOCITY, La.FOLLOW_LANE,
                      (CUT_IN_QUERY.targets[0], spec2))
    )
    swapped = (
        text.replace("#1", "#X").replace("#2", "#1").replace("#X", "#2")
    )
    parsed = parse_llm_response(swapped)
    assert parsed.targets == (spec2, CUT_IN_QUERY.targets[0])


def test_missing_ego_block():
    with pytest.raises(MalformedResponseError):
        parse_llm_response("Target Vehicle #1: whatever")


def test_unknown_label_named():
    bad = WORKED_EXAMPLE_BLOCK.replace("'acceleration'", "'swerve'")
    with pytest.raises(VocabularyError) as err:
        parse_llm_response(bad)
    assert "swerve" in str(err.value)


def test_duplicate_numerals_rejected():
    dup = (
        query_to_text(
            ScenarioQuery(Lo.KEEP_VELOCITY, La.FOLLOW_LANE,
                          CUT_IN_QUERY.targets * 2)
        ).replace("#2", "#1")
    )
    with pytest.raises(ResponseStructureError):
        parse_llm_response(dup)


def test_round_trip_idempotence():
    q1 = parse_llm_response(WORKED_EXAMPLE_BLOCK)
    q2 = parse_llm_response(query_to_text(q1))
    assert q1 == q2
    assert query_to_text(q1) == query_to_text(q2)


def test_every_taxonomy_leaf_accepted():
    for group, members in GROUP_MEMBERS.items():
        for member in members:
            spec = TargetSpec(
                start_position=PositionLabel(group, member),
                end_position=PositionLabel(group, member),
                longitudinal=Lo.KEEP_VELOCITY,
                lateral=La.FOLLOW_LANE,
            )
            q = ScenarioQuery(Lo.KEEP_VELOCITY, La.FOLLOW_LANE, (spec,))
            assert validate_query(q) == []
            assert parse_llm_response(query_to_text(q)) == q


def test_validate_group_member_mismatch():
    spec = TargetSpec(
        start_position=PositionLabel("same lane", P.LEFT_ADJACENT),
        end_position=PositionLabel.of(P.FRONT),
        longitudinal=Lo.KEEP_VELOCITY,
        lateral=La.FOLLOW_LANE,
    )
    q = ScenarioQuery(Lo.KEEP_VELOCITY, La.FOLLOW_LANE, (spec,))
    violations = validate_query(q)
    assert len(violations) == 1
    assert "not in group" in violations[0]


def test_validate_cut_in_query_valid():
    assert validate_query(CUT_IN_QUERY) == []


def test_validate_empty_targets():
    q = ScenarioQuery(Lo.KEEP_VELOCITY, La.FOLLOW_LANE, ())
    assert any("at least one target" in v for v in validate_query(q))


def test_json_round_trip():
    obj = query_to_json(CUT_IN_QUERY)
    assert obj["ego"] == {
        "longitudinal": "keep velocity", "lateral": "follow lane"
    }
    assert obj["targets"][0]["start"] == {
        "group": "adjacent lane", "member": "left adjacent lane"
    }
    assert query_from_json(obj) == CUT_IN_QUERY


def test_json_unknown_member_rejected():
    obj = query_to_json(CUT_IN_QUERY)
    obj["targets"][0]["start"]["member"] = "hover lane"
    with pytest.raises(VocabularyError):
        query_from_json(obj)
