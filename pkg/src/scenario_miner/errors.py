"""Exception types shared across the scenario-miner modules."""


class ScenarioMinerError(Exception):
    """Base class for all scenario-miner errors."""


# --- dataset ingestion ---

class DatasetSchemaError(ScenarioMinerError):
    """The tracks CSV is missing a required column."""

    def __init__(self, column: str):
        self.column = column
        super().__init__(f"missing required column: {column!r}")


class DatasetParseError(ScenarioMinerError):
    """A cell in the tracks CSV could not be parsed as a number."""

    def __init__(self, row_number: int, column: str, value: str):
        self.row_number = row_number
        self.column = column
        self.value = value
        super().__init__(
            f"row {row_number}: cannot parse {column}={value!r} as a number"
        )


class FrameContiguityError(ScenarioMinerError):
    """A vehicle's frames are not strictly increasing with unit step."""

    def __init__(self, vehicle_id: int, detail: str = ""):
        self.vehicle_id = vehicle_id
        msg = f"non-contiguous frames for vehicle id {vehicle_id}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class UnknownVehicleError(ScenarioMinerError, KeyError):
    def __init__(self, vehicle_id: int):
        self.vehicle_id = vehicle_id
        super().__init__(f"vehicle id {vehicle_id} not in store")


class FrameRangeError(ScenarioMinerError):
    """Requested frame interval lies outside the trajectory."""


class EmptyWindowError(ScenarioMinerError):
    """Two trajectories share no frames."""


# --- activity / position analysis ---

class InputError(ScenarioMinerError):
    """A kinematic input is non-finite or otherwise unusable."""


class UndecidableDirectionError(ScenarioMinerError):
    """Lateral direction cannot be decided at zero longitudinal speed."""


class AmbiguousLaneChangeError(ScenarioMinerError):
    """Opposite-direction lane crossings closer than one window."""

    def __init__(self, frames):
        self.frames = tuple(frames)
        super().__init__(
            f"opposite-direction lane crossings too close: frames {list(frames)}"
        )


# --- LLM response handling ---

class MalformedResponseError(ScenarioMinerError):
    """The response text lacks the required structure (e.g. no ego block)."""


class VocabularyError(ScenarioMinerError):
    """A classification label is outside the closed taxonomy."""

    def __init__(self, label: str):
        self.label = label
        super().__init__(f"unknown classification label: {label!r}")


class ResponseStructureError(ScenarioMinerError):
    """Structural defect such as duplicate target numerals."""


class InterpretationError(ScenarioMinerError):
    """The offline interpreter could not map the description to a query."""


class ProviderError(ScenarioMinerError):
    """The remote completion provider failed after all retries."""

    def __init__(self, message: str, last_response: str | None = None):
        self.last_response = last_response
        super().__init__(message)


class CredentialError(ScenarioMinerError):
    """The provider rejected the API credentials."""


# --- criticality / export ---

class InsufficientDataError(ScenarioMinerError):
    """The analysis window is too short for the requested metric."""


class ExportError(ScenarioMinerError):
    """A scenario cannot be serialized (e.g. empty window)."""
