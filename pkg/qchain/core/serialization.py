"""JSON codecs for matrices, states and maps, plus report number formatting."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from .constants import SIGNIFICANT_DIGITS
from .errors import InvalidDimensions, InvalidState
from .quantum import DensityOperator, Distribution, PositiveMapRep


class MatrixModel(BaseModel):
    rows: int = Field(ge=1)
    cols: int = Field(ge=1)
    re: list[list[float]]
    im: list[list[float]] | None = None

    @model_validator(mode="after")
    def _check_shape(self) -> "MatrixModel":
        for name in ("re", "im"):
            part = getattr(self, name)
            if part is None:
                continue
            if len(part) != self.rows or any(len(row) != self.cols for row in part):
                raise ValueError(f"'{name}' does not have shape {self.rows}x{self.cols}")
        return self

    def to_array(self) -> np.ndarray:
        re = np.asarray(self.re, dtype=float)
        im = np.asarray(self.im, dtype=float) if self.im is not None else np.zeros_like(re)
        return re + 1j * im

    @classmethod
    def from_array(cls, m: np.ndarray) -> "MatrixModel":
        arr = np.asarray(m, dtype=complex)
        return cls(
            rows=arr.shape[0],
            cols=arr.shape[1],
            re=arr.real.tolist(),
            im=arr.imag.tolist(),
        )


class StateModel(BaseModel):
    dim: int = Field(ge=1)
    matrix: MatrixModel

    @model_validator(mode="after")
    def _check_dim(self) -> "StateModel":
        if (self.matrix.rows, self.matrix.cols) != (self.dim, self.dim):
            raise ValueError(f"matrix is {self.matrix.rows}x{self.matrix.cols}, expected {self.dim}x{self.dim}")
        return self

    def to_state(self) -> DensityOperator:
        return DensityOperator(self.matrix.to_array())

    @classmethod
    def from_state(cls, state: DensityOperator) -> "StateModel":
        return cls(dim=state.dim, matrix=MatrixModel.from_array(state.matrix))


class ChannelModel(BaseModel):
    kraus: list[MatrixModel] = Field(min_length=1)
    pre_transpose: bool = False

    def to_map(self) -> PositiveMapRep:
        return PositiveMapRep(tuple(k.to_array() for k in self.kraus), pre_transpose=self.pre_transpose)

    @classmethod
    def from_map(cls, m: PositiveMapRep) -> "ChannelModel":
        return cls(kraus=[MatrixModel.from_array(k) for k in m.kraus], pre_transpose=m.pre_transpose)


def format_number(x: float | int | None) -> float | int | str | None:
    """12 significant digits; ``"inf"``/``"-inf"`` for infinities."""
    if x is None or isinstance(x, (bool, int)):
        return x
    value = float(x)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return float(f"{value:.{SIGNIFICANT_DIGITS}g}")


_EXACT_KEYS = {"re", "im"}


def to_jsonable(obj: Any) -> Any:
    """Recursively convert numpy values, models and infinities into JSON-safe data.

    Matrix entries (``re``/``im``) keep full precision so emitted states re-parse bit-identically.
    """
    if isinstance(obj, BaseModel):
        return to_jsonable(obj.model_dump(by_alias=True))
    if isinstance(obj, dict):
        return {str(k): v if k in _EXACT_KEYS else to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return format_number(float(obj))
    return obj


def to_json(obj: Any, indent: int | None = 2) -> str:
    return json.dumps(to_jsonable(obj), indent=indent, sort_keys=False)


def state_to_dict(state: DensityOperator) -> dict[str, Any]:
    return StateModel.from_state(state).model_dump()


def channel_to_dict(m: PositiveMapRep) -> dict[str, Any]:
    return ChannelModel.from_map(m).model_dump()


def _read_json(path: Path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidState(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from exc


def parse_state(data: Any) -> DensityOperator:
    try:
        return StateModel.model_validate(data).to_state()
    except ValidationError as exc:
        raise InvalidState(f"invalid state document: {exc.errors()[0]['msg']}") from exc


def parse_channel(data: Any) -> PositiveMapRep:
    try:
        return ChannelModel.model_validate(data).to_map()
    except ValidationError as exc:
        raise InvalidDimensions(f"invalid channel document: {exc.errors()[0]['msg']}") from exc


def load_state(path: Path) -> DensityOperator:
    return parse_state(_read_json(path))


def load_channel(path: Path) -> PositiveMapRep:
    return parse_channel(_read_json(path))


def parse_distribution(text: str) -> Distribution:
    """Inline ``"[0.75, 0.25]"`` or a path to a JSON array."""
    candidate = Path(text)
    raw = _read_json(candidate) if candidate.suffix == ".json" and candidate.exists() else None
    if raw is None:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidState(f"cannot parse distribution '{text}'") from exc
    if not isinstance(raw, list) or not all(isinstance(v, (int, float)) for v in raw):
        raise InvalidState("a distribution must be a JSON array of numbers")
    return Distribution(np.asarray(raw, dtype=float))


def dump_state(state: DensityOperator, path: Path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state), indent=2))


def dump_channel(m: PositiveMapRep, path: Path) -> None:
    Path(path).write_text(json.dumps(channel_to_dict(m), indent=2))
