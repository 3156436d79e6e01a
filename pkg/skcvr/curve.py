import copy
import json
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Sequence, overload

import numpy as np


@dataclass
class RatePoint:
    parameter: float  # distance in km, or the swept parameter
    rate: float
    probability: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "parameter": self.parameter,
            "rate": self.rate,
            "probability": self.probability,
        }
        row.update(self.metadata)
        return row


def format_number(value: Any) -> str:
    """shortest round-trip decimal for floats"""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class RateCurve:
    """ordered sequence of rate records produced by a sweep

    NOTE: metadata keys are expected to be identical across points when exported as a table.
    """

    _points: List[RatePoint]

    def __init__(self, points: Sequence[RatePoint] = ()):
        self._points = list(points)

    def dumps(self) -> str:
        return json.dumps({"points": [p.as_row() for p in self._points]})

    @classmethod
    def loads(cls, s: str) -> "RateCurve":
        data = json.loads(s)
        points = []
        for row in data["points"]:
            row = dict(row)
            parameter = row.pop("parameter")
            rate = row.pop("rate")
            probability = row.pop("probability")
            points.append(RatePoint(parameter, rate, probability, row))
        return cls(points)

    def columns(self) -> List[str]:
        if len(self._points) == 0:
            return ["parameter", "rate", "probability"]
        return list(self._points[0].as_row().keys())

    def column(self, name: str) -> np.ndarray:
        return np.array([p.as_row()[name] for p in self._points])

    def rows(self) -> List[Dict[str, Any]]:
        return [p.as_row() for p in self._points]

    def to_csv(self) -> str:
        header = self.columns()
        lines = [",".join(header)]
        for row in self.rows():
            lines.append(",".join(format_number(row[key]) for key in header))
        return "\n".join(lines) + "\n"

    def max_rate(self) -> float:
        return max(p.rate for p in self._points)

    @overload
    def __getitem__(self, index: int) -> RatePoint:
        pass

    @overload
    def __getitem__(self, index: slice) -> List[RatePoint]:
        pass

    def __getitem__(self, index_like):
        return self._points[index_like]

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[RatePoint]:
        return self._points.__iter__()

    def __add__(self, other: "RateCurve") -> "RateCurve":
        return RateCurve(copy.deepcopy(self._points) + copy.deepcopy(other._points))
