"""Shared pass/fail record for identity verifications.

Every verifier in the package reports through this one structure so the
command-line runner can serialize results uniformly. Exact values (rationals,
rational functions, graded series) are rendered as strings; floats are
rejected outright because nothing in the verification path may produce one.
"""

from __future__ import annotations

from dataclasses import dataclass, field


def _jsonify(value):
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, float):
        raise TypeError("floating-point values have no place in a verdict")
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return str(value)


@dataclass(frozen=True)
class Verdict:
    """Outcome of one identity check at one truncation order.

    first_mismatch, when set, carries at least the first differing grade and
    the two exact coefficients; note records the truncation bound that makes
    the finite check conclusive.
    """

    identity: str
    params: dict = field(default_factory=dict)
    order: object = 0
    ok: bool = False
    mode: str = "symbolic"
    first_mismatch: dict | None = None
    note: str = ""

    @property
    def status(self) -> str:
        return "equal" if self.ok else "mismatch"

    def to_json_dict(self) -> dict:
        return {
            "identity": self.identity,
            "params": _jsonify(self.params),
            "order": _jsonify(self.order),
            "status": self.status,
            "mode": self.mode,
            "first_mismatch": _jsonify(self.first_mismatch),
            "note": self.note,
        }
