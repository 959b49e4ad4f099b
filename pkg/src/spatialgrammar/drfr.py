"""Checklist evaluation: atomic requirement checks and the DRFR ratio.

A checklist decomposes an instruction into small verifiable facts; the
ratio of satisfied facts to total facts is the score.  Multi-turn sessions
accumulate checks turn over turn, so an object silently dropped by a later
edit shows up as a falling ratio.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .compiler import CompiledScene
from .errors import LengthMismatch
from .relations import check_relation, resolve


class CheckKind(str, Enum):
    EXIST = "exist"
    ATTRIBUTE_SIZE = "attribute_size"
    SPATIAL_RELATION = "spatial_relation"
    HIERARCHY_SUPPORT = "hierarchy_support"


_SUPPORT_TOL = 1e-3


@dataclass(frozen=True)
class AtomicCheck:
    kind: CheckKind
    subject: str
    object: str | None = None
    relation: str | None = None
    params: tuple[tuple[str, object], ...] = ()
    label: str | None = None

    def __post_init__(self) -> None:
        if (self.relation is not None) != (self.kind is CheckKind.SPATIAL_RELATION):
            raise ValueError("relation is given exactly for spatial_relation checks")
        needs_object = self.kind in (CheckKind.SPATIAL_RELATION, CheckKind.HIERARCHY_SUPPORT)
        if needs_object and self.object is None:
            raise ValueError(f"{self.kind.value} checks need a reference object")

    def param(self, key: str, default=None):
        for k, v in self.params:
            if k == key:
                return v
        return default

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind.value, "subject": self.subject}
        if self.object is not None:
            out["object"] = self.object
        if self.relation is not None:
            out["relation"] = self.relation
        if self.params:
            out["params"] = dict(self.params)
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, doc: dict) -> "AtomicCheck":
        return cls(
            kind=CheckKind(doc["kind"]),
            subject=doc["subject"],
            object=doc.get("object"),
            relation=doc.get("relation"),
            params=tuple(sorted(doc.get("params", {}).items())),
            label=doc.get("label"),
        )


@dataclass(frozen=True)
class Checklist:
    checks: tuple[AtomicCheck, ...]
    turn_id: int | None = None
    removes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.checks and not self.removes:
            raise ValueError("a checklist needs at least one check")


@dataclass(frozen=True)
class DrfrResult:
    ratio: float
    per_check: tuple[tuple[AtomicCheck, bool], ...]

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "per_check": [
                {"check": c.to_dict(), "satisfied": ok} for c, ok in self.per_check
            ],
        }


def evaluate_check(s: CompiledScene, c: AtomicCheck) -> bool:
    if c.kind is CheckKind.EXIST:
        return resolve(s, c.subject) is not None

    if c.kind is CheckKind.ATTRIBUTE_SIZE:
        p = resolve(s, c.subject)
        if p is None:
            return False
        want_category = c.param("category")
        if want_category is not None and p.category.value != want_category:
            return False
        size = p.box.size.as_tuple()
        min_size = c.param("min_size")
        max_size = c.param("max_size")
        if min_size is not None and any(s_i < m_i - 1e-9 for s_i, m_i in zip(size, min_size)):
            return False
        if max_size is not None and any(s_i > m_i + 1e-9 for s_i, m_i in zip(size, max_size)):
            return False
        return True

    if c.kind is CheckKind.SPATIAL_RELATION:
        return check_relation(s, c.relation, c.subject, c.object)

    # hierarchy_support: a real parent link plus a resting contact
    child = resolve(s, c.subject)
    parent = resolve(s, c.object)
    if child is None or parent is None or child.parent != parent.id:
        return False
    return abs(child.box.bottom_z - parent.box.top_z) <= _SUPPORT_TOL


def evaluate_drfr(s: CompiledScene, cl: Checklist) -> DrfrResult:
    verdicts = tuple((c, evaluate_check(s, c)) for c in cl.checks)
    satisfied = sum(1 for _, ok in verdicts if ok)
    return DrfrResult(ratio=satisfied / len(verdicts), per_check=verdicts)


def evaluate_cumulative(
    scenes: list[CompiledScene], checklists: list[Checklist]
) -> list[DrfrResult]:
    """Turn t is scored against every persistent check from turns 1..t.

    A turn's `removes` drops previously added checks by label, modeling
    instructions that overwrite or delete earlier state.
    """
    if len(scenes) != len(checklists):
        raise LengthMismatch(
            f"{len(scenes)} scenes but {len(checklists)} checklists"
        )
    active: list[AtomicCheck] = []
    out: list[DrfrResult] = []
    for scene, cl in zip(scenes, checklists):
        if cl.removes:
            dropped = set(cl.removes)
            active = [c for c in active if c.label not in dropped]
        active.extend(cl.checks)
        out.append(evaluate_drfr(scene, Checklist(checks=tuple(active), turn_id=cl.turn_id)))
    return out


def load_checklists(path: str) -> list[Checklist]:
    """Read a checklist file: either {"checks": [...]} for one turn or
    {"turns": [{"turn_id", "checks", "removes"}, ...]}."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "turns" in doc:
        return [
            Checklist(
                checks=tuple(AtomicCheck.from_dict(c) for c in turn.get("checks", [])),
                turn_id=turn.get("turn_id"),
                removes=tuple(turn.get("removes", ())),
            )
            for turn in doc["turns"]
        ]
    return [Checklist(checks=tuple(AtomicCheck.from_dict(c) for c in doc["checks"]))]
