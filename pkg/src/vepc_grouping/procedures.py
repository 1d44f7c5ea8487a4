"""Signaling procedures as ordered message sequences."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .model import EntityKind, ModelError, PathClass, Placement, classify_path, get_interface, read_json

E = EntityKind


class Condition(str, Enum):
    ALWAYS = "ALWAYS"
    PREPAID_ONLY = "PREPAID_ONLY"


@dataclass(frozen=True)
class Step:
    src: EntityKind
    dst: EntityKind
    interface: str
    count: int = 1
    condition: Condition = Condition.ALWAYS
    label: str = ""

    def to_dict(self) -> dict:
        out = {"src": self.src.value, "dst": self.dst.value, "interface": self.interface,
               "count": self.count, "condition": self.condition.value}
        if self.label:
            out["label"] = self.label
        return out


@dataclass(frozen=True)
class ProcedureDef:
    name: str
    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ModelError(f"procedure {self.name}: no steps")
        for i, step in enumerate(self.steps, 1):
            iface = get_interface(step.interface)
            if not iface.carries(step.src, step.dst):
                raise ModelError(
                    f"procedure {self.name}: step {i} {step.src.value}->{step.dst.value} "
                    f"does not match interface {step.interface}")
            if not isinstance(step.count, int) or isinstance(step.count, bool) or step.count < 1:
                raise ModelError(f"procedure {self.name}: step {i} count must be an integer >= 1")

    def to_dict(self) -> dict:
        return {"name": self.name, "steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, data) -> "ProcedureDef":
        try:
            steps = [
                Step(E.parse(s["src"]), E.parse(s["dst"]), s["interface"], s.get("count", 1),
                     Condition(s.get("condition", "ALWAYS")), s.get("label", ""))
                for s in data["steps"]
            ]
            return cls(str(data["name"]), tuple(steps))
        except KeyError as exc:
            raise ModelError(f"procedure {data.get('name', '?')}: missing {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"procedure {data.get('name', '?')}: {exc}") from None


@dataclass(frozen=True)
class ProcedureBreakdown:
    per_step: tuple
    network_transactions: int
    internal_transactions: int

    @property
    def total(self) -> int:
        return self.network_transactions + self.internal_transactions

    def by_class(self) -> dict:
        out: dict = {}
        for step, cls in self.per_step:
            out[cls] = out.get(cls, 0) + step.count
        return out


def attach_procedure() -> ProcedureDef:
    """UE attach: authentication via the HSS FE, session creation, policy and credit checks.

    The MME -> SGW create-session request rides on the RAN_CORE aggregate,
    which already accounts for S11 traffic.
    """
    S = Step
    return ProcedureDef("attach", (
        S(E.ENB, E.MME, "RAN_CORE", label="attach request"),
        S(E.MME, E.HSS_FE, "S6a", label="authentication information request"),
        S(E.HSS_FE, E.MME, "S6a", label="authentication information answer"),
        S(E.HSS_FE, E.UDR, "Ud_hss", label="subscriber profile query"),
        S(E.UDR, E.HSS_FE, "Ud_hss", label="subscriber profile response"),
        S(E.MME, E.HSS_FE, "S6a", label="update location request"),
        S(E.HSS_FE, E.MME, "S6a", label="update location answer"),
        S(E.MME, E.SGW, "RAN_CORE", label="create session request"),
        S(E.SGW, E.PGW, "S5_S8", label="create session request"),
        S(E.PGW, E.PCRF, "Gx", label="credit control request"),
        S(E.PCRF, E.PGW, "Gx", label="credit control answer"),
        S(E.PCRF, E.UDR, "Ud_pcrf", label="subscriber policy query"),
        S(E.PCRF, E.OCS, "Gy", condition=Condition.PREPAID_ONLY, label="credit check"),
    ))


def default_catalog() -> list:
    """Attach plus the auxiliary session, policy and charging procedures.

    Only attach follows a published sequence diagram; the others carry no
    golden numbers.
    """
    S = Step
    return [
        attach_procedure(),
        ProcedureDef("session_setup", (
            S(E.SGW, E.PGW, "S5_S8", label="create session request"),
            S(E.PGW, E.SGW, "S5_S8", label="create session response"),
            S(E.PGW, E.PCRF, "Gx", label="credit control request"),
            S(E.PCRF, E.UDR, "Ud_pcrf", label="subscriber policy query"),
            S(E.PCRF, E.PGW, "Gx", label="credit control answer"),
            S(E.PCRF, E.OCS, "Gy", condition=Condition.PREPAID_ONLY, label="credit reservation"),
        )),
        ProcedureDef("policy_update", (
            S(E.PCRF, E.PGW, "Gx", label="re-auth request"),
            S(E.PGW, E.PCRF, "Gx", label="re-auth answer"),
        )),
        ProcedureDef("prepaid_charging_event", (
            S(E.PCRF, E.OCS, "Gy", condition=Condition.PREPAID_ONLY, label="credit update request"),
            S(E.OCS, E.PCRF, "Gy", condition=Condition.PREPAID_ONLY, label="credit update answer"),
            S(E.PGW, E.OFCS, "Gz", label="charging data record"),
        )),
    ]


def load_catalog(source) -> list:
    data = read_json(source)
    if not isinstance(data, list):
        raise ModelError("procedure catalog must be a JSON array")
    return [ProcedureDef.from_dict(item) for item in data]


def expand_procedure(proc: ProcedureDef, placement: Placement, prepaid: bool = True) -> ProcedureBreakdown:
    per_step = []
    network = internal = 0
    for step in proc.steps:
        get_interface(step.interface)
        if step.condition is Condition.PREPAID_ONLY and not prepaid:
            continue
        cls = classify_path(placement, step.src, step.dst)
        per_step.append((step, cls))
        if cls is PathClass.INTERNAL:
            internal += step.count
        else:
            network += step.count
    return ProcedureBreakdown(tuple(per_step), network, internal)
