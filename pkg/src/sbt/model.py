"""Validated static model of one behavior tree.

This is the formal object the engines, the state-space builder, the LTL
checker, and the SMV emitter all consume: a status lattice, finite-domain
variable declarations split into environment and blackboard scopes, an
indexed node table forming a tree, and named temporal specs.

An implicit wrapper node named ``__root`` (always node id 0) sits above the
declared root so the overall tick outcome is addressable in specs.
"""

from dataclasses import dataclass, field
from enum import Enum

ROOT_NAME = "__root"

ENV = "env"
BLACKBOARD = "blackboard"


class Status(Enum):
    """Tick outcome of a node; INVALID marks nodes not executed this tick."""

    INVALID = "invalid"
    SUCCESS = "success"
    FAILURE = "failure"
    RUNNING = "running"


# Fixed small-integer encoding used by state vectors and trace goldens.
STATUS_CODE = {
    Status.INVALID: 0,
    Status.SUCCESS: 1,
    Status.FAILURE: 2,
    Status.RUNNING: 3,
}
STATUS_FROM_CODE = {code: st for st, code in STATUS_CODE.items()}


class NodeKind(Enum):
    ROOT = "root"
    SEQUENCE = "sequence"
    SEQUENCE_M = "sequence_m"
    FALLBACK = "fallback"
    FALLBACK_M = "fallback_m"
    PARALLEL = "parallel"
    INVERTER = "inverter"
    FORCE_SUCCESS = "force_success"
    FORCE_FAILURE = "force_failure"
    CHECK = "check"
    ACTION = "action"


MEMORY_KINDS = (NodeKind.SEQUENCE_M, NodeKind.FALLBACK_M)
COMPOSITE_KINDS = MEMORY_KINDS + (NodeKind.SEQUENCE, NodeKind.FALLBACK, NodeKind.PARALLEL)
DECORATOR_KINDS = (NodeKind.INVERTER, NodeKind.FORCE_SUCCESS, NodeKind.FORCE_FAILURE)
LEAF_KINDS = (NodeKind.CHECK, NodeKind.ACTION)


# ---------------------------------------------------------------------------
# Domains


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int

    def values(self) -> tuple:
        return tuple(range(self.lo, self.hi + 1))

    def contains(self, v) -> bool:
        return isinstance(v, int) and not isinstance(v, bool) and self.lo <= v <= self.hi

    def clamp(self, v: int) -> int:
        return max(self.lo, min(self.hi, v))


@dataclass(frozen=True)
class BoolDomain:
    def values(self) -> tuple:
        return (False, True)

    def contains(self, v) -> bool:
        return isinstance(v, bool)


@dataclass(frozen=True)
class EnumDomain:
    labels: tuple[str, ...]

    def values(self) -> tuple:
        return self.labels

    def contains(self, v) -> bool:
        return v in self.labels


Domain = IntRange | BoolDomain | EnumDomain


@dataclass(frozen=True)
class VarDef:
    name: str
    scope: str  # ENV or BLACKBOARD
    domain: Domain
    initial: object = None  # required for blackboard, optional for frozen env
    frozen: bool = False


# ---------------------------------------------------------------------------
# Resolved expressions (names bound, types checked by validation)


@dataclass(frozen=True)
class IntVal:
    value: int


@dataclass(frozen=True)
class BoolVal:
    value: bool


@dataclass(frozen=True)
class EnumVal:
    label: str


@dataclass(frozen=True)
class ReadVar:
    name: str
    scope: str


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "!" | "-"
    operand: "CoreExpr"


@dataclass(frozen=True)
class BinaryOp:
    op: str  # == != < <= > >= + - && ||
    left: "CoreExpr"
    right: "CoreExpr"


CoreExpr = IntVal | BoolVal | EnumVal | ReadVar | UnaryOp | BinaryOp


def expr_reads(expr: CoreExpr) -> frozenset[str]:
    """Names of all variables an expression reads."""
    if isinstance(expr, ReadVar):
        return frozenset((expr.name,))
    if isinstance(expr, UnaryOp):
        return expr_reads(expr.operand)
    if isinstance(expr, BinaryOp):
        return expr_reads(expr.left) | expr_reads(expr.right)
    return frozenset()


# ---------------------------------------------------------------------------
# Atomic propositions for specs: either a boolean expression over variables
# or a node-status test. These are the labels the LTL layer's atoms carry.


@dataclass(frozen=True)
class ExprAtom:
    expr: CoreExpr
    text: str  # canonical source form, for stable display and dumps


@dataclass(frozen=True)
class StatusAtom:
    node_id: int
    node_name: str
    status: Status

    @property
    def text(self) -> str:
        return f"status({self.node_name}) == {self.status.value}"


AtomLabel = ExprAtom | StatusAtom


# ---------------------------------------------------------------------------
# Nodes and the model itself


@dataclass(frozen=True)
class GuardedCommand:
    condition: CoreExpr
    assigns: tuple[tuple[str, CoreExpr], ...]
    status: Status  # SUCCESS, FAILURE, or RUNNING


@dataclass(frozen=True)
class NodeDef:
    id: int
    kind: NodeKind
    name: str
    children: tuple[int, ...]
    threshold: int | None = None  # parallel
    expr: CoreExpr | None = None  # check
    guards: tuple[GuardedCommand, ...] = ()  # action


@dataclass(frozen=True)
class SpecDef:
    name: str
    formula: object  # ltl.LtlFormula; kept loose to avoid an import cycle


@dataclass
class SbtModel:
    tree_name: str
    nodes: list[NodeDef]
    env_vars: list[VarDef]
    bb_vars: list[VarDef]
    specs: list[SpecDef]
    root_id: int = 0
    node_by_name: dict[str, int] = field(default_factory=dict)
    memory_ids: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.node_by_name:
            self.node_by_name = {n.name: n.id for n in self.nodes}
        if not self.memory_ids:
            self.memory_ids = tuple(n.id for n in self.nodes if n.kind in MEMORY_KINDS)

    def var(self, name: str) -> VarDef:
        for v in self.env_vars:
            if v.name == name:
                return v
        for v in self.bb_vars:
            if v.name == name:
                return v
        raise KeyError(name)

    def node(self, node_id: int) -> NodeDef:
        return self.nodes[node_id]

    @property
    def all_vars(self) -> list[VarDef]:
        return self.env_vars + self.bb_vars
