"""Signal temporal logic over named, uniformly sampled channels.

Formulas are immutable trees. Evaluation is discrete-time: one sample per
step, intervals in integer steps, and windows that run past the end of the
signal are clamped to the available samples.

Two evaluation paths exist. :func:`robustness_signal` and
:func:`satisfaction_signal` work bottom-up over whole numpy signals, and
:func:`compile_state_robustness` turns a temporal-operator-free formula into
a scalar closure used by :class:`OnlineMonitor`. Both paths perform the same
floating point operations in the same order, so they agree bit for bit.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "Relation", "Predicate", "Top", "Pred", "Not", "And", "Or", "Globally",
    "Eventually", "Until", "Formula", "Trajectory", "OnlineMonitor",
    "STLError", "STLSyntaxError", "UnknownChannelError", "NotInvariantError",
    "TOP_ROBUSTNESS", "parse_formula", "format_formula", "eval_boolean",
    "robustness", "robustness_signal", "satisfaction_signal",
    "compile_state_robustness", "is_invariant", "conjunction", "disjunction",
    "channels_of",
]

# Robustness of the constant ``true``; finite so exp() downstream stays finite.
TOP_ROBUSTNESS = 1e9


class STLError(Exception):
    pass


class STLSyntaxError(STLError, ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownChannelError(STLError, KeyError):
    def __str__(self):
        return f"unknown channel {self.args[0]!r}"


class NotInvariantError(STLError, ValueError):
    pass


class Relation(Enum):
    GE = ">="
    GT = ">"
    LE = "<="
    LT = "<"


@dataclass(frozen=True)
class Predicate:
    """Affine inequality ``sum(c_i * s_i) <rel> constant``.

    Robustness is ``sum - constant`` for GE/GT and ``constant - sum`` for
    LE/LT; strictness only matters for the Boolean verdict.
    """

    coefficients: tuple[tuple[str, float], ...]
    relation: Relation
    constant: float

    def __post_init__(self):
        if isinstance(self.coefficients, Mapping):
            object.__setattr__(self, "coefficients", tuple(self.coefficients.items()))
        coeffs = tuple((str(k), float(v)) for k, v in self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "constant", float(self.constant))
        if not coeffs or all(c == 0.0 for _, c in coeffs):
            raise STLError("predicate needs at least one nonzero coefficient")
        if not all(math.isfinite(c) for _, c in coeffs) or not math.isfinite(self.constant):
            raise STLError("predicate coefficients and constant must be finite")

    @classmethod
    def of(cls, channel: str, relation: Relation | str, constant: float) -> "Predicate":
        return cls(((channel, 1.0),), Relation(relation), constant)


@dataclass(frozen=True)
class Top:
    """The constant ``true``; used for empty conjunctions."""


@dataclass(frozen=True)
class Pred:
    predicate: Predicate


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


def _check_interval(interval):
    if interval is None:
        return None
    a, b = interval
    if int(a) != a or int(b) != b:
        raise STLError(f"interval bounds must be integers, got [{a},{b}]")
    a, b = int(a), int(b)
    if a < 0 or b < a:
        raise STLError(f"malformed interval [{a},{b}]: need 0 <= a <= b")
    return (a, b)


@dataclass(frozen=True)
class Globally:
    child: "Formula"
    interval: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "interval", _check_interval(self.interval))


@dataclass(frozen=True)
class Eventually:
    child: "Formula"
    interval: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "interval", _check_interval(self.interval))


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"
    interval: tuple[int, int]

    def __post_init__(self):
        if self.interval is None:
            raise STLError("until requires an explicit interval")
        object.__setattr__(self, "interval", _check_interval(self.interval))


Formula = Union[Top, Pred, Not, And, Or, Globally, Eventually, Until]


def conjunction(parts: Sequence[Formula]) -> Formula:
    """Left-associated conjunction; ``Top()`` when empty."""
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disjunction(parts: Sequence[Formula]) -> Formula:
    if not parts:
        raise STLError("empty disjunction")
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def _walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (Not, Globally, Eventually)):
            stack.append(node.child)
        elif isinstance(node, (And, Or, Until)):
            stack.extend((node.left, node.right))


def channels_of(f: Formula) -> set[str]:
    return {name for node in _walk(f) if isinstance(node, Pred)
            for name, _ in node.predicate.coefficients}


def is_temporal_free(f: Formula) -> bool:
    return not any(isinstance(n, (Globally, Eventually, Until)) for n in _walk(f))


def is_invariant(f: Formula) -> bool:
    """True for ``G[...] body`` with a temporal-operator-free body."""
    return isinstance(f, Globally) and is_temporal_free(f.child)


# ---------------------------------------------------------------------------
# Trajectories


class Trajectory:
    """Named channels of equal length sampled at a uniform unit step."""

    def __init__(self, channels: Mapping[str, Sequence[float]]):
        arrays = {k: np.array(v, dtype=float).reshape(-1) for k, v in channels.items()}
        lengths = {len(a) for a in arrays.values()}
        if len(lengths) != 1:
            raise ValueError(f"channels must share one length, got {sorted(lengths)}")
        (n,) = lengths
        if n < 1:
            raise ValueError("trajectory needs at least one sample")
        for a in arrays.values():
            a.flags.writeable = False
        self._channels = arrays
        self._length = n

    @property
    def channels(self) -> Mapping[str, np.ndarray]:
        return self._channels

    def __len__(self):
        return self._length

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._channels[name]
        except KeyError:
            raise UnknownChannelError(name) from None

    def prefix(self, n: int) -> "Trajectory":
        return Trajectory({k: v[:n] for k, v in self._channels.items()})

    def sample(self, t: int) -> dict[str, float]:
        return {k: float(v[t]) for k, v in self._channels.items()}

    def __repr__(self):
        return f"Trajectory(length={self._length}, channels={sorted(self._channels)})"


# ---------------------------------------------------------------------------
# Vectorised semantics


def _affine(pred: Predicate, traj: Trajectory) -> np.ndarray:
    acc = np.zeros(len(traj))
    for name, c in pred.coefficients:
        acc = acc + c * traj[name]
    return acc


def _window(n: int, t: int, interval) -> tuple[int, int]:
    """Clamped half-open index range ``[lo, hi)`` for a window anchored at t."""
    if interval is None:
        return t, n
    a, b = interval
    return min(t + a, n), min(t + b, n - 1) + 1


def _windowed(values: np.ndarray, interval, reduce, empty: float) -> np.ndarray:
    n = len(values)
    if interval is None:
        return reduce.accumulate(values[::-1])[::-1].copy()
    out = np.full(n, empty)
    for t in range(n):
        lo, hi = _window(n, t, interval)
        if lo < hi:
            out[t] = reduce.reduce(values[lo:hi])
    return out


def robustness_signal(f: Formula, traj: Trajectory) -> np.ndarray:
    """Robustness of ``f`` at every time index of ``traj``."""
    n = len(traj)
    if isinstance(f, Top):
        return np.full(n, TOP_ROBUSTNESS)
    if isinstance(f, Pred):
        p = f.predicate
        acc = _affine(p, traj)
        if p.relation in (Relation.GE, Relation.GT):
            return acc - p.constant
        return p.constant - acc
    if isinstance(f, Not):
        return -robustness_signal(f.child, traj)
    if isinstance(f, And):
        return np.minimum(robustness_signal(f.left, traj), robustness_signal(f.right, traj))
    if isinstance(f, Or):
        return np.maximum(robustness_signal(f.left, traj), robustness_signal(f.right, traj))
    if isinstance(f, Globally):
        return _windowed(robustness_signal(f.child, traj), f.interval, np.minimum, math.inf)
    if isinstance(f, Eventually):
        return _windowed(robustness_signal(f.child, traj), f.interval, np.maximum, -math.inf)
    if isinstance(f, Until):
        left = robustness_signal(f.left, traj)
        right = robustness_signal(f.right, traj)
        out = np.full(n, -math.inf)
        a, b = f.interval
        for t in range(n):
            lo, hi = _window(n, t, f.interval)
            if lo >= hi:
                continue
            # running min of the left operand over [t, t'] for t' >= t
            hold = np.minimum.accumulate(left[t:hi])
            cand = np.minimum(right[lo:hi], hold[lo - t:])
            out[t] = cand.max()
        return out
    raise TypeError(f"not a formula: {f!r}")


def satisfaction_signal(f: Formula, traj: Trajectory) -> np.ndarray:
    """Boolean satisfaction of ``f`` at every time index of ``traj``."""
    n = len(traj)
    if isinstance(f, Top):
        return np.ones(n, dtype=bool)
    if isinstance(f, Pred):
        p = f.predicate
        acc = _affine(p, traj)
        return {
            Relation.GE: acc >= p.constant,
            Relation.GT: acc > p.constant,
            Relation.LE: acc <= p.constant,
            Relation.LT: acc < p.constant,
        }[p.relation]
    if isinstance(f, Not):
        return ~satisfaction_signal(f.child, traj)
    if isinstance(f, And):
        return satisfaction_signal(f.left, traj) & satisfaction_signal(f.right, traj)
    if isinstance(f, Or):
        return satisfaction_signal(f.left, traj) | satisfaction_signal(f.right, traj)
    if isinstance(f, (Globally, Eventually)):
        child = satisfaction_signal(f.child, traj)
        is_g = isinstance(f, Globally)
        out = np.full(n, is_g)
        for t in range(n):
            lo, hi = _window(n, t, f.interval)
            if lo < hi:
                out[t] = child[lo:hi].all() if is_g else child[lo:hi].any()
        return out
    if isinstance(f, Until):
        left = satisfaction_signal(f.left, traj)
        right = satisfaction_signal(f.right, traj)
        out = np.zeros(n, dtype=bool)
        for t in range(n):
            lo, hi = _window(n, t, f.interval)
            if lo >= hi:
                continue
            hold = np.logical_and.accumulate(left[t:hi])
            out[t] = bool((right[lo:hi] & hold[lo - t:]).any())
        return out
    raise TypeError(f"not a formula: {f!r}")


def _check_index(traj: Trajectory, t: int):
    if not 0 <= t < len(traj):
        raise IndexError(f"time index {t} outside [0, {len(traj)})")


def robustness(f: Formula, traj: Trajectory, t: int = 0) -> float:
    _check_index(traj, t)
    return float(robustness_signal(f, traj)[t])


def eval_boolean(f: Formula, traj: Trajectory, t: int = 0) -> bool:
    _check_index(traj, t)
    return bool(satisfaction_signal(f, traj)[t])


# ---------------------------------------------------------------------------
# Scalar compilation and online monitoring


def compile_state_robustness(f: Formula) -> Callable[[Mapping[str, float]], float]:
    """Compile a temporal-operator-free formula into ``sample -> robustness``.

    Arithmetic mirrors :func:`robustness_signal` exactly.
    """
    if isinstance(f, Top):
        return lambda s: TOP_ROBUSTNESS
    if isinstance(f, Pred):
        p = f.predicate
        coeffs = p.coefficients
        const = p.constant
        upper = p.relation in (Relation.GE, Relation.GT)

        def pred(s):
            acc = 0.0
            for name, c in coeffs:
                try:
                    acc = acc + c * s[name]
                except KeyError:
                    raise UnknownChannelError(name) from None
            return acc - const if upper else const - acc
        return pred
    if isinstance(f, Not):
        inner = compile_state_robustness(f.child)
        return lambda s: -inner(s)
    if isinstance(f, (And, Or)):
        left = compile_state_robustness(f.left)
        right = compile_state_robustness(f.right)
        pick = min if isinstance(f, And) else max
        return lambda s: pick(left(s), right(s))
    raise NotInvariantError("temporal operators cannot be evaluated on a single sample")


class OnlineMonitor:
    """Incremental robustness of an invariant ``G[...] body``.

    ``running_min`` is the batch robustness of the formula on the prefix
    appended so far, and ``+inf`` before any append.
    """

    def __init__(self, formula: Formula):
        if not is_invariant(formula):
            raise NotInvariantError(
                "online monitoring needs G applied to a temporal-operator-free body")
        self.formula = formula
        self._body = compile_state_robustness(formula.child)
        self._window = formula.interval
        self.running_min = math.inf
        self.steps_seen = 0

    def body_robustness(self, sample: Mapping[str, float]) -> float:
        return self._body(sample)

    def _counts(self, k: int) -> bool:
        return self._window is None or self._window[0] <= k <= self._window[1]

    def peek(self, sample: Mapping[str, float]) -> float:
        """Running minimum if ``sample`` were appended next; no mutation."""
        if not self._counts(self.steps_seen):
            return self.running_min
        return min(self.running_min, self._body(sample))

    def append(self, sample: Mapping[str, float]) -> float:
        self.running_min = self.peek(sample)
        self.steps_seen += 1
        return self.running_min

    def copy(self) -> "OnlineMonitor":
        other = OnlineMonitor.__new__(OnlineMonitor)
        other.__dict__.update(self.__dict__)
        return other


def online_append(monitor: OnlineMonitor, sample: Mapping[str, float]) -> float:
    return monitor.append(sample)


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>-?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<badop>!=|==|=>|->|<->|<>|=|~|\^|&&|\|\|)
  | (?P<op>>=|<=|>|<|!|&|\||\(|\)|\[|\]|,|\*|\+)
""", re.VERBOSE)

_KEYWORDS = {"G", "F", "U", "true"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise STLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        s = m.group()
        if kind == "ws":
            for i, ch in enumerate(s):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        elif kind == "badop":
            raise STLSyntaxError(f"unknown operator {s!r}", line, col)
        elif kind == "ident" and s in _KEYWORDS:
            toks.append(_Tok(s, s, line, col))
        else:
            toks.append(_Tok(kind if kind != "op" else s, s, line, col))
        pos = m.end()
    col = pos - line_start + 1
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        return STLSyntaxError(msg, tok.line, tok.col)

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        return self.advance()

    def parse(self) -> Formula:
        f = self.until()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return f

    def until(self) -> Formula:
        left = self.disj()
        while self.tok.kind == "U":
            self.advance()
            if self.tok.kind != "[":
                raise self.error("until requires an interval")
            win = self.window()
            left = Until(left, self.disj(), win)
        return left

    def disj(self) -> Formula:
        left = self.conj()
        while self.tok.kind == "|":
            self.advance()
            left = Or(left, self.conj())
        return left

    def conj(self) -> Formula:
        left = self.unary()
        while self.tok.kind == "&":
            self.advance()
            left = And(left, self.unary())
        return left

    def window(self) -> tuple[int, int]:
        start = self.expect("[")
        a = self.integer()
        self.expect(",")
        b = self.integer()
        self.expect("]")
        if b < a:
            raise self.error(f"malformed interval [{a},{b}]: upper bound below lower", start)
        return (a, b)

    def integer(self) -> int:
        tok = self.expect("number")
        if not re.fullmatch(r"\d+", tok.text):
            raise self.error(f"interval bound must be a non-negative integer, got {tok.text!r}", tok)
        return int(tok.text)

    def unary(self) -> Formula:
        kind = self.tok.kind
        if kind == "!":
            self.advance()
            return Not(self.unary())
        if kind in ("G", "F"):
            self.advance()
            win = self.window() if self.tok.kind == "[" else None
            child = self.unary()
            return Globally(child, win) if kind == "G" else Eventually(child, win)
        if kind == "(":
            self.advance()
            f = self.until()
            self.expect(")")
            return f
        if kind == "true":
            self.advance()
            return Top()
        return self.predicate()

    def predicate(self) -> Formula:
        terms = [self.term()]
        while self.tok.kind == "+":
            self.advance()
            terms.append(self.term())
        rel_tok = self.tok
        if rel_tok.kind not in (">=", ">", "<=", "<"):
            raise self.error(f"expected comparison, found {rel_tok.text or 'end of input'!r}")
        self.advance()
        const = float(self.expect("number").text)
        try:
            return Pred(Predicate(tuple(terms), Relation(rel_tok.kind), const))
        except STLError as exc:
            raise self.error(str(exc), rel_tok) from None

    def term(self) -> tuple[str, float]:
        tok = self.tok
        if tok.kind == "ident":
            self.advance()
            if self.tok.kind in ("(", "["):
                raise self.error(f"unknown operator {tok.text!r}", tok)
            return (tok.text, 1.0)
        if tok.kind == "number":
            self.advance()
            self.expect("*")
            return (self.expect("ident").text, float(tok.text))
        raise self.error(f"expected a formula, found {tok.text or 'end of input'!r}")


def parse_formula(text: str) -> Formula:
    """Parse concrete STL syntax, e.g. ``"G[0,5] !(x >= 1 & z >= 1)"``.

    Precedence from tightest: ``!`` and temporal prefixes, ``&``, ``|``,
    ``U``. Binary operators associate to the left.
    """
    return _Parser(text).parse()


# printing precedence levels
_LEVEL_UNTIL, _LEVEL_OR, _LEVEL_AND, _LEVEL_UNARY = 0, 1, 2, 3


def _num(v: float) -> str:
    return repr(float(v))


def _format_pred(p: Predicate) -> str:
    terms = [name if c == 1.0 else f"{_num(c)}*{name}" for name, c in p.coefficients]
    return f"{' + '.join(terms)} {p.relation.value} {_num(p.constant)}"


def _win(interval) -> str:
    return "" if interval is None else f"[{interval[0]},{interval[1]}]"


def _fmt(f: Formula) -> tuple[str, int]:
    if isinstance(f, Top):
        return "true", _LEVEL_UNARY
    if isinstance(f, Pred):
        return _format_pred(f.predicate), _LEVEL_UNARY
    if isinstance(f, Not):
        return "!" + _operand(f.child, _LEVEL_UNARY, prefix=True), _LEVEL_UNARY
    if isinstance(f, (Globally, Eventually)):
        op = "G" if isinstance(f, Globally) else "F"
        child = _operand(f.child, _LEVEL_UNARY, prefix=True)
        return f"{op}{_win(f.interval)} {child}", _LEVEL_UNARY
    if isinstance(f, (And, Or)):
        level = _LEVEL_AND if isinstance(f, And) else _LEVEL_OR
        sym = "&" if isinstance(f, And) else "|"
        left = _operand(f.left, level)
        right = _operand(f.right, level + 1)
        return f"{left} {sym} {right}", level
    if isinstance(f, Until):
        left = _operand(f.left, _LEVEL_OR)
        right = _operand(f.right, _LEVEL_OR)
        return f"{left} U{_win(f.interval)} {right}", _LEVEL_UNTIL
    raise TypeError(f"not a formula: {f!r}")


def _operand(f: Formula, min_level: int, prefix: bool = False) -> str:
    text, level = _fmt(f)
    if prefix and isinstance(f, Pred):
        # "!x >= 1" parses fine but reads badly
        return f"({text})"
    return text if level >= min_level else f"({text})"


def format_formula(f: Formula) -> str:
    """Concrete syntax for ``f``; ``parse_formula`` inverts it."""
    return _fmt(f)[0]
