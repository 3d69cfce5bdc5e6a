"""Key and lock systems with exact rational arithmetic.

A key stores a bit string and, asked for its first ``n`` bits, pads with
uniform random bits. A lock opens on input ``s`` when ``s`` agrees with its
stored string on their common prefix (random padding again when ``s`` is the
shorter one); the stuck lock ``BOTTOM`` never opens. Joint states are finite
mixtures of key/lock product pairs, so every effect value is a ``Fraction``.

Bit strings are plain ``str`` over ``"01"``; ``""`` is the empty string.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping

BOTTOM = "⊥"
MAX_BITS = 64
MAX_CORRELATED_N = 16
MAX_PRODUCT_N = 12
MAX_TOMOGRAPHY_LEN = 4

ONE = Fraction(1)
ZERO = Fraction(0)


def check_bits(s: str) -> str:
    if not isinstance(s, str) or len(s) > MAX_BITS or s.strip("01"):
        raise ValueError(f"not a bit string of length <= {MAX_BITS}: {s!r}")
    return s


def all_strings(n: int) -> Iterable[str]:
    return ("".join(bits) for bits in itertools.product("01", repeat=n))


def compatible(a: str, b: str) -> bool:
    """One string is a prefix of the other."""
    return a.startswith(b) or b.startswith(a)


def _mixture(weights: Mapping, check_label) -> dict:
    out = {}
    for label, w in weights.items():
        check_label(label)
        w = Fraction(w)
        if w <= 0:
            raise ValueError(f"mixture weight for {label!r} must be positive, got {w}")
        out[label] = w
    if sum(out.values(), ZERO) != 1:
        raise ValueError(f"mixture weights sum to {sum(out.values(), ZERO)}, expected 1")
    return out


def _check_lock_label(label):
    if label != BOTTOM:
        check_bits(label)


def _check_pair(pair):
    k, l = pair
    check_bits(k)
    _check_lock_label(l)


@dataclasses.dataclass(frozen=True)
class KeyState:
    mixture: dict

    def __post_init__(self):
        object.__setattr__(self, "mixture", _mixture(self.mixture, check_bits))

    @classmethod
    def pure(cls, k: str = "") -> "KeyState":
        return cls({k: ONE})


@dataclasses.dataclass(frozen=True)
class LockState:
    mixture: dict

    def __post_init__(self):
        object.__setattr__(self, "mixture", _mixture(self.mixture, _check_lock_label))

    @classmethod
    def pure(cls, l: str) -> "LockState":
        return cls({l: ONE})


@dataclasses.dataclass(frozen=True)
class JointState:
    """Mixture over ``(key label, lock label)`` product pairs."""

    mixture: dict

    def __post_init__(self):
        object.__setattr__(self, "mixture", _mixture(self.mixture, _check_pair))

    @classmethod
    def product(cls, key: KeyState, lock: LockState) -> "JointState":
        return cls({(k, l): wk * wl for k, wk in key.mixture.items() for l, wl in lock.mixture.items()})

    @classmethod
    def mix(cls, parts: Iterable[tuple[Fraction, "JointState"]]) -> "JointState":
        out: dict = defaultdict(Fraction)
        for p, state in parts:
            for pair, w in state.mixture.items():
                out[pair] += Fraction(p) * w
        return cls({pair: w for pair, w in out.items() if w})

    def to_json(self) -> str:
        return json.dumps([{"key": k, "lock": l, "numerator": w.numerator, "denominator": w.denominator}
                           for (k, l), w in sorted(self.mixture.items())], ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "JointState":
        return cls({(e["key"], e["lock"]): Fraction(e["numerator"], e["denominator"]) for e in json.loads(text)})


def state_to_json(state: KeyState | LockState) -> str:
    return json.dumps([{"label": label, "numerator": w.numerator, "denominator": w.denominator}
                       for label, w in sorted(state.mixture.items())], ensure_ascii=False)


def state_from_json(text: str, kind: type) -> KeyState | LockState:
    return kind({e["label"]: Fraction(e["numerator"], e["denominator"]) for e in json.loads(text)})


@dataclasses.dataclass(frozen=True)
class KeyEffect:
    """Sum of the depth-``n`` readout effects over ``accepted``."""

    depth: int
    accepted: frozenset

    def __post_init__(self):
        if self.depth < 0 or self.depth > MAX_BITS:
            raise ValueError("key effect depth out of range")
        acc = frozenset(self.accepted)
        for a in acc:
            if len(check_bits(a)) != self.depth:
                raise ValueError(f"accepted string {a!r} does not have length {self.depth}")
        object.__setattr__(self, "accepted", acc)

    @classmethod
    def single(cls, s: str) -> "KeyEffect":
        return cls(len(s), frozenset([s]))

    @classmethod
    def unit(cls, depth: int = 0) -> "KeyEffect":
        return cls(depth, frozenset(all_strings(depth)))


@dataclasses.dataclass(frozen=True)
class LockEffect:
    s: str
    opened: bool = True

    def __post_init__(self):
        check_bits(self.s)


def lock_open_probability(s: str, l: str) -> Fraction:
    if l == BOTTOM:
        return ZERO
    if len(s) >= len(l):
        return ONE if s.startswith(l) else ZERO
    return Fraction(1, 2 ** (len(l) - len(s))) if l.startswith(s) else ZERO


def key_probability(effect: KeyEffect, k: str) -> Fraction:
    n = effect.depth
    if len(k) >= n:
        return ONE if k[:n] in effect.accepted else ZERO
    hits = sum(1 for a in effect.accepted if a.startswith(k))
    return Fraction(hits, 2 ** (n - len(k)))


def _lock_effect_value(effect: LockEffect, l: str) -> Fraction:
    p = lock_open_probability(effect.s, l)
    return p if effect.opened else ONE - p


def lock_eval(s: str, opened: bool, lock: LockState) -> Fraction:
    effect = LockEffect(s, opened)
    return sum((w * _lock_effect_value(effect, l) for l, w in lock.mixture.items()), ZERO)


def key_eval(effect: KeyEffect, key: KeyState) -> Fraction:
    return sum((w * key_probability(effect, k) for k, w in key.mixture.items()), ZERO)


def product_effect_eval(key_effect: KeyEffect, lock_effect: LockEffect, state: JointState) -> Fraction:
    return sum((w * key_probability(key_effect, k) * _lock_effect_value(lock_effect, l)
                for (k, l), w in state.mixture.items()), ZERO)


def _adaptive_pair(n: int, k: str, l: str) -> Fraction:
    # sum over s in {0,1}^n of P(key reads s) * P(lock opens on s)
    if l == BOTTOM:
        return ZERO
    if len(k) >= n:
        return lock_open_probability(k[:n], l)
    if len(l) <= n:
        if not compatible(k, l):
            return ZERO
        return Fraction(1, 2 ** (max(len(k), len(l)) - len(k)))
    if not l[:n].startswith(k):
        return ZERO
    return Fraction(1, 2 ** (n - len(k))) * Fraction(1, 2 ** (len(l) - n))


def adaptive_effect_eval(n: int, state: JointState) -> Fraction:
    """Value of the effect that reads ``n`` key bits and feeds them to the lock."""
    if not 0 <= n <= MAX_BITS:
        raise ValueError(f"n must be in 0..{MAX_BITS}")
    return sum((w * _adaptive_pair(n, k, l) for (k, l), w in state.mixture.items()), ZERO)


def correlated_state(n: int) -> JointState:
    """Uniform mixture of matched pairs ``key_k (x) lock_k`` over ``k`` in ``{0,1}^n``."""
    if not 0 <= n <= MAX_CORRELATED_N:
        raise ValueError(f"n must be in 0..{MAX_CORRELATED_N}")
    w = Fraction(1, 2**n)
    return JointState({(k, k): w for k in all_strings(n)})


def stuck_state() -> JointState:
    """Empty key with the lock that never opens."""
    return JointState({("", BOTTOM): ONE})


def adaptive_distance(n: int, a: JointState | None = None, b: JointState | None = None) -> Fraction:
    """Statistical distance of the adaptive open/closed outcome on ``a`` and ``b``.

    Defaults: the correlated state and the stuck state.
    """
    if not 0 <= n <= MAX_CORRELATED_N:
        raise ValueError(f"n must be in 0..{MAX_CORRELATED_N}")
    a = correlated_state(n) if a is None else a
    b = stuck_state() if b is None else b
    return abs(adaptive_effect_eval(n, a) - adaptive_effect_eval(n, b))


def _key_distribution(n: int, k: str) -> tuple[str, int, Fraction]:
    """Readout of ``n`` bits on key ``k``: uniform over extensions of the returned prefix."""
    if len(k) >= n:
        return k[:n], 0, ONE
    return k, n - len(k), Fraction(1, 2 ** (n - len(k)))


def _extensions(prefix: str, free: int) -> Iterable[str]:
    return (prefix + tail for tail in all_strings(free))


def _key_marginal(n: int, state: JointState) -> dict:
    out: dict = defaultdict(Fraction)
    for (k, _), w in state.mixture.items():
        prefix, free, p = _key_distribution(n, k)
        for ell in _extensions(prefix, free):
            out[ell] += w * p
    return out


class _LockIndex:
    """Terms of a joint state grouped by lock label for fast compatible-label lookup."""

    def __init__(self, n: int, state: JointState):
        self.short: dict = defaultdict(list)  # |l| <= n, keyed by l
        self.long: dict = defaultdict(list)   # |l| > n, keyed by l[:n]
        for (k, l), w in state.mixture.items():
            if l == BOTTOM:
                continue
            target = self.short if len(l) <= n else self.long
            target[l if len(l) <= n else l[:n]].append((k, l, w))

    def opening(self, s: str) -> Iterable[tuple[str, str, Fraction]]:
        for i in range(len(s) + 1):
            yield from self.short.get(s[:i], ())
        yield from self.long.get(s, ())


def _open_part(n: int, s: str, index: _LockIndex) -> dict:
    out: dict = defaultdict(Fraction)
    for k, l, w in index.opening(s):
        q = lock_open_probability(s, l)
        prefix, free, p = _key_distribution(n, k)
        for ell in _extensions(prefix, free):
            out[ell] += w * p * q
    return out


def product_measurement_l1(n: int, s: str, a: JointState, b: JointState) -> Fraction:
    """``sum_{ell, r} |(E_K^{n,ell} (x) E_L^{s,r})(a - b)|`` for the finest partition."""
    ka, kb = _key_marginal(n, a), _key_marginal(n, b)
    oa = _open_part(n, s, _LockIndex(n, a))
    ob = _open_part(n, s, _LockIndex(n, b))
    return _marginal_l1(ka, kb) + _open_correction(ka, kb, oa, ob)


def _marginal_l1(ka, kb) -> Fraction:
    return sum((abs(ka.get(ell, ZERO) - kb.get(ell, ZERO)) for ell in set(ka) | set(kb)), ZERO)


def _open_correction(ka, kb, oa, ob) -> Fraction:
    # Outside the open support the pair (open, closed) contributes |dK|; inside it splits.
    total = ZERO
    for ell in set(oa) | set(ob):
        dk = ka.get(ell, ZERO) - kb.get(ell, ZERO)
        do = oa.get(ell, ZERO) - ob.get(ell, ZERO)
        total += abs(do) + abs(dk - do) - abs(dk)
    return total


def product_family_distance(n: int, a: JointState | None = None, b: JointState | None = None) -> Fraction:
    """Largest outcome 1-norm over product measurements with ``|s| = n`` and finest key partition.

    Defaults: the correlated state and the stuck state, where the value is ``2^{1-n}``.
    """
    if not 0 <= n <= MAX_PRODUCT_N:
        raise ValueError(f"n must be in 0..{MAX_PRODUCT_N}")
    a = correlated_state(n) if a is None else a
    b = stuck_state() if b is None else b
    ka, kb = _key_marginal(n, a), _key_marginal(n, b)
    base = _marginal_l1(ka, kb)
    ia, ib = _LockIndex(n, a), _LockIndex(n, b)
    best = ZERO
    for s in all_strings(n):
        best = max(best, base + _open_correction(ka, kb, _open_part(n, s, ia), _open_part(n, s, ib)))
    return best


# --- local tomography ----------------------------------------------------------------------------


def rational_rank(rows: list[list]) -> int:
    """Rank over the rationals by Gaussian elimination on ``Fraction`` entries."""
    work = [[Fraction(x) for x in row] for row in rows if any(row)]
    rank = 0
    cols = len(work[0]) if work else 0
    for col in range(cols):
        pivot = next((i for i in range(rank, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        prow = work[rank]
        inv = 1 / prow[col]
        for i in range(rank + 1, len(work)):
            f = work[i][col]
            if f:
                f *= inv
                row = work[i]
                for j in range(col, cols):
                    if prow[j]:
                        row[j] -= f * prow[j]
        rank += 1
        if rank == len(work):
            break
    return rank


def key_vector(k: str, max_len: int) -> list[Fraction]:
    """Density ``chi_{I_k} / |I_k|`` on the ``2^max_len`` dyadic leaves."""
    return [Fraction(2 ** len(k)) if leaf.startswith(k) else ZERO for leaf in all_strings(max_len)]


def lock_vector(l: str, max_len: int) -> list[Fraction]:
    """``(f, c)``: indicator of ``I_l`` on the leaves, then the unit coordinate."""
    f = [ZERO if l == BOTTOM or not leaf.startswith(l) else ONE for leaf in all_strings(max_len)]
    return f + [ONE]


def _kron(a: list, b: list) -> list:
    return [x * y for x in a for y in b]


@dataclasses.dataclass(frozen=True)
class TomographyReport:
    max_len: int
    states: int
    effects: int
    span_rank: int
    evaluation_rank: int
    distinct_columns: bool

    @property
    def passed(self) -> bool:
        return self.evaluation_rank == self.span_rank and self.distinct_columns

    @property
    def full_column_rank(self) -> bool:
        return self.evaluation_rank == self.states


def truncated_extremes(max_len: int) -> tuple[list[str], list[str]]:
    keys = [s for n in range(max_len + 1) for s in all_strings(n)]
    return keys, keys + [BOTTOM]


def product_effects(max_len: int) -> list[tuple[KeyEffect, LockEffect | None]]:
    """Key readouts of depth ``<= max_len`` times lock-opens effects ``|t| <= max_len`` or the lock unit."""
    keys = [KeyEffect.single(s) for n in range(max_len + 1) for s in all_strings(n)]
    locks: list = [LockEffect(t) for n in range(max_len + 1) for t in all_strings(n)] + [None]
    return [(ke, le) for ke in keys for le in locks]


def local_tomography_check(max_len: int, states: list[tuple[str, str]] | None = None) -> TomographyReport:
    """Do product effects separate the joint states built from truncated extremes?

    The evaluation map is injective on the span of the states iff the rank of
    the effect-by-state evaluation matrix equals the rank of the states
    themselves (as vectors on dyadic leaves). Duplicate states show up as
    equal columns.
    """
    if not 0 <= max_len <= MAX_TOMOGRAPHY_LEN:
        raise ValueError(f"max_len must be in 0..{MAX_TOMOGRAPHY_LEN}")
    if states is None:
        keys, locks = truncated_extremes(max_len)
        states = [(k, l) for k in keys for l in locks]
    for k, l in states:
        _check_pair((k, l))
        if len(k) > max_len or (l != BOTTOM and len(l) > max_len):
            raise ValueError(f"state {(k, l)} exceeds max_len {max_len}")
    vectors = [_kron(key_vector(k, max_len), lock_vector(l, max_len)) for k, l in states]
    effects = product_effects(max_len)
    columns = []
    for k, l in states:
        col = []
        for ke, le in effects:
            lock_part = ONE if le is None else _lock_effect_value(le, l)
            col.append(key_probability(ke, k) * lock_part)
        columns.append(tuple(col))
    rows = [list(r) for r in zip(*columns)]
    return TomographyReport(
        max_len=max_len,
        states=len(states),
        effects=len(effects),
        span_rank=rational_rank(vectors),
        evaluation_rank=rational_rank(rows),
        distinct_columns=len(set(columns)) == len(columns),
    )
