"""Binary functions on n-bit strings, stored as truth tables.

The table is indexed by ``x`` read as a binary number with ``x_1`` as the
most significant bit, i.e. in lexicographic order of the bit strings.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .timebin import BitString, all_bitstrings, dot, format_bits, parse_bits


class OracleClass(str, enum.Enum):
    CONSTANT = "constant"
    BALANCED = "balanced"
    NEITHER = "neither"


@dataclass(frozen=True)
class OracleSpec:
    n: int
    table: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"oracle needs n >= 1, got {self.n}")
        table = tuple(int(v) for v in self.table)
        if len(table) != 2 ** self.n:
            raise ValueError(f"truth table has {len(table)} entries, expected {2 ** self.n}")
        if any(v not in (0, 1) for v in table):
            raise ValueError("truth table entries must be 0 or 1")
        object.__setattr__(self, "table", table)

    def __call__(self, x: Sequence[int] | int) -> int:
        if isinstance(x, int):
            return self.table[x]
        idx = 0
        for b in x:
            idx = (idx << 1) | int(b)
        return self.table[idx]

    def signs(self) -> list[int]:
        """Phase-oracle signs ``(-1)^f(x)`` in table order."""
        return [1 - 2 * v for v in self.table]

    def __eq__(self, other):
        if not isinstance(other, OracleSpec):
            return NotImplemented
        return self.n == other.n and self.table == other.table

    def __hash__(self):
        return hash((self.n, self.table))


def constant_oracle(n: int, value: int = 0) -> OracleSpec:
    return OracleSpec(n, (value,) * 2 ** n, label=f"const_{value}")


def oracle_bv(j: Sequence[int] | str) -> OracleSpec:
    """The inner-product oracle ``f_j(x) = x . j mod 2``."""
    if isinstance(j, str):
        j = parse_bits(j)
    j = tuple(j)
    n = len(j)
    return OracleSpec(n, tuple(dot(x, j) for x in all_bitstrings(n)), label=f"f_{format_bits(j)}")


def oracle_complement(o: OracleSpec) -> OracleSpec:
    if o.label.startswith("f_"):
        label = "fbar_" + o.label[2:]
    elif o.label.startswith("fbar_"):
        label = "f_" + o.label[5:]
    else:
        label = f"not({o.label})" if o.label else ""
    return OracleSpec(o.n, tuple(1 - v for v in o.table), label=label)


def classify(o: OracleSpec) -> OracleClass:
    ones = sum(o.table)
    if ones in (0, len(o.table)):
        return OracleClass.CONSTANT
    if 2 * ones == len(o.table):
        return OracleClass.BALANCED
    return OracleClass.NEITHER


def compose_distributed(f: OracleSpec, g: OracleSpec) -> OracleSpec:
    """Pointwise XOR of two parties' functions.

    Equal inputs give the constant-0 function; inputs differing in exactly
    half the positions give a balanced one.
    """
    if f.n != g.n:
        raise ValueError(f"cannot compose oracles of size n={f.n} and n={g.n}")
    return OracleSpec(f.n, tuple(a ^ b for a, b in zip(f.table, g.table)))


def enumerate_bv_family(n: int) -> list[OracleSpec]:
    """All ``f_j`` followed by all complements, ``j`` in lexicographic order."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    fs = [oracle_bv(j) for j in all_bitstrings(n)]
    return fs + [oracle_complement(f) for f in fs]


def all_oracles(n: int) -> list[OracleSpec]:
    return [OracleSpec(n, tuple((k >> i) & 1 for i in range(2 ** n))) for k in range(2 ** 2 ** n)]


def format_truth_table(o: OracleSpec) -> str:
    return f"n={o.n}\n{''.join(str(v) for v in o.table)}\n"


def parse_truth_table(text: str) -> OracleSpec:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) != 2:
        raise ValueError("truth-table file needs a 'n=<int>' line followed by one 0/1 string")
    head, body = lines
    key, sep, value = head.partition("=")
    if key.strip() != "n" or not sep:
        raise ValueError(f"line 1: expected 'n=<int>', got {head!r}")
    try:
        n = int(value)
    except ValueError:
        raise ValueError(f"line 1: n is not an integer: {value!r}") from None
    if any(c not in "01" for c in body):
        raise ValueError("line 2: truth table must contain only 0 and 1")
    if len(body) != 2 ** n:
        raise ValueError(f"line 2: truth table has {len(body)} entries, expected 2^{n}={2 ** n}")
    return OracleSpec(n, tuple(int(c) for c in body))


def read_truth_table(path: str | Path) -> OracleSpec:
    o = parse_truth_table(Path(path).read_text())
    return OracleSpec(o.n, o.table, label=Path(path).stem)


def bv_index(o: OracleSpec) -> tuple[BitString, bool] | None:
    """Return ``(j, complemented)`` if ``o`` is ``f_j`` or its complement."""
    for j in all_bitstrings(o.n):
        f = oracle_bv(j)
        if f.table == o.table:
            return j, False
        if oracle_complement(f).table == o.table:
            return j, True
    return None
