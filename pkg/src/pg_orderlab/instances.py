"""Built-in problem instances and the plain-text instance file format.

File format (UTF-8, ``#`` starts a comment line)::

    K 4
    d 2
    X
    0 -2
    -1 0
    0 1
    2 0
    r 9 8 7 6
    theta1 6 8      # optional
    eta 0.2         # optional

``X`` is followed by exactly K rows of d numbers. Other fields keep their
values on the same line.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bandit import BanditInstance


class InstanceFormatError(ValueError):
    def __init__(self, line, fieldname, message):
        self.line = line
        self.field = fieldname
        where = f"line {line}" if line else "end of file"
        super().__init__(f"{where}: field {fieldname!r}: {message}")


@dataclass(frozen=True)
class NamedInstance:
    name: str
    instance: BanditInstance
    canonical_theta1: np.ndarray | None = None
    canonical_eta: float | None = None
    eta_from_source: bool = True


def _named(name, XT, r, theta1, eta, eta_from_source=True):
    inst = BanditInstance(np.array(XT, dtype=float).T, np.array(r, dtype=float))
    theta1 = None if theta1 is None else np.array(theta1, dtype=float)
    return NamedInstance(name, inst, theta1, eta, eta_from_source)


_R4 = (9, 8, 7, 6)

# Feature matrices are written transposed (d x K), rows are feature coordinates.
_REGISTRY = {
    n.name: n
    for n in (
        _named("example1", [[0, -1, 0, 2], [-2, 0, 1, 0]], _R4, (6, 8), 0.2),
        _named("example2", [[0, 0, -1, 2], [-2, 1, 0, 0]], _R4, (6, 8), 0.2),
        _named("example3", [[-1, 0, 0, 2], [0, -2, 1, 0]], _R4, (6, 8), 0.2),
        _named("example4", [[0, -1, 0, 1], [-1, 0, 1, 0]], _R4, (4, 10), 0.2),
        _named("example5", [[0, -1, -1, 0, 1, 1], [-1, 0, 1, 1, 0, -1]], (9, 8, 7, 6, 5, 4), (10, -2), 0.2),
        # eta is a fixed convention here; the region argument holds for any step size.
        _named("prop2", [[0, -10, 0], [-2, 4, 1]], (4, 2, -2), (-math.log(2), math.log(2)), 0.1,
               eta_from_source=False),
    )
}


def names():
    return list(_REGISTRY)


def builtin(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; valid names: {', '.join(_REGISTRY)}") from None


def _numbers(tokens, line, fieldname, count=None):
    try:
        vals = [float(t) for t in tokens]
    except ValueError as exc:
        raise InstanceFormatError(line, fieldname, f"not a number ({exc})") from None
    if not all(math.isfinite(v) for v in vals):
        raise InstanceFormatError(line, fieldname, "non-finite value")
    if count is not None and len(vals) != count:
        raise InstanceFormatError(line, fieldname, f"expected {count} numbers, got {len(vals)}")
    return vals


def _count(tokens, line, fieldname):
    if len(tokens) != 1:
        raise InstanceFormatError(line, fieldname, "expected a single integer")
    try:
        n = int(tokens[0])
    except ValueError:
        raise InstanceFormatError(line, fieldname, f"not an integer: {tokens[0]!r}") from None
    if n < 1:
        raise InstanceFormatError(line, fieldname, "must be positive")
    return n


def parse(text, name="<file>"):
    """Parse instance text into a NamedInstance (canonical values from the file)."""
    lines = [(i + 1, ln.split("#", 1)[0].split()) for i, ln in enumerate(text.splitlines())]
    lines = [(no, toks) for no, toks in lines if toks]
    seen = {}
    raw = {}
    K = d = None
    X_rows = None
    pos = 0
    while pos < len(lines):
        no, toks = lines[pos]
        key, rest = toks[0], toks[1:]
        if key in seen:
            raise InstanceFormatError(no, key, f"duplicate field (first on line {seen[key]})")
        seen[key] = no
        if key == "K":
            K = _count(rest, no, key)
        elif key == "d":
            d = _count(rest, no, key)
        elif key == "X":
            if K is None or d is None:
                raise InstanceFormatError(no, key, "K and d must come before X")
            if rest:
                raise InstanceFormatError(no, key, "matrix rows go on the following lines")
            X_rows = []
            for k in range(K):
                pos += 1
                if pos >= len(lines):
                    raise InstanceFormatError(None, key, f"expected {K} rows, got {k}")
                row_no, row = lines[pos]
                X_rows.append(_numbers(row, row_no, key, d))
        elif key in ("r", "theta1", "eta"):
            if K is None or d is None:
                raise InstanceFormatError(no, key, "K and d must come before vectors")
            raw[key] = (no, rest)
        else:
            raise InstanceFormatError(no, key, "unknown field")
        pos += 1

    for required in ("K", "d", "X", "r"):
        if required not in seen:
            raise InstanceFormatError(None, required, "missing")
    r_no, r_toks = raw["r"]
    r = _numbers(r_toks, r_no, "r", K)
    theta1 = eta = None
    if "theta1" in raw:
        no, toks = raw["theta1"]
        theta1 = np.array(_numbers(toks, no, "theta1", d))
    if "eta" in raw:
        no, toks = raw["eta"]
        (eta,) = _numbers(toks, no, "eta", 1)
        if eta <= 0:
            raise InstanceFormatError(no, "eta", "must be positive")
    inst = BanditInstance(np.array(X_rows), np.array(r))
    return NamedInstance(name, inst, theta1, eta)


def read(path):
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), name=path.stem)


def load(path):
    return read(path).instance


def _fmt(values):
    # repr() gives the shortest string that round-trips to the same float.
    return " ".join(repr(float(v)) for v in values)


def dumps(inst, theta1=None, eta=None):
    out = [f"K {inst.K}", f"d {inst.d}", "X"]
    out += [_fmt(row) for row in inst.X]
    out.append("r " + _fmt(inst.r))
    if theta1 is not None:
        out.append("theta1 " + _fmt(theta1))
    if eta is not None:
        out.append("eta " + _fmt([eta]))
    return "\n".join(out) + "\n"


def save(inst, path, theta1=None, eta=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(inst, theta1, eta))
