"""File formats: PAG mark matrices, DAG description files, data and covariance CSVs."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import numpy as np

from .graph import GraphError, LatentDag, MixedGraph, Role


class DataError(ValueError):
    """Malformed or inconsistent input file."""


def default_names(p: int) -> list[str]:
    return [f"X{v + 1}" for v in range(p)]


def _read_csv(path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    return rows


def format_pag(g: MixedGraph, names: Sequence[str] | None = None) -> str:
    names = list(names) if names is not None else default_names(g.n_vertices)
    if len(names) != g.n_vertices:
        raise ValueError("one name per vertex is required")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    writer.writerows(g.to_matrix().tolist())
    return buf.getvalue()


def write_pag(path, g: MixedGraph, names: Sequence[str] | None = None) -> None:
    Path(path).write_text(format_pag(g, names))


def read_pag(path) -> tuple[MixedGraph, list[str]]:
    """Parse a mark-matrix CSV: a header of names, then one integer row per vertex."""
    rows = _read_csv(path)
    names = [c.strip() for c in rows[0]]
    body = rows[1:]
    p = len(names)
    if len(body) != p or any(len(r) != p for r in body):
        raise DataError(f"{path}: expected a {p} x {p} matrix under the header")
    try:
        m = [[int(c) for c in r] for r in body]
    except ValueError:
        raise DataError(f"{path}: marks must be integers 0-3") from None
    try:
        return MixedGraph.from_matrix(m), names
    except GraphError as exc:
        raise DataError(f"{path}: {exc}") from None


def format_dag(d: LatentDag, names: Sequence[str] | None = None) -> str:
    lines = [f"p {d.n_vertices}"]
    if names is not None:
        lines += [f"name {v} {label}" for v, label in enumerate(names)]
    lines += [f"role {v} {role.value}" for v, role in enumerate(d.roles)]
    for src, dst in sorted(d.directed_edges()):
        if d.weights is None:
            lines.append(f"edge {src} {dst}")
        else:
            lines.append(f"edge {src} {dst} {float(d.weights[dst, src])!r}")
    return "\n".join(lines) + "\n"


def write_dag(path, d: LatentDag, names: Sequence[str] | None = None) -> None:
    Path(path).write_text(format_dag(d, names))


def read_dag(path) -> tuple[LatentDag, list[str] | None]:
    """Parse a DAG file.

    Lines are ``p <count>``, ``role <index> <observed|latent|selection>``,
    ``edge <src> <dst> [weight]`` and optionally ``name <index> <label>``.
    Blank lines and ``#`` comments are ignored; unlisted roles default to
    observed. Weights, if given, must be given for every edge.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    p = None
    roles: dict[int, Role] = {}
    names: dict[int, str] = {}
    edges: list[tuple[int, int, float | None]] = []

    def index(token: str, lineno: int) -> int:
        try:
            v = int(token)
        except ValueError:
            raise DataError(f"{path}:{lineno}: bad vertex index {token!r}") from None
        if p is None:
            raise DataError(f"{path}:{lineno}: 'p' line must come first")
        if not 0 <= v < p:
            raise DataError(f"{path}:{lineno}: vertex {v} out of range")
        return v

    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        key, args = parts[0], parts[1:]
        if key == "p" and len(args) == 1 and p is None:
            try:
                p = int(args[0])
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad vertex count") from None
            if p < 0:
                raise DataError(f"{path}:{lineno}: bad vertex count")
        elif key == "role" and len(args) == 2:
            try:
                roles[index(args[0], lineno)] = Role(args[1])
            except ValueError as exc:
                if isinstance(exc, DataError):
                    raise
                raise DataError(f"{path}:{lineno}: unknown role {args[1]!r}") from None
        elif key == "name" and len(args) == 2:
            names[index(args[0], lineno)] = args[1]
        elif key == "edge" and len(args) in (2, 3):
            src, dst = index(args[0], lineno), index(args[1], lineno)
            try:
                weight = float(args[2]) if len(args) == 3 else None
            except ValueError:
                raise DataError(f"{path}:{lineno}: bad weight {args[2]!r}") from None
            edges.append((src, dst, weight))
        else:
            raise DataError(f"{path}:{lineno}: cannot parse {raw.strip()!r}")
    if p is None:
        raise DataError(f"{path}: missing 'p' line")

    weighted = {w is not None for _, _, w in edges}
    if len(weighted) > 1:
        raise DataError(f"{path}: weights must be given for all edges or none")
    weights = None
    if weighted == {True}:
        weights = np.zeros((p, p))
        for src, dst, w in edges:
            weights[dst, src] = w
    latent = [v for v, r in roles.items() if r is Role.LATENT]
    selection = [v for v, r in roles.items() if r is Role.SELECTION]
    try:
        dag = LatentDag.from_edges(p, [(s, t) for s, t, _ in edges], latent, selection, weights)
    except GraphError as exc:
        raise DataError(f"{path}: {exc}") from None
    if names and len(names) != p:
        raise DataError(f"{path}: names given for some vertices only")
    return dag, ([names[v] for v in range(p)] if names else None)


def _numeric_table(path) -> tuple[list[str], np.ndarray]:
    rows = _read_csv(path)
    names = [c.strip() for c in rows[0]]
    if len(set(names)) != len(names):
        raise DataError(f"{path}: duplicate column names")
    if any(len(r) != len(names) for r in rows[1:]):
        raise DataError(f"{path}: ragged rows")
    try:
        values = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float).reshape(-1, len(names))
    except ValueError:
        raise DataError(f"{path}: non-numeric entry") from None
    if not np.isfinite(values).all():
        raise DataError(f"{path}: non-finite entry")
    return names, values


def read_data(path) -> tuple[list[str], np.ndarray]:
    """Samples CSV: header of names, one row per sample."""
    names, values = _numeric_table(path)
    if values.shape[0] < 2:
        raise DataError(f"{path}: need at least two samples")
    return names, values


def read_covariance(path) -> tuple[list[str], np.ndarray]:
    """Covariance CSV: header of names, then the square matrix."""
    names, values = _numeric_table(path)
    if values.shape != (len(names), len(names)):
        raise DataError(f"{path}: covariance must be square")
    return names, values


def write_matrix(path, names: Sequence[str], values: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        writer.writerows([[repr(float(x)) for x in row] for row in np.asarray(values)])
