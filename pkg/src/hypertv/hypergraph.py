"""Hypergraph data model, per-cardinality decomposition, and odd-cardinality pretreatment.

A hypergraph couples groups of vertices through hyperedges of arbitrary size.
The total-variation machinery downstream only accepts even cardinalities, so a
hypergraph is *pretreated* first: every odd-cardinality hyperedge receives one
fresh auxiliary vertex whose signal is defined as the arithmetic mean of the
signals at the original members. The bookkeeping for that mean is a sparse
(N+t) x N transformation matrix whose top block is the identity.

Vertex indices are 0-based everywhere, including the text file format.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from ._files import write_text_atomic
from .errors import ParseError, ValidationError

Edge = tuple[int, ...]


def _normalize_edge(edge, n_vertices: int, position: int) -> Edge:
    members = tuple(int(v) for v in edge)
    if len(members) != len(set(members)):
        raise ValidationError(f"hyperedge {position} repeats a vertex: {members}")
    if len(members) < 2:
        raise ValidationError(
            f"hyperedge {position} has cardinality {len(members)}; need at least 2"
        )
    for v in members:
        if not 0 <= v < n_vertices:
            raise ValidationError(
                f"hyperedge {position} references vertex {v}, outside [0, {n_vertices})"
            )
    return tuple(sorted(members))


@dataclass(frozen=True)
class Hypergraph:
    """Vertex count plus an ordered list of hyperedges.

    Hyperedges keep their listed order; members inside one hyperedge are stored
    sorted. Duplicate hyperedges are retained as distinct edges and count
    separately toward degrees (effective weight 2).
    """

    n_vertices: int
    hyperedges: tuple[Edge, ...]

    def __post_init__(self):
        n = int(self.n_vertices)
        if n < 1:
            raise ValidationError(f"n_vertices must be positive, got {self.n_vertices}")
        edges = tuple(
            _normalize_edge(e, n, k) for k, e in enumerate(self.hyperedges)
        )
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "hyperedges", edges)

    @property
    def n_edges(self) -> int:
        return len(self.hyperedges)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        """Sorted distinct hyperedge cardinalities present in the hypergraph."""
        return tuple(sorted({len(e) for e in self.hyperedges}))

    def degrees(self) -> np.ndarray:
        """Number of hyperedges containing each vertex (duplicates count twice)."""
        out = np.zeros(self.n_vertices, dtype=np.int64)
        for e in self.hyperedges:
            out[list(e)] += 1
        return out


@dataclass(frozen=True)
class UniformPartial:
    """All hyperedges of one cardinality, spanning `dimension` vertices."""

    cardinality: int
    hyperedges: tuple[Edge, ...]
    dimension: int

    def __post_init__(self):
        if self.cardinality < 2:
            raise ValidationError(f"cardinality must be >= 2, got {self.cardinality}")
        for e in self.hyperedges:
            if len(e) != self.cardinality:
                raise ValidationError(
                    f"hyperedge {e} does not match cardinality {self.cardinality}"
                )
        object.__setattr__(self, "hyperedges", tuple(tuple(e) for e in self.hyperedges))

    @property
    def n_edges(self) -> int:
        return len(self.hyperedges)

    @cached_property
    def members(self) -> np.ndarray:
        """(n_edges, cardinality) int64 matrix of member indices."""
        if not self.hyperedges:
            return np.zeros((0, self.cardinality), dtype=np.int64)
        return np.asarray(self.hyperedges, dtype=np.int64)


@dataclass(frozen=True)
class TransformationMatrix:
    """Sparse (N+t) x N matrix mapping a signal to its pretreated extension.

    The top N x N block is the identity. Auxiliary row j carries weight
    1/len(aux_rows[j]) on each listed original vertex, so the auxiliary signal
    is the arithmetic mean over those vertices.
    """

    n_original: int
    aux_rows: tuple[Edge, ...]

    def __post_init__(self):
        if self.n_original < 1:
            raise ValidationError("n_original must be positive")
        rows = []
        for j, row in enumerate(self.aux_rows):
            members = tuple(sorted(int(v) for v in row))
            if not members:
                raise ValidationError(f"auxiliary row {j} is empty")
            if len(set(members)) != len(members):
                raise ValidationError(f"auxiliary row {j} repeats a vertex")
            if members[0] < 0 or members[-1] >= self.n_original:
                raise ValidationError(f"auxiliary row {j} references an unknown vertex")
            rows.append(members)
        object.__setattr__(self, "aux_rows", tuple(rows))

    @property
    def n_aux(self) -> int:
        return len(self.aux_rows)

    @property
    def n_extended(self) -> int:
        return self.n_original + self.n_aux

    def row_weight(self, j: int) -> float:
        return 1.0 / len(self.aux_rows[j])

    def dense(self) -> np.ndarray:
        """Materialize the full matrix (test oracle and small-scale use only)."""
        out = np.zeros((self.n_extended, self.n_original))
        out[: self.n_original, : self.n_original] = np.eye(self.n_original)
        for j, row in enumerate(self.aux_rows):
            out[self.n_original + j, list(row)] = self.row_weight(j)
        return out


@dataclass(frozen=True)
class PretreatedHypergraph:
    """Even-cardinality hypergraph over N+t vertices plus the signal transform.

    `aux_origin[j]` is the index of the hyperedge that auxiliary vertex N+j was
    added to.
    """

    hypergraph: Hypergraph
    transform: TransformationMatrix
    aux_origin: tuple[int, ...]

    def __post_init__(self):
        if self.hypergraph.n_vertices != self.transform.n_extended:
            raise ValidationError("transform size does not match the hypergraph")
        if len(self.aux_origin) != self.transform.n_aux:
            raise ValidationError("aux_origin length does not match the transform")
        for e in self.hypergraph.hyperedges:
            if len(e) % 2 != 0:
                raise ValidationError(f"pretreated hypergraph has odd hyperedge {e}")

    @property
    def n_original(self) -> int:
        return self.transform.n_original

    @property
    def n_aux(self) -> int:
        return self.transform.n_aux


def decompose(h: Hypergraph) -> list[UniformPartial]:
    """Split a hypergraph into uniform partials, one per distinct cardinality.

    Each partial keeps the hyperedges of its cardinality in their original
    order and spans all `h.n_vertices` vertices. The union of all partials'
    hyperedge lists equals `h.hyperedges` as a multiset.
    """
    by_card: dict[int, list[Edge]] = {}
    for e in h.hyperedges:
        by_card.setdefault(len(e), []).append(e)
    return [
        UniformPartial(cardinality=c, hyperedges=tuple(by_card[c]), dimension=h.n_vertices)
        for c in sorted(by_card)
    ]


def pretreat(h: Hypergraph) -> PretreatedHypergraph:
    """Extend every odd-cardinality hyperedge with one fresh auxiliary vertex.

    Auxiliary vertices take indices N..N+t-1 in the order their source
    hyperedges appear in the hyperedge list; each auxiliary vertex belongs to
    exactly one hyperedge. Even-cardinality hyperedges are unchanged. The
    returned transform defines each auxiliary signal as the arithmetic mean of
    the original members of its hyperedge.
    """
    odd_positions = [k for k, e in enumerate(h.hyperedges) if len(e) % 2 == 1]
    new_edges = list(h.hyperedges)
    aux_rows = []
    for j, k in enumerate(odd_positions):
        aux_vertex = h.n_vertices + j
        aux_rows.append(h.hyperedges[k])
        new_edges[k] = h.hyperedges[k] + (aux_vertex,)
    t = len(odd_positions)
    return PretreatedHypergraph(
        hypergraph=Hypergraph(h.n_vertices + t, tuple(new_edges)),
        transform=TransformationMatrix(h.n_vertices, tuple(aux_rows)),
        aux_origin=tuple(odd_positions),
    )


def _as_signal(f, length: int, what: str = "signal") -> np.ndarray:
    arr = np.asarray(f, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != length:
        raise ValidationError(f"{what} must be a vector of length {length}, got shape {arr.shape}")
    return arr


def apply_transform(tm: TransformationMatrix, f) -> np.ndarray:
    """Return the pretreated signal: f stacked with the per-row means of f.

    The mean of identical values short-circuits to that value so constant
    signals extend exactly (summing and dividing would drift by an ulp).
    """
    f = _as_signal(f, tm.n_original)
    out = np.empty(tm.n_extended)
    out[: tm.n_original] = f
    for j, row in enumerate(tm.aux_rows):
        vals = f[list(row)]
        first = vals[0]
        out[tm.n_original + j] = first if np.all(vals == first) else vals.mean()
    return out


def transpose_apply(tm: TransformationMatrix, g) -> np.ndarray:
    """Return the transpose action on an extended signal.

    Entry i receives g_i plus, for each auxiliary row containing i, the row
    weight times the auxiliary entry.
    """
    g = _as_signal(g, tm.n_extended, "extended signal")
    out = g[: tm.n_original].copy()
    for j, row in enumerate(tm.aux_rows):
        out[list(row)] += tm.row_weight(j) * g[tm.n_original + j]
    return out


def load_hypergraph(path) -> Hypergraph:
    """Read the hypergraph text format.

    Line 1 holds `N K`; the next K non-comment lines each list one hyperedge
    as space-separated vertex indices. Lines starting with `#` and blank lines
    are ignored.
    """
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc

    header = None
    edges: list[Edge] = []
    edge_lines: list[int] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        tokens = text.split()
        try:
            values = [int(tok) for tok in tokens]
        except ValueError:
            raise ParseError(f"non-integer token in {tokens!r}", path=path, line=lineno)
        if header is None:
            if len(values) != 2:
                raise ParseError("header must be exactly `N K`", path=path, line=lineno)
            header = (values[0], values[1])
            if header[0] < 1 or header[1] < 0:
                raise ParseError(f"invalid header N={values[0]} K={values[1]}", path=path, line=lineno)
            continue
        try:
            edges.append(_normalize_edge(values, header[0], len(edges)))
        except ValidationError as exc:
            raise ParseError(str(exc), path=path, line=lineno) from exc
        edge_lines.append(lineno)

    if header is None:
        raise ParseError("empty hypergraph file", path=path)
    n, k = header
    if len(edges) != k:
        raise ParseError(f"header promises {k} hyperedges, file holds {len(edges)}", path=path)
    return Hypergraph(n, tuple(edges))


def save_hypergraph(h: Hypergraph, path) -> None:
    """Write the hypergraph text format (atomically)."""
    lines = [f"{h.n_vertices} {h.n_edges}"]
    lines.extend(" ".join(str(v) for v in e) for e in h.hyperedges)
    write_text_atomic(path, "\n".join(lines) + "\n")
