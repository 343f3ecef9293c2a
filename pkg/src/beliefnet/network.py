"""Signed belief network and its local probabilistic primitives.

Vertices carry a fitness, a pair of sign probabilities (g, h) and the ordinal
of the input that created them. Edges are undirected and carry one sign in
{-1, 0, +1}. A vertex that loses its last link vanishes immediately.

Vertex ids are non-negative integers. The engine uses the input ordinal as the
id, which keeps per-vertex arrays dense and makes dumps easy to read.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np


class ContractError(ValueError):
    """Raised when a structural operation would break the graph invariants."""


class ConfigurationError(ValueError):
    """Raised for invalid parameters (sign counts, tolerances, ...)."""


class DumpFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class EdgeSign(enum.IntEnum):
    NEGATIVE = -1
    NEUTRAL = 0
    POSITIVE = 1


@dataclass(frozen=True, slots=True)
class VertexAttrs:
    fitness: float
    g: float
    h: float
    ordinal: int = 0

    def __post_init__(self):
        if not (self.fitness >= 0.0 and math.isfinite(self.fitness)):
            raise ConfigurationError(f"fitness must be finite and >= 0, got {self.fitness}")
        if self.g < 0.0 or self.h < 0.0 or self.g + self.h > 1.0 + 1e-12:
            raise ConfigurationError(f"need g, h >= 0 and g + h <= 1, got g={self.g} h={self.h}")


@dataclass(frozen=True, slots=True)
class SignCounts:
    """Relative weights of positive (a), negative (b) and neutral (c) links."""

    a: float
    b: float
    c: float


def sign_probs_from_counts(counts: SignCounts | tuple[float, float, float]) -> tuple[float, float]:
    a, b, c = (counts.a, counts.b, counts.c) if isinstance(counts, SignCounts) else counts
    if a < 0 or b < 0 or c < 0:
        raise ConfigurationError(f"sign counts must be non-negative, got {(a, b, c)}")
    total = a + b + c
    if not total > 0:
        raise ConfigurationError("sign counts a + b + c must be positive")
    return a / total, b / total


class SignedNetwork:
    """Simple undirected graph with signed edges and a global negativity tolerance.

    Besides the adjacency dictionaries the class keeps numpy arrays of fitness,
    degree and liveness indexed by vertex id, so that attachment weights over
    the whole network are a single vectorised expression, and an indexable
    edge list so that forgetting can pick a uniform edge in O(1).
    """

    def __init__(self, H: float = 0.5, capacity: int = 64):
        if not 0.0 <= H <= 1.0:
            raise ConfigurationError(f"negativity tolerance H must lie in [0, 1], got {H}")
        self.H = float(H)
        self._attrs: dict[int, VertexAttrs] = {}
        self._adj: dict[int, dict[int, int]] = {}
        self._nbrs: dict[int, list[int]] = {}
        self._nbr_pos: dict[int, dict[int, int]] = {}
        self._neg: dict[int, int] = {}
        self._edges: list[tuple[int, int]] = []
        self._edge_pos: dict[tuple[int, int], int] = {}
        capacity = max(int(capacity), 1)
        self._fit = np.zeros(capacity, dtype=np.float64)
        self._deg = np.zeros(capacity, dtype=np.int64)
        self._alive = np.zeros(capacity, dtype=bool)
        # upper bound on any fitness ever stored; used by rejection sampling
        self.max_fitness = 0.0

    # -- queries -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._attrs)

    def __contains__(self, v: object) -> bool:
        return v in self._attrs

    @property
    def number_of_vertices(self) -> int:
        return len(self._attrs)

    @property
    def number_of_edges(self) -> int:
        return len(self._edges)

    def vertices(self) -> list[int]:
        return list(self._attrs)

    def attrs(self, v: int) -> VertexAttrs:
        return self._attrs[v]

    def fitness(self, v: int) -> float:
        return self._attrs[v].fitness

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def negative_degree(self, v: int) -> int:
        return self._neg[v]

    def neighbors(self, v: int) -> list[int]:
        return list(self._nbrs[v])

    def neighbor_signs(self, v: int) -> dict[int, int]:
        return dict(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        adj = self._adj.get(u)
        return adj is not None and v in adj

    def sign(self, u: int, v: int) -> int:
        return self._adj[u][v]

    def edges(self) -> Iterator[tuple[int, int, int]]:
        for u, v in self._edges:
            yield u, v, self._adj[u][v]

    def negative_ratio(self, v: int) -> float:
        d = len(self._adj[v])
        return self._neg[v] / d if d else 0.0

    def positive_neighbors(self, v: int) -> list[int]:
        return [u for u in self._nbrs[v] if self._adj[v][u] > 0]

    def degree_array(self) -> np.ndarray:
        """Degrees indexed by vertex id (0 for absent ids); read-only view."""
        view = self._deg.view()
        view.flags.writeable = False
        return view

    def fitness_array(self) -> np.ndarray:
        view = self._fit.view()
        view.flags.writeable = False
        return view

    def alive_array(self) -> np.ndarray:
        view = self._alive.view()
        view.flags.writeable = False
        return view

    # -- mutation ------------------------------------------------------------

    def _ensure_capacity(self, v: int) -> None:
        n = self._fit.shape[0]
        if v < n:
            return
        new = max(2 * n, v + 1)
        for name in ("_fit", "_deg", "_alive"):
            old = getattr(self, name)
            grown = np.zeros(new, dtype=old.dtype)
            grown[:n] = old
            setattr(self, name, grown)

    def add_vertex(self, v: int, attrs: VertexAttrs) -> None:
        if v < 0:
            raise ContractError(f"vertex ids must be non-negative, got {v}")
        if v in self._attrs:
            raise ContractError(f"vertex {v} already exists")
        self._ensure_capacity(v)
        self._attrs[v] = attrs
        self._adj[v] = {}
        self._nbrs[v] = []
        self._nbr_pos[v] = {}
        self._neg[v] = 0
        self._fit[v] = attrs.fitness
        self._deg[v] = 0
        self._alive[v] = True
        if attrs.fitness > self.max_fitness:
            self.max_fitness = attrs.fitness

    def add_edge(self, u: int, v: int, sign: int) -> None:
        if u == v:
            raise ContractError(f"self-loop on vertex {u}")
        if u not in self._attrs or v not in self._attrs:
            raise ContractError(f"edge ({u}, {v}) references a missing vertex")
        if v in self._adj[u]:
            raise ContractError(f"edge ({u}, {v}) already present")
        sign = int(sign)
        if sign not in (-1, 0, 1):
            raise ContractError(f"edge sign must be -1, 0 or 1, got {sign}")
        for a, b in ((u, v), (v, u)):
            self._adj[a][b] = sign
            self._nbr_pos[a][b] = len(self._nbrs[a])
            self._nbrs[a].append(b)
            self._deg[a] += 1
            if sign < 0:
                self._neg[a] += 1
        key = (u, v) if u < v else (v, u)
        self._edge_pos[key] = len(self._edges)
        self._edges.append(key)

    def _detach(self, u: int, v: int) -> None:
        sign = self._adj[u].pop(v)
        del self._adj[v][u]
        for a, b in ((u, v), (v, u)):
            pos = self._nbr_pos[a].pop(b)
            lst = self._nbrs[a]
            last = lst.pop()
            if last != b:
                lst[pos] = last
                self._nbr_pos[a][last] = pos
            self._deg[a] -= 1
            if sign < 0:
                self._neg[a] -= 1
        key = (u, v) if u < v else (v, u)
        pos = self._edge_pos.pop(key)
        last = self._edges.pop()
        if last != key:
            self._edges[pos] = last
            self._edge_pos[last] = pos

    def _drop(self, v: int) -> None:
        del self._attrs[v], self._adj[v], self._nbrs[v], self._nbr_pos[v], self._neg[v]
        self._alive[v] = False
        self._deg[v] = 0

    def remove_edge(self, u: int, v: int) -> set[int]:
        """Delete edge (u, v); endpoints left without links vanish. Returns vanished ids."""
        if not self.has_edge(u, v):
            raise ContractError(f"edge ({u}, {v}) not present")
        self._detach(u, v)
        gone = set()
        for w in (u, v):
            if not self._adj[w]:
                self._drop(w)
                gone.add(w)
        return gone

    def clear_edges(self, v: int) -> set[int]:
        """Delete every edge of ``v`` but keep ``v`` itself.

        Neighbours left with no links vanish; their ids are returned.
        """
        gone = set()
        for u in list(self._nbrs[v]):
            self._detach(v, u)
            if not self._adj[u]:
                self._drop(u)
                gone.add(u)
        return gone

    def remove_vertex(self, v: int) -> set[int]:
        """Delete ``v`` with its edges; neighbours left isolated vanish too."""
        if v not in self._attrs:
            raise ContractError(f"vertex {v} not present")
        gone = self.clear_edges(v)
        self._drop(v)
        gone.add(v)
        return gone

    def copy(self) -> "SignedNetwork":
        other = SignedNetwork.__new__(SignedNetwork)
        other.H = self.H
        other._attrs = dict(self._attrs)
        other._adj = {v: dict(d) for v, d in self._adj.items()}
        other._nbrs = {v: list(l) for v, l in self._nbrs.items()}
        other._nbr_pos = {v: dict(d) for v, d in self._nbr_pos.items()}
        other._neg = dict(self._neg)
        other._edges = list(self._edges)
        other._edge_pos = dict(self._edge_pos)
        other._fit = self._fit.copy()
        other._deg = self._deg.copy()
        other._alive = self._alive.copy()
        other.max_fitness = self.max_fitness
        return other

    def next_free_id(self) -> int:
        return max(self._attrs, default=-1) + 1

    def check_invariants(self, allow_isolated: Iterable[int] = ()) -> None:
        """Assert the structural invariants; raises ``AssertionError`` on failure.

        A lone vertex in an otherwise empty network (the seed of a growth
        process) is allowed to have degree 0.
        """
        allowed = set(allow_isolated)
        seen = set()
        for u, adj in self._adj.items():
            assert u not in adj, f"self-loop at {u}"
            assert len(adj) == len(self._nbrs[u]) == self._deg[u]
            assert set(self._nbrs[u]) == set(adj)
            assert self._neg[u] == sum(1 for s in adj.values() if s < 0)
            if not adj and len(self._attrs) > 1:
                assert u in allowed, f"isolated vertex {u} still present"
            for v, s in adj.items():
                assert self._adj[v][u] == s, f"asymmetric edge ({u}, {v})"
                seen.add((min(u, v), max(u, v)))
        assert seen == set(self._edges) and len(seen) == len(self._edges)
        assert int(self._alive.sum()) == len(self._attrs)

    # -- serialisation -------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"N {len(self._attrs)} H {self.H!r}"]
        for v in sorted(self._attrs):
            a = self._attrs[v]
            lines.append(f"V {v} {a.fitness!r} {a.g!r} {a.h!r} {a.ordinal}")
        for u, v in sorted(self._edges):
            lines.append(f"E {u} {v} {self._adj[u][v]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SignedNetwork":
        net: SignedNetwork | None = None
        declared = 0
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            try:
                if tag == "N":
                    if net is not None:
                        raise DumpFormatError(lineno, "duplicate header")
                    if len(parts) != 4 or parts[2] != "H":
                        raise DumpFormatError(lineno, "header must read 'N <count> H <tolerance>'")
                    declared = int(parts[1])
                    net = cls(H=float(parts[3]), capacity=max(declared, 1))
                elif net is None:
                    raise DumpFormatError(lineno, "missing 'N ... H ...' header")
                elif tag == "V":
                    if len(parts) != 6:
                        raise DumpFormatError(lineno, "vertex line must read 'V <id> <f> <g> <h> <ordinal>'")
                    v = int(parts[1])
                    if v in net:
                        raise DumpFormatError(lineno, f"duplicate vertex {v}")
                    attrs = VertexAttrs(float(parts[2]), float(parts[3]), float(parts[4]), int(parts[5]))
                    net.add_vertex(v, attrs)
                elif tag == "E":
                    if len(parts) != 4:
                        raise DumpFormatError(lineno, "edge line must read 'E <u> <v> <sign>'")
                    net.add_edge(int(parts[1]), int(parts[2]), int(parts[3]))
                else:
                    raise DumpFormatError(lineno, f"unknown record type {tag!r}")
            except DumpFormatError:
                raise
            except ValueError as exc:
                raise DumpFormatError(lineno, str(exc)) from None
        if net is None:
            raise DumpFormatError(0, "empty dump")
        if declared != len(net):
            raise DumpFormatError(0, f"header declares {declared} vertices, found {len(net)}")
        return net


# -- local probabilistic primitives ----------------------------------------


def _candidate_mask(net: SignedNetwork, i: int) -> np.ndarray:
    mask = net._alive.copy()
    mask[i] = False
    nbrs = net._nbrs.get(i)
    if nbrs:
        mask[nbrs] = False
    return mask


def _attachment_raw(net: SignedNetwork, mask: np.ndarray) -> np.ndarray:
    """Unnormalised weights over ids for a candidate mask (zeros elsewhere)."""
    w = net._fit * net._deg
    w[~mask] = 0.0
    if w.sum() > 0.0:
        return w
    # no usable degree among candidates: fitness-only rule, then uniform
    w = np.where(mask, net._fit, 0.0)
    if w.sum() > 0.0:
        return w
    return mask.astype(np.float64)


def attachment_weights(net: SignedNetwork, i: int) -> dict[int, float]:
    """Probability that a new edge from ``i`` lands on each candidate vertex.

    Candidates are all other vertices not yet adjacent to ``i``. Weights are
    fitness times degree; if that is zero everywhere the fitness alone is used,
    and an all-zero fitness set falls back to uniform.
    """
    if i not in net:
        raise ContractError(f"vertex {i} not present")
    mask = _candidate_mask(net, i)
    if not mask.any():
        return {}
    w = _attachment_raw(net, mask)
    idx = np.flatnonzero(mask)
    p = w[idx] / w[idx].sum()
    return {int(v): float(q) for v, q in zip(idx, p)}


def sample_attachment_targets(net: SignedNetwork, i: int, count: int, rng: random.Random) -> list[int]:
    """Draw up to ``count`` distinct targets, renormalising after each pick."""
    mask = _candidate_mask(net, i)
    picked: list[int] = []
    while len(picked) < count and mask.any():
        w = _attachment_raw(net, mask)
        cum = np.cumsum(w)
        r = rng.random() * cum[-1]
        t = int(np.searchsorted(cum, r, side="right"))
        if t >= len(w) or w[t] <= 0.0:
            # float round-off at the upper end
            t = int(np.flatnonzero(w > 0.0)[-1])
        picked.append(t)
        mask[t] = False
    return picked


def draw_sign(attrs: VertexAttrs, rng: random.Random) -> int:
    r = rng.random()
    if r < attrs.g:
        return 1
    if r < attrs.g + attrs.h:
        return -1
    return 0


def killing(net: SignedNetwork, j: int) -> bool:
    """True when the share of negative links of ``j`` strictly exceeds H."""
    d = len(net._adj[j])
    if d == 0:
        return False
    return net._neg[j] / d > net.H


def forget_edges(net: SignedNetwork, count: int, rng: random.Random, vanished: list[int] | None = None) -> int:
    """Delete ``min(count, |E|)`` uniformly chosen edges; returns how many.

    Ids of vertices that vanish as a result are appended to ``vanished``.
    """
    if count < 0:
        raise ContractError("forget count must be >= 0")
    n = min(count, len(net._edges))
    for _ in range(n):
        u, v = net._edges[rng.randrange(len(net._edges))]
        gone = net.remove_edge(u, v)
        if vanished is not None and gone:
            vanished.extend(sorted(gone))
    return n


def weighted_neighbor(net: SignedNetwork, v: int, rng: random.Random, exclude: int | None = None) -> int | None:
    """Pick a neighbour of ``v`` with probability proportional to its fitness.

    ``exclude`` is never returned. Returns None when no eligible neighbour
    exists. A zero total fitness among eligible neighbours falls back to a
    uniform pick. Uses rejection sampling against ``net.max_fitness`` and
    switches to an exact linear scan after a bounded number of rejections.
    """
    nbrs = net._nbrs[v]
    n = len(nbrs)
    eligible = n - (1 if exclude is not None and exclude in net._adj[v] else 0)
    if eligible <= 0:
        return None
    bound = net.max_fitness
    attrs = net._attrs
    if bound > 0.0:
        for _ in range(32):
            u = nbrs[int(rng.random() * n)]
            if u == exclude:
                continue
            if rng.random() * bound < attrs[u].fitness:
                return u
    cand = [u for u in nbrs if u != exclude]
    weights = [attrs[u].fitness for u in cand]
    total = math.fsum(weights)
    if total <= 0.0:
        return cand[int(rng.random() * len(cand))]
    r = rng.random() * total
    acc = 0.0
    for u, w in zip(cand, weights):
        acc += w
        if r < acc:
            return u
    return next(u for u, w in zip(reversed(cand), reversed(weights)) if w > 0.0)


def neighbor_weights(net: SignedNetwork, v: int, exclude: int | None = None) -> dict[int, float]:
    """Exact distribution sampled by ``weighted_neighbor``."""
    cand = [u for u in net._nbrs[v] if u != exclude]
    if not cand:
        return {}
    weights = [net._attrs[u].fitness for u in cand]
    total = math.fsum(weights)
    if total <= 0.0:
        return {u: 1.0 / len(cand) for u in cand}
    return {u: w / total for u, w in zip(cand, weights)}


def walk_endpoint_distribution(net: SignedNetwork, i: int) -> dict[int | None, float]:
    """Probability of each two-step walk endpoint from ``i`` (None for a dead end)."""
    out: dict[int | None, float] = {}
    for n1, p1 in neighbor_weights(net, i).items():
        second = neighbor_weights(net, n1, exclude=i)
        if not second:
            out[None] = out.get(None, 0.0) + p1
        for n2, p2 in second.items():
            out[n2] = out.get(n2, 0.0) + p1 * p2
    return out
