"""Contraction graph: super-nodes of known-equivalent instances plus separations.

Super-nodes are union-find roots (union by size, path compression).
Separation edges are stored in one of two ways:

* sparse mode: as a clique cover. Every call that separates a set of
  super-nodes records one *token* listing them; two roots are separated
  iff their token lists intersect. A teacher batch of ``l`` instances thus
  costs ``O(l)`` memory instead of ``O(l**2)`` edges, and merging two roots
  just concatenates their token lists.
* dense mode: once at most ``dense_limit`` super-nodes remain, the cover is
  expanded into a bitset adjacency matrix over node slots, after which
  ``is_clique`` is a counter comparison.

A token's members are pairwise separated, so they can never merge: the
number of distinct roots in a token is fixed at creation.

All hot loops are numba kernels operating on the arrays held by
:class:`ContractionGraph`.
"""

from __future__ import annotations

from collections import namedtuple

import numpy as np
from numba import njit

from .errors import ConfigError, ConsistencyViolation

DEFAULT_DENSE_LIMIT = 16384
MAX_HINTED_DENSE = 32768
# With a class-count hint, go dense at this many nodes per class, but never
# below HINT_DENSE_MIN (sparse token lists grow long when l is small) and
# never above dense_limit.
HINT_DENSE_FACTOR = 8
HINT_DENSE_MIN = 4096

# Indices into the int64 scalar-state vector shared with the kernels.
S_NODES = 0
S_FRESH = 1  # live roots with no separation token (sparse mode only)
S_NTOK = 2
S_NENT = 3
S_MAXD = 4
S_REMOVED = 5
S_SEP = 6  # separation-edge count (dense mode only)
S_TGEN = 7
S_DENSE = 8
S_NSLOT = 9
S_BAD_U = 10
S_BAD_V = 11
S_RGEN = 12
S_HINT = 13
_NSTATE = 16

OK = 0
ERR_CONTRACT_SEPARATED = 1
ERR_SEPARATE_SAME = 2
ERR_REMOVED = 3

_KIND = {
    ERR_CONTRACT_SEPARATED: "contract-separated",
    ERR_SEPARATE_SAME: "separate-same-node",
    ERR_REMOVED: "removed-node",
}

Arrays = namedtuple(
    "Arrays",
    [
        "st", "parent", "size", "active", "nodes", "node_pos",
        "ntok", "head", "tail",
        "e_tok", "e_inst", "e_next", "tok_start", "tstamp", "towner",
        "rmark", "rgroup",
        "slot", "slot_root", "adj", "deg",
    ],
)


# ---------------------------------------------------------------- kernels


@njit(cache=True, nogil=True, inline="always")
def _has(adj, i, j):
    return (adj[i, j >> 6] >> (j & 63)) & 1 == 1


@njit(cache=True, nogil=True, inline="always")
def _link(adj, i, j):
    adj[i, j >> 6] |= np.int64(1) << (j & 63)
    adj[j, i >> 6] |= np.int64(1) << (i & 63)


@njit(cache=True, nogil=True, inline="always")
def _unlink(adj, i, j):
    adj[i, j >> 6] &= ~(np.int64(1) << (j & 63))
    adj[j, i >> 6] &= ~(np.int64(1) << (i & 63))


@njit(cache=True, nogil=True)
def _find(parent, x):
    x = np.int64(x)
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def _find_all(parent):
    out = np.empty(parent.size, np.int64)
    for i in range(parent.size):
        out[i] = _find(parent, i)
    return out


@njit(cache=True, nogil=True)
def _find_many(parent, xs):
    out = np.empty(xs.size, np.int64)
    for i in range(xs.size):
        out[i] = _find(parent, xs[i])
    return out


@njit(cache=True, nogil=True)
def _drop_node(a, r):
    st = a.st
    last = st[S_NODES] - 1
    p = a.node_pos[r]
    moved = a.nodes[last]
    a.nodes[p] = moved
    a.node_pos[moved] = p
    a.node_pos[r] = -1
    st[S_NODES] = last
    a.active[r] = False


@njit(cache=True, nogil=True)
def _sep_sparse(a, x, y):
    """Roots x, y share a token. Returns the shared token or -1."""
    if a.ntok[x] == 0 or a.ntok[y] == 0:
        return -1
    if a.ntok[x] > a.ntok[y]:
        x, y = y, x
    a.st[S_TGEN] += 1
    gen = a.st[S_TGEN]
    e = a.head[x]
    while e != -1:
        a.tstamp[a.e_tok[e]] = gen
        e = a.e_next[e]
    e = a.head[y]
    while e != -1:
        if a.tstamp[a.e_tok[e]] == gen:
            return a.e_tok[e]
        e = a.e_next[e]
    return -1


@njit(cache=True, nogil=True)
def _separated_roots(a, x, y):
    if x == y:
        return False
    if a.st[S_DENSE] == 1:
        return _has(a.adj, a.slot[x], a.slot[y])
    return _sep_sparse(a, x, y) != -1


@njit(cache=True, nogil=True)
def _merge(a, x, y):
    """Merge distinct, unseparated live roots; returns the survivor."""
    st = a.st
    if a.size[x] < a.size[y]:
        x, y = y, x
    a.parent[y] = x
    a.size[x] += a.size[y]
    if st[S_DENSE] == 1:
        sx = a.slot[x]
        sy = a.slot[y]
        adj = a.adj
        for w in range(adj.shape[1]):
            word = adj[sy, w]
            if word == 0:
                continue
            for b in range(64):
                if (word >> b) & 1 == 1:
                    j = w * 64 + b
                    _unlink(adj, sy, j)
                    if _has(adj, sx, j):
                        a.deg[j] -= 1
                        st[S_SEP] -= 1
                    else:
                        _link(adj, sx, j)
                        a.deg[sx] += 1
        a.deg[sy] = 0
        a.slot[y] = -1
        a.slot_root[sy] = -1
    else:
        fx = a.ntok[x] == 0
        fy = a.ntok[y] == 0
        if a.head[y] != -1:
            if a.head[x] == -1:
                a.head[x] = a.head[y]
            else:
                a.e_next[a.tail[x]] = a.head[y]
            a.tail[x] = a.tail[y]
        a.ntok[x] += a.ntok[y]
        a.head[y] = -1
        a.tail[y] = -1
        a.ntok[y] = 0
        st[S_FRESH] += (1 if a.ntok[x] == 0 else 0) - (1 if fx else 0) - (1 if fy else 0)
    _drop_node(a, y)
    return x


@njit(cache=True, nogil=True)
def _add_clique(a, roots, d):
    """Record that roots[0:d] (distinct live roots) are pairwise separated."""
    st = a.st
    if d < 2:
        return
    if st[S_DENSE] == 1:
        # Row-at-a-time keeps writes local; the matrix stays symmetric because
        # both (i, j) and (j, i) are visited.
        adj = a.adj
        added = 0
        for i in range(d):
            si = a.slot[roots[i]]
            for j in range(d):
                sj = a.slot[roots[j]]
                w = sj >> 6
                bit = np.int64(1) << (sj & 63)
                if j != i and adj[si, w] & bit == 0:
                    adj[si, w] |= bit
                    a.deg[si] += 1
                    added += 1
        st[S_SEP] += added // 2
        return
    t = st[S_NTOK]
    e = st[S_NENT]
    a.tok_start[t] = e
    for i in range(d):
        r = roots[i]
        a.e_tok[e] = t
        a.e_inst[e] = r
        a.e_next[e] = -1
        if a.tail[r] == -1:
            a.head[r] = e
        else:
            a.e_next[a.tail[r]] = e
        a.tail[r] = e
        if a.ntok[r] == 0:
            st[S_FRESH] -= 1
        a.ntok[r] += 1
        e += 1
    a.tok_start[t + 1] = e
    st[S_NENT] = e
    st[S_NTOK] = t + 1
    if d > st[S_MAXD]:
        st[S_MAXD] = d


@njit(cache=True, nogil=True)
def _apply_batch(a, insts, names, check_separated):
    """Contract equal-named instances and separate differently named ones.

    All consistency checks run before any mutation, so a violation leaves
    the graph untouched. Returns an error code; the offending instance pair
    is written to st[S_BAD_U], st[S_BAD_V].
    """
    st = a.st
    k = insts.size
    roots = np.empty(k, np.int64)
    for i in range(k):
        r = _find(a.parent, insts[i])
        if not a.active[r]:
            st[S_BAD_U] = insts[i]
            st[S_BAD_V] = insts[i]
            return ERR_REMOVED
        roots[i] = r
    order = np.argsort(names, kind="mergesort")
    # group g covers order[gstart[g]:gstart[g+1]]
    gstart = np.empty(k + 1, np.int64)
    ng = 0
    for idx in range(k):
        if idx == 0 or names[order[idx]] != names[order[idx - 1]]:
            gstart[ng] = idx
            ng += 1
    gstart[ng] = k

    # A root may belong to one name group only.
    st[S_RGEN] += 1
    rgen = st[S_RGEN]
    for g in range(ng):
        for idx in range(gstart[g], gstart[g + 1]):
            i = order[idx]
            r = roots[i]
            if a.rmark[r] == rgen:
                if a.rgroup[r] != g:
                    for jdx in range(k):
                        j = order[jdx]
                        if roots[j] == r and names[j] != names[i]:
                            st[S_BAD_U] = insts[j]
                            break
                    st[S_BAD_V] = insts[i]
                    return ERR_SEPARATE_SAME
            else:
                a.rmark[r] = rgen
                a.rgroup[r] = g

    # Distinct roots within a name group must not be separated.
    dense = st[S_DENSE] == 1
    seen = np.empty(k, np.int64)  # first instance index of each distinct root
    for g in range(ng if check_separated else 0):
        s0 = gstart[g]
        s1 = gstart[g + 1]
        if s1 - s0 < 2:
            continue
        st[S_RGEN] += 1
        rgen = st[S_RGEN]
        tgen = 0
        if not dense:
            st[S_TGEN] += 1
            tgen = st[S_TGEN]
        nseen = 0
        for idx in range(s0, s1):
            i = order[idx]
            r = roots[i]
            if a.rmark[r] == rgen:
                continue
            a.rmark[r] = rgen
            if dense:
                sr = a.slot[r]
                for q in range(nseen):
                    j = seen[q]
                    if _has(a.adj, sr, a.slot[roots[j]]):
                        st[S_BAD_U] = insts[j]
                        st[S_BAD_V] = insts[i]
                        return ERR_CONTRACT_SEPARATED
                seen[nseen] = i
                nseen += 1
            else:
                e = a.head[r]
                while e != -1:
                    t = a.e_tok[e]
                    if a.tstamp[t] == tgen:
                        st[S_BAD_U] = a.towner[t]
                        st[S_BAD_V] = insts[i]
                        return ERR_CONTRACT_SEPARATED
                    e = a.e_next[e]
                e = a.head[r]
                while e != -1:
                    t = a.e_tok[e]
                    a.tstamp[t] = tgen
                    a.towner[t] = insts[i]
                    e = a.e_next[e]

    # Mutation phase.
    groots = np.empty(ng, np.int64)
    for g in range(ng):
        cur = roots[order[gstart[g]]]
        for idx in range(gstart[g] + 1, gstart[g + 1]):
            r = _find(a.parent, roots[order[idx]])
            cur = _find(a.parent, cur)
            if r != cur:
                cur = _merge(a, cur, r)
        groots[g] = _find(a.parent, cur)
    _add_clique(a, groots, ng)
    return OK


@njit(cache=True, nogil=True)
def _remove(a, r):
    st = a.st
    if st[S_DENSE] == 1:
        sr = a.slot[r]
        adj = a.adj
        for w in range(adj.shape[1]):
            word = adj[sr, w]
            if word == 0:
                continue
            for b in range(64):
                if (word >> b) & 1 == 1:
                    j = w * 64 + b
                    _unlink(adj, sr, j)
                    a.deg[j] -= 1
                    st[S_SEP] -= 1
        a.deg[sr] = 0
        a.slot_root[sr] = -1
        a.slot[r] = -1
    elif a.ntok[r] == 0:
        st[S_FRESH] -= 1
    st[S_REMOVED] = 1
    _drop_node(a, r)


@njit(cache=True, nogil=True)
def _materialize(a):
    """Expand the token cover into the dense adjacency matrix."""
    st = a.st
    nn = st[S_NODES]
    for idx in range(nn):
        r = a.nodes[idx]
        a.slot[r] = idx
        a.slot_root[idx] = r
    st[S_NSLOT] = nn
    st[S_SEP] = 0
    st[S_DENSE] = 1
    buf = np.empty(max(st[S_MAXD], 1), np.int64)
    for t in range(st[S_NTOK]):
        d = 0
        for e in range(a.tok_start[t], a.tok_start[t + 1]):
            r = _find(a.parent, a.e_inst[e])
            if a.active[r]:
                buf[d] = r
                d += 1
        _add_clique(a, buf, d)


@njit(cache=True, nogil=True)
def _is_clique(a):
    st = a.st
    nn = st[S_NODES]
    if nn <= 1:
        return True
    if st[S_DENSE] == 1:
        return st[S_SEP] == nn * (nn - 1) // 2
    if st[S_FRESH] > 0:
        return False
    # Separated roots lie in distinct classes, so a clique has at most
    # as many nodes as there are classes.
    if st[S_HINT] > 0 and nn > st[S_HINT]:
        return False
    if st[S_REMOVED] == 0 and st[S_MAXD] >= nn:
        return True
    for i in range(nn):
        for j in range(i + 1, nn):
            if _sep_sparse(a, a.nodes[i], a.nodes[j]) == -1:
                return False
    return True


@njit(cache=True, nogil=True)
def _batch_is_clique(a, roots):
    k = roots.size
    dense = a.st[S_DENSE] == 1
    for i in range(k):
        if not dense and a.ntok[roots[i]] == 0:
            return False
    for i in range(k):
        for j in range(i + 1, k):
            x = roots[i]
            y = roots[j]
            if x == y:
                return False
            if dense:
                if not _has(a.adj, a.slot[x], a.slot[y]):
                    return False
            elif _sep_sparse(a, x, y) == -1:
                return False
    return True


@njit(cache=True, nogil=True)
def _dense_candidates(a):
    """Live roots whose degree is below node_count - 1."""
    st = a.st
    nn = st[S_NODES]
    out = np.empty(nn, np.int64)
    m = 0
    for idx in range(nn):
        r = a.nodes[idx]
        if a.deg[a.slot[r]] < nn - 1:
            out[m] = r
            m += 1
    return out[:m]


@njit(cache=True, nogil=True)
def _unseparated_partners(a, x):
    nn = a.st[S_NODES]
    out = np.empty(nn, np.int64)
    m = 0
    for idx in range(nn):
        r = a.nodes[idx]
        if r != x and not _separated_roots(a, x, r):
            out[m] = r
            m += 1
    return out[:m]


@njit(cache=True, nogil=True)
def _fresh_roots(a):
    nn = a.st[S_NODES]
    out = np.empty(nn, np.int64)
    m = 0
    for idx in range(nn):
        r = a.nodes[idx]
        if a.ntok[r] == 0:
            out[m] = r
            m += 1
    return out[:m]


@njit(cache=True, nogil=True)
def _neighbors(a, x):
    """Live roots separated from root x."""
    st = a.st
    nn = st[S_NODES]
    out = np.empty(nn, np.int64)
    m = 0
    if st[S_DENSE] == 1:
        sx = a.slot[x]
        for idx in range(nn):
            r = a.nodes[idx]
            if _has(a.adj, sx, a.slot[r]):
                out[m] = r
                m += 1
        return out[:m]
    st[S_RGEN] += 1
    rgen = st[S_RGEN]
    e = a.head[x]
    while e != -1:
        t = a.e_tok[e]
        for f in range(a.tok_start[t], a.tok_start[t + 1]):
            r = _find(a.parent, a.e_inst[f])
            if r != x and a.active[r] and a.rmark[r] != rgen:
                a.rmark[r] = rgen
                out[m] = r
                m += 1
        e = a.e_next[e]
    return out[:m]


@njit(cache=True, nogil=True)
def _sparse_sep_count(a):
    nn = a.st[S_NODES]
    total = 0
    for idx in range(nn):
        total += _neighbors(a, a.nodes[idx]).size
    return total // 2


# ---------------------------------------------------------------- wrapper


class ContractionGraph:
    """Partition of ``n`` instances into super-nodes with separation edges.

    ``max_classes`` (optional) tells the graph how many classes exist. Under
    consistent teachers no clique can have more nodes than that, which lets
    :meth:`is_clique` answer in O(1) while the graph is large.
    """

    def __init__(self, n: int, *, max_classes: int | None = None, dense_limit: int = DEFAULT_DENSE_LIMIT):
        if n < 1:
            raise ConfigError(f"graph needs at least one instance, got n={n}")
        self.n = int(n)
        self.dense_limit = int(dense_limit)
        # A clique has at most max_classes nodes; going dense by then keeps
        # is_clique O(1) when c exceeds dense_limit.
        if max_classes is None:
            self._densify_at = self.dense_limit
        else:
            c = int(max_classes)
            scaled = min(self.dense_limit, max(HINT_DENSE_MIN, HINT_DENSE_FACTOR * c))
            self._densify_at = max(scaled, min(c, MAX_HINTED_DENSE))
        st = np.zeros(_NSTATE, np.int64)
        st[S_NODES] = n
        st[S_FRESH] = n
        st[S_HINT] = 0 if max_classes is None else int(max_classes)
        ar = np.arange(n, dtype=np.int64)
        dense_now = n <= self._densify_at
        k = n if dense_now else self._densify_at
        self._a = Arrays(
            st=st,
            parent=ar.copy(),
            size=np.ones(n, np.int64),
            active=np.ones(n, np.bool_),
            nodes=ar.copy(),
            node_pos=ar.copy(),
            ntok=np.zeros(n, np.int64),
            head=np.full(n, -1, np.int64),
            tail=np.full(n, -1, np.int64),
            e_tok=np.empty(0 if dense_now else 1024, np.int32),
            e_inst=np.empty(0 if dense_now else 1024, np.int32),
            e_next=np.empty(0 if dense_now else 1024, np.int32),
            tok_start=np.zeros(1 if dense_now else 257, np.int64),
            tstamp=np.zeros(0 if dense_now else 256, np.int64),
            towner=np.zeros(0 if dense_now else 256, np.int64),
            rmark=np.zeros(n, np.int64),
            rgroup=np.zeros(n, np.int64),
            slot=np.full(n, -1, np.int64),
            slot_root=np.full(k, -1, np.int64),
            adj=np.zeros((k, (k + 63) // 64), np.int64),
            deg=np.zeros(k, np.int64),
        )
        if dense_now:
            _materialize(self._a)

    # -- capacity management

    def _reserve(self, entries: int) -> None:
        a = self._a
        if a.st[S_DENSE] == 1:
            return
        need_e = int(a.st[S_NENT]) + entries
        need_t = int(a.st[S_NTOK]) + 1
        repl = {}
        if need_e > a.e_tok.size:
            cap = max(need_e, 2 * a.e_tok.size)
            for name in ("e_tok", "e_inst", "e_next"):
                old = getattr(a, name)
                new = np.empty(cap, np.int32)
                new[: old.size] = old
                repl[name] = new
        if need_t > a.tstamp.size:
            cap = max(need_t, 2 * a.tstamp.size)
            for name in ("tstamp", "towner"):
                old = getattr(a, name)
                new = np.zeros(cap, np.int64)
                new[: old.size] = old
                repl[name] = new
            ts = np.zeros(cap + 1, np.int64)
            ts[: a.tok_start.size] = a.tok_start
            repl["tok_start"] = ts
        if repl:
            self._a = a._replace(**repl)

    def _maybe_densify(self) -> None:
        a = self._a
        if a.st[S_DENSE] == 0 and a.st[S_NODES] <= self._densify_at:
            _materialize(a)
            empty = np.empty(0, np.int64)
            e32 = np.empty(0, np.int32)
            self._a = a._replace(e_tok=e32, e_inst=e32, e_next=e32, tstamp=empty, towner=empty)

    def _raise(self, code: int) -> None:
        u, v = int(self._a.st[S_BAD_U]), int(self._a.st[S_BAD_V])
        if code == ERR_CONTRACT_SEPARATED:
            msg = f"instances {u} and {v} were named alike but are known to differ"
        elif code == ERR_SEPARATE_SAME:
            msg = f"instances {u} and {v} were named differently but are known to be equivalent"
        else:
            msg = f"instance {u} belongs to a super-node that was removed"
        raise ConsistencyViolation(msg, pair=(u, v), kind=_KIND[code])

    def _check_id(self, u: int) -> int:
        u = int(u)
        if not 0 <= u < self.n:
            raise IndexError(f"instance id {u} out of range [0, {self.n})")
        return u

    # -- queries

    @property
    def node_count(self) -> int:
        return int(self._a.st[S_NODES])

    @property
    def sep_count(self) -> int:
        a = self._a
        if a.st[S_DENSE] == 1:
            return int(a.st[S_SEP])
        return int(_sparse_sep_count(a))

    @property
    def dense(self) -> bool:
        return bool(self._a.st[S_DENSE])

    def find(self, u: int) -> int:
        return int(_find(self._a.parent, self._check_id(u)))

    def find_many(self, us) -> np.ndarray:
        us = np.asarray(us, dtype=np.int64)
        if us.size and (us.min() < 0 or us.max() >= self.n):
            raise IndexError("instance id out of range")
        return _find_many(self._a.parent, us)

    def roots(self, positions: np.ndarray | None = None) -> np.ndarray:
        """Live super-node roots, or those at the given positions of the node list."""
        nodes = self._a.nodes[: self.node_count]
        return nodes.copy() if positions is None else nodes[positions]

    def is_active(self, u: int) -> bool:
        return bool(self._a.active[self.find(u)])

    def separated(self, u: int, v: int) -> bool:
        a = self._a
        x, y = self.find(u), self.find(v)
        if not (a.active[x] and a.active[y]):
            return False
        return bool(_separated_roots(a, x, y))

    def neighbors(self, u: int) -> set[int]:
        """Roots of the super-nodes known to differ from ``u``'s super-node."""
        x = self.find(u)
        if not self._a.active[x]:
            return set()
        return set(int(r) for r in _neighbors(self._a, x))

    def is_clique(self) -> bool:
        return bool(_is_clique(self._a))

    def batch_is_clique(self, roots: np.ndarray) -> bool:
        """True iff the given live roots are pairwise separated."""
        return bool(_batch_is_clique(self._a, np.asarray(roots, dtype=np.int64)))

    def find_unseparated_pair(self, rng: np.random.Generator) -> tuple[int, int] | None:
        """A random pair of distinct live roots with no separation edge.

        Returns ``None`` iff the graph is a clique.
        """
        a = self._a
        if self.node_count < 2:
            return None
        if a.st[S_DENSE] == 1:
            cands = _dense_candidates(a)
            if cands.size == 0:
                return None
            x = int(cands[rng.integers(cands.size)])
            partners = _unseparated_partners(a, x)
            y = int(partners[rng.integers(partners.size)])
            return (min(x, y), max(x, y))
        fresh = _fresh_roots(a)
        if fresh.size:
            x = int(fresh[rng.integers(fresh.size)])
            others = self.roots()
            others = others[others != x]
            y = int(others[rng.integers(others.size)])
            return (min(x, y), max(x, y))
        for x in self.roots()[rng.permutation(self.node_count)]:
            partners = _unseparated_partners(a, int(x))
            if partners.size:
                y = int(partners[rng.integers(partners.size)])
                return (min(int(x), y), max(int(x), y))
        return None

    def components(self) -> list[list[int]]:
        """All super-nodes (removed ones included) as sorted member lists."""
        roots = _find_all(self._a.parent)
        order = np.argsort(roots, kind="stable")
        sorted_roots = roots[order]
        cuts = np.flatnonzero(np.diff(sorted_roots)) + 1
        parts = [p.tolist() for p in np.split(order, cuts)]
        parts.sort(key=lambda p: p[0])
        return parts

    def root_array(self) -> np.ndarray:
        """Root of every instance, fully path-compressed."""
        return _find_all(self._a.parent)

    def dense_labels(self) -> np.ndarray:
        """Label each instance by its super-node, numbered by smallest member."""
        roots = _find_all(self._a.parent)
        _, first, inv = np.unique(roots, return_index=True, return_inverse=True)
        rank = np.empty(first.size, np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        return rank[inv]

    # -- mutations

    def apply_batch(self, instances, names, *, trusted: bool = False) -> None:
        """Apply one teacher's answers: equal names contract, unequal names separate.

        ``names`` must be integers aligned with ``instances``. ``trusted``
        skips the test that equal-named nodes are not already known to
        differ; its cost grows with the separation history, and answers from
        a simulated teacher cannot fail it. Otherwise raises
        :class:`ConsistencyViolation` without modifying the graph if the
        answers contradict what is already known.
        """
        insts = np.asarray(instances, dtype=np.int64)
        nm = np.asarray(names, dtype=np.int64)
        if insts.shape != nm.shape or insts.ndim != 1:
            raise ValueError("instances and names must be aligned 1-d arrays")
        if insts.size == 0:
            return
        if insts.min() < 0 or insts.max() >= self.n:
            raise IndexError("instance id out of range")
        self._reserve(insts.size)
        code = _apply_batch(self._a, insts, nm, not trusted)
        if code != OK:
            self._raise(code)
        self._maybe_densify()

    def contract(self, u: int, v: int) -> None:
        """Merge the super-nodes of ``u`` and ``v``; no-op if already merged."""
        u, v = self._check_id(u), self._check_id(v)
        self.apply_batch([u, v], [0, 0])

    def separate(self, u: int, v: int) -> None:
        """Record that ``u`` and ``v`` belong to different classes (idempotent)."""
        u, v = self._check_id(u), self._check_id(v)
        self.apply_batch([u, v], [0, 1])

    def remove(self, u: int) -> None:
        """Take ``u``'s super-node out of the node set (its labels are final)."""
        x = self.find(u)
        if not self._a.active[x]:
            raise ConsistencyViolation(f"instance {u} already removed", pair=(u, u), kind=_KIND[ERR_REMOVED])
        _remove(self._a, x)
        self._maybe_densify()


def new_graph(n: int, **kwargs) -> ContractionGraph:
    return ContractionGraph(n, **kwargs)
