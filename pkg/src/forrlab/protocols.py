"""Two-party deterministic protocols as explicit rectangle partitions.

Inputs are points of ``{-1,1}^M`` encoded as integers (bit i set iff
coordinate i is -1), so the pointwise product ``x * z`` is ``x ^ z``.
A protocol is a list of rectangles ``A x B`` with a +-1 output each; the
rectangles tile ``{-1,1}^M x {-1,1}^M``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from forrlab.fourier import FourierTable
from forrlab.wht import fwht

LIFT_GUARD = 22
TABLE_GUARD = 12
RECT_CHUNK = 2048


class ProtocolError(ValueError):
    pass


@dataclass
class RectangleProtocol:
    arity: int
    alice: np.ndarray  # (R, 2^M) bool
    bob: np.ndarray  # (R, 2^M) bool
    labels: np.ndarray  # (R,) int8 in {-1, +1}
    cost: int

    def __post_init__(self):
        self.alice = np.asarray(self.alice, dtype=bool)
        self.bob = np.asarray(self.bob, dtype=bool)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        size = 2 ** self.arity
        if self.alice.shape != (self.labels.size, size) or self.bob.shape != self.alice.shape:
            raise ProtocolError("rectangle masks do not match arity / label count")
        if not np.all(np.abs(self.labels) == 1):
            raise ProtocolError("labels must be +-1")

    @property
    def n_rectangles(self) -> int:
        return int(self.labels.size)

    @property
    def min_cost(self) -> int:
        """Largest ``l`` with every rectangle side of measure at most ``2^-l``."""
        sides = np.concatenate([self.alice.sum(axis=1), self.bob.sum(axis=1)])
        if np.any(sides == 0):
            raise ProtocolError("empty rectangle side")
        return int(min(self.arity - math.ceil(math.log2(s)) for s in sides))

    def label_matrix(self) -> np.ndarray:
        """``C[x, y]`` for all input pairs; guarded at ``M <= 12``."""
        if self.arity > TABLE_GUARD:
            raise ProtocolError(f"full table guarded at M <= {TABLE_GUARD}")
        size = 2 ** self.arity
        out = np.zeros((size, size))
        for lo in range(0, self.n_rectangles, RECT_CHUNK):
            hi = lo + RECT_CHUNK
            a = self.alice[lo:hi].astype(np.float64)
            b = self.bob[lo:hi].astype(np.float64)
            out += (a.T * self.labels[lo:hi]) @ b
        return np.rint(out).astype(np.int32)

    def cover_counts(self) -> np.ndarray:
        if self.arity > TABLE_GUARD:
            raise ProtocolError(f"tiling check guarded at M <= {TABLE_GUARD}")
        size = 2 ** self.arity
        out = np.zeros((size, size))
        for lo in range(0, self.n_rectangles, RECT_CHUNK):
            hi = lo + RECT_CHUNK
            out += self.alice[lo:hi].T.astype(np.float64) @ self.bob[lo:hi].astype(np.float64)
        return np.rint(out).astype(np.int32)

    def validate(self):
        if self.n_rectangles > 2 ** self.cost:
            raise ProtocolError(f"{self.n_rectangles} rectangles exceed 2^{self.cost}")
        counts = self.cover_counts()
        if not np.all(counts == 1):
            raise ProtocolError(f"rectangles do not tile: cover counts in [{counts.min()}, {counts.max()}]")

    def __call__(self, x: int, y: int) -> int:
        hit = np.flatnonzero(self.alice[:, x] & self.bob[:, y])
        if hit.size != 1:
            raise ProtocolError(f"({x}, {y}) lies in {hit.size} rectangles")
        return int(self.labels[hit[0]])

    def to_dict(self) -> dict:
        return {
            "arity": self.arity,
            "cost": self.cost,
            "rectangles": [
                {"alice": np.flatnonzero(a).tolist(), "bob": np.flatnonzero(b).tolist(), "label": int(lab)}
                for a, b, lab in zip(self.alice, self.bob, self.labels)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RectangleProtocol":
        M = int(d["arity"])
        rects = d["rectangles"]
        alice = np.zeros((len(rects), 2 ** M), dtype=bool)
        bob = np.zeros_like(alice)
        for r, rect in enumerate(rects):
            alice[r, rect["alice"]] = True
            bob[r, rect["bob"]] = True
        return cls(M, alice, bob, [rect["label"] for rect in rects], int(d["cost"]))


def save_protocol(path, protocol: RectangleProtocol):
    Path(path).write_text(json.dumps(protocol.to_dict(), indent=1) + "\n")


def load_protocol(path) -> RectangleProtocol:
    return RectangleProtocol.from_dict(json.loads(Path(path).read_text()))


def constant_protocol(M: int, value: int = 1) -> RectangleProtocol:
    full = np.ones((1, 2 ** M), dtype=bool)
    return RectangleProtocol(M, full, full.copy(), [value], 0)


def dictator_product_protocol(M: int, i: int = 0) -> RectangleProtocol:
    """``C(x, y) = x_i * y_i``: Alice and Bob each send bit ``i``."""
    bit = ((np.arange(2 ** M) >> i) & 1).astype(bool)
    alice, bob, labels = [], [], []
    for a in (False, True):
        for b in (False, True):
            alice.append(bit == a)
            bob.append(bit == b)
            labels.append(-1 if a != b else 1)
    return RectangleProtocol(M, np.array(alice), np.array(bob), labels, 2)


def random_protocol(M: int, cost: int, rng: np.random.Generator, stop_prob: float = 0.0,
                    coordinate_split: float = 0.7) -> RectangleProtocol:
    """A random deterministic protocol tree of depth ``cost``.

    At each node a random player sends one bit: either one coordinate of their
    input or a random Boolean function of it (probability ``1 - coordinate_split``).
    """
    size = 2 ** M
    idx = np.arange(size)
    alice, bob, labels = [], [], []

    def split(S):
        if S.sum() < 2:
            return None
        if rng.random() < coordinate_split:
            for i in rng.permutation(M):
                part = S & (((idx >> i) & 1) == 0)
                if part.any() and (S & ~part).any():
                    return part
        while True:
            part = S & (rng.random(size) < 0.5)
            if part.any() and (S & ~part).any():
                return part

    def grow(A, B, depth):
        if depth < cost and not (depth > 0 and rng.random() < stop_prob):
            speaker = int(rng.integers(2))
            part = split(A if speaker == 0 else B)
            if part is None:
                speaker = 1 - speaker
                part = split(A if speaker == 0 else B)
            if part is not None:
                if speaker == 0:
                    grow(part, B, depth + 1)
                    grow(A & ~part, B, depth + 1)
                else:
                    grow(A, part, depth + 1)
                    grow(A, B & ~part, depth + 1)
                return
        alice.append(A)
        bob.append(B)
        labels.append(1 if rng.random() < 0.5 else -1)

    grow(np.ones(size, dtype=bool), np.ones(size, dtype=bool), 0)
    return RectangleProtocol(M, np.array(alice), np.array(bob), labels, cost)


def extend_protocol(C: RectangleProtocol, l: int) -> RectangleProtocol:
    """Both players first announce their last ``l`` input bits, then run ``C``.

    The new inputs have ``M + l`` coordinates; the junk bits are the high bits.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    J = 2 ** l
    size = 2 ** C.arity
    R = C.n_rectangles
    eye = np.eye(J, dtype=bool)
    # (R, a, b, j*size + x) masks: Alice side keeps A on junk block a
    alice = (eye[None, :, None, :, None] & C.alice[:, None, None, None, :])
    alice = np.broadcast_to(alice, (R, J, J, J, size)).reshape(R * J * J, J * size)
    bob = (eye[None, None, :, :, None] & C.bob[:, None, None, None, :])
    bob = np.broadcast_to(bob, (R, J, J, J, size)).reshape(R * J * J, J * size)
    labels = np.repeat(C.labels, J * J)
    return RectangleProtocol(C.arity + l, alice, bob, labels, C.cost + 2 * l)


@dataclass
class ProtocolMixture:
    """A finite distribution over deterministic protocols of equal arity."""

    members: list
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.full(len(self.members), 1.0 / len(self.members))
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if len({m.arity for m in self.members}) != 1:
            raise ProtocolError("mixture members must share arity")

    @property
    def arity(self) -> int:
        return self.members[0].arity

    @property
    def cost(self) -> int:
        return max(m.cost for m in self.members)


def as_mixture(C) -> ProtocolMixture:
    return C if isinstance(C, ProtocolMixture) else ProtocolMixture([C])


def xor_lift_value(C, z: int) -> float:
    """``H_C(z) = E_{x ~ U_M}[C(x, x * z)]`` by exhaustive averaging over ``x``."""
    mix = as_mixture(C)
    if mix.arity > LIFT_GUARD:
        raise ProtocolError(f"exhaustive lift guarded at M <= {LIFT_GUARD}")
    idx = np.arange(2 ** mix.arity)
    total = 0.0
    for w, P in zip(mix.weights, mix.members):
        hits = (P.alice & P.bob[:, idx ^ int(z)]).sum(axis=1)
        total += w * float(hits @ P.labels.astype(np.float64)) / idx.size
    return total


def xor_lift_table(C) -> np.ndarray:
    """``H_C`` at every ``z``, via the full label matrix ``C[x, x ^ z]``."""
    mix = as_mixture(C)
    idx = np.arange(2 ** mix.arity)
    xor = idx[:, None] ^ idx[None, :]
    out = np.zeros(idx.size)
    for w, P in zip(mix.weights, mix.members):
        tab = P.label_matrix()
        out += w * tab[idx[:, None], xor].mean(axis=0)
    return out


def lift_fourier_from_rectangles(C) -> FourierTable:
    """``sum_R C(R) 1_A_hat(S) 1_B_hat(S)`` for every ``S``."""
    mix = as_mixture(C)
    size = 2 ** mix.arity
    coeffs = np.zeros(size)
    for w, P in zip(mix.weights, mix.members):
        for lo in range(0, P.n_rectangles, RECT_CHUNK):
            hi = lo + RECT_CHUNK
            a_hat = fwht(P.alice[lo:hi].astype(np.float64))
            b_hat = fwht(P.bob[lo:hi].astype(np.float64))
            coeffs += w * (P.labels[lo:hi].astype(np.float64) @ (a_hat * b_hat)) / size
    return FourierTable(mix.arity, coeffs)


def junk_averaged_lift(C, l: int) -> np.ndarray:
    """``H(z) = E_{z' ~ U_l}[H_{ext^l(C)}(z, z')]`` for every ``z`` in ``{-1,1}^M``."""
    mix = as_mixture(C)
    ext = ProtocolMixture([extend_protocol(P, l) for P in mix.members], mix.weights)
    table = xor_lift_table(ext)
    return table.reshape(2 ** l, 2 ** mix.arity).mean(axis=0)


# --- restrictions -----------------------------------------------------------

def restriction_masks(v) -> tuple[int, int]:
    """``(fixed_mask, minus_mask)`` for ``v`` in ``{-1, 0, 1}^M``."""
    fixed = minus = 0
    for i, vi in enumerate(v):
        if vi not in (-1, 0, 1):
            raise ValueError(f"restriction entries must be -1, 0 or 1, got {vi}")
        if vi != 0:
            fixed |= 1 << i
        if vi == -1:
            minus |= 1 << i
    return fixed, minus


def restrict_index(idx, v):
    """``rho_v`` on encoded points: fixed coordinates are overwritten by ``v``."""
    fixed, minus = restriction_masks(v)
    return (np.asarray(idx) & ~fixed) | minus


def random_restriction(M: int, rng: np.random.Generator, p_fixed: float = 0.4) -> list[int]:
    fixed = rng.random(M) < p_fixed
    signs = rng.choice([-1, 1], size=M)
    return [int(s) if f else 0 for f, s in zip(fixed, signs)]


def _restricted_member(P: RectangleProtocol, a, v) -> RectangleProtocol:
    idx = np.arange(2 ** P.arity)
    av = [ai * vi for ai, vi in zip(a, v)]
    xa = restrict_index(idx, a)
    yb = restrict_index(idx, av)
    alice = P.alice[:, xa]
    bob = P.bob[:, yb]
    keep = alice.any(axis=1) & bob.any(axis=1)
    return RectangleProtocol(P.arity, alice[keep], bob[keep], P.labels[keep], P.cost)


def restrict_xor_protocol(C, v) -> ProtocolMixture:
    """The distribution ``C_v``: draw ``C``, draw uniform ``a_j`` on the fixed
    coordinates, then Alice overwrites bit ``j`` with ``a_j`` and Bob with
    ``a_j v_j`` before running ``C``.

    Returned exactly, as a uniform mixture over all ``a``.
    """
    mix = as_mixture(C)
    V = [j for j, vj in enumerate(v) if vj != 0]
    members, weights = [], []
    for w, P in zip(mix.weights, mix.members):
        for bits in range(2 ** len(V)):
            a = [0] * P.arity
            for t, j in enumerate(V):
                a[j] = -1 if (bits >> t) & 1 else 1
            members.append(_restricted_member(P, a, v))
            weights.append(w / 2 ** len(V))
    return ProtocolMixture(members, np.array(weights))


def sample_restricted_protocol(C: RectangleProtocol, v, rng: np.random.Generator) -> RectangleProtocol:
    """One draw from ``C_v``."""
    a = [int(rng.choice([-1, 1])) if vj != 0 else 0 for vj in v]
    return _restricted_member(C, a, v)
