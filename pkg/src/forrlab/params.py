from __future__ import annotations

import math
from dataclasses import dataclass, field

from forrlab.wht import is_power_of_two

#: Desk-scale gap parameter; the asymptotic choice 1/(60 k^2 ln N) makes the
#: promise gap unresolvable at any N that fits in memory.
DESK_EPSILON = 0.2


def paper_epsilon(n_dim: int, k: int) -> float:
    return 1.0 / (60 * k * k * math.log(n_dim))


@dataclass(frozen=True)
class ForrelationParams:
    """Problem size and gap: ``N`` (power of two), number of copies ``k``, ``eps``.

    ``eps=None`` selects the asymptotic value ``1/(60 k^2 ln N)``.
    """

    N: int
    k: int = 1
    eps: float | None = None
    n: int = field(init=False)

    def __post_init__(self):
        if not is_power_of_two(self.N) or self.N < 2:
            raise ValueError(f"N must be a power of two >= 2, got {self.N}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.eps is None:
            object.__setattr__(self, "eps", paper_epsilon(self.N, self.k))
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        object.__setattr__(self, "n", self.N.bit_length() - 1)

    @property
    def yes_threshold(self) -> float:
        return self.eps / 2

    @property
    def no_threshold(self) -> float:
        return self.eps / 4

    @property
    def copy_length(self) -> int:
        return 2 * self.N

    @property
    def length(self) -> int:
        return 2 * self.k * self.N

    def as_dict(self) -> dict:
        return {"N": self.N, "k": self.k, "eps": self.eps}
