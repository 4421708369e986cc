"""Counter-based random streams that can be stored inside immutable state."""
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

_KEY_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Philox stream addressed by (key, counter); advancing returns a new stream."""
    key: int
    counter: int = 0

    @classmethod
    def from_seed(cls, seed: int) -> "RngStream":
        return cls(key=int(seed) & _KEY_MASK, counter=0)

    def uniform(self, n: int) -> Tuple[Tuple[float, ...], "RngStream"]:
        """Draw n floats in [0, 1) and the advanced stream."""
        gen = np.random.Generator(np.random.Philox(key=self.key, counter=self.counter))
        values = tuple(float(v) for v in gen.random(n))
        return values, replace(self, counter=self.counter + n)
