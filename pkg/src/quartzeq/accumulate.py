"""Compensated running summation (Neumaier variant of Kahan's algorithm)."""


class NeumaierSum:
    """Running sum with error-free transformation of each addition.

    Unlike math.fsum this works incrementally, which the block-wise series
    evaluators need; the compensation term also covers addends larger than
    the running sum (Neumaier's improvement over plain Kahan).
    """

    __slots__ = ("_s", "_c")

    def __init__(self, value=0.0):
        self._s = float(value)
        self._c = 0.0

    def add(self, x):
        s = self._s + x
        if abs(self._s) >= abs(x):
            self._c += (self._s - s) + x
        else:
            self._c += (x - s) + self._s
        self._s = s

    @property
    def value(self):
        return self._s + self._c
