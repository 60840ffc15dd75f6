import math


def iterated_log(r: int, x: float|int) -> float:
    """
    log^(r) x, base 2, with log^(0) x = x.  Arbitrary size integers are fine.
    Raises ValueError as soon as an intermediate argument is not positive.
    """
    if r < 0:
        raise ValueError(f"iteration count must be nonnegative: r={r}")
    v = x
    for step in range(r):
        if v <= 0:
            raise ValueError(f"log^({step + 1}) of {x} is undefined: argument {v} at step {step + 1}")
        v = math.log2(v)
    return float(v)


def iterated_exp(r: int, x: float) -> float:
    """exp^(r) x with exp(y) = 2^y; inf once the tower overflows a float"""
    if r < 0:
        raise ValueError(f"iteration count must be nonnegative: r={r}")
    v = float(x)
    for _ in range(r):
        if v > 1024:
            return math.inf
        v = 2.0 ** v
    return v


def log_star(x: float|int) -> int:
    """Smallest r with log^(r) x < 2"""
    if x <= 0:
        raise ValueError(f"log* needs a positive argument: {x}")
    r = 0
    v = x
    while v >= 2:
        v = math.log2(v)
        r += 1
    return r
