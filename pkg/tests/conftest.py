"""Shared helpers for the randomized expression corpus."""
import math

from kfield import expr
from kfield.errors import DomainError

CORPUS_FUNCS = ("sin", "cos", "tan", "atan", "exp", "log", "sqrt", "tanh")
CORPUS_VARS = ("q", "p", "r")


def random_expr(rng, depth):
    if depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.5:
            return expr.const(round(rng.uniform(-3, 3), 3))
        return expr.var(rng.choice(CORPUS_VARS))
    roll = rng.random()
    if roll < 0.2:
        return expr.unary(rng.choice(CORPUS_FUNCS), random_expr(rng, depth - 1))
    if roll < 0.3:
        return expr.neg(random_expr(rng, depth - 1))
    kind = rng.choice(("add", "sub", "mul", "div", "pow"))
    a = random_expr(rng, depth - 1)
    if kind == "pow":
        # keep exponents tame so values stay in range
        b = expr.const(rng.choice((2.0, 3.0, 0.5, -1.0)))
    else:
        b = random_expr(rng, depth - 1)
    return expr.binary(kind, a, b)


def good_point(e, d, rng, step=1e-4):
    """Random assignment where e, its derivative and the stencil stay finite."""
    for _ in range(200):
        env = {v: rng.uniform(0.2, 2.0) for v in CORPUS_VARS}
        try:
            y0 = expr.evaluate(e, env)
            y1 = expr.evaluate(d, env)
        except DomainError:
            continue
        if math.isfinite(y0) and math.isfinite(y1) and abs(y1) < 1e6:
            try:
                for dh in (-step, -step / 2, step / 2, step):
                    env2 = dict(env)
                    env2["q"] = env["q"] + dh
                    expr.evaluate(e, env2)
            except DomainError:
                continue
            return env
    return None


def richardson(e, env, name, h):
    """Central difference with one Richardson extrapolation step."""

    def central(step):
        lo, hi = dict(env), dict(env)
        lo[name] -= step
        hi[name] += step
        return (expr.evaluate(e, hi) - expr.evaluate(e, lo)) / (2 * step)

    d1 = central(h)
    d2 = central(h / 2)
    return (4 * d2 - d1) / 3
