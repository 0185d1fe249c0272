"""Central finite differences (step 1e-3) of random analytic expressions, in 40-digit arithmetic.

Each derivative is also stored exactly (mpmath.diff at 40 digits). Expressions whose step-1e-3
differences carry a truncation error above 1e-6 of the largest derivative are redrawn, so the
finite-difference column is itself accurate to the tolerance it is tested at.

Writes finite_differences.json, read by tests/jet_properties.rs. Expressions are S-expressions
over x0, x1, x2; every reciprocal, root and logarithm is applied to an argument bounded away from 0.
"""

import itertools
import json
import random
from pathlib import Path

import mpmath as mp

mp.mp.dps = 40
STEP = mp.mpf("1e-3")
N_VARS = 3
ORDER = 4


def leaf(rng):
    if rng.random() < 0.7:
        return f"x{rng.randrange(N_VARS)}"
    return f"{rng.uniform(-1.5, 1.5):.3f}"


def positive(rng, depth):
    c = rng.uniform(1.5, 2.5)
    return f"(+ {c:.3f} (* 0.4 (sin {expr(rng, depth - 1)})))"


def expr(rng, depth):
    if depth == 0:
        return leaf(rng)
    kind = rng.choice(["+", "-", "*", "*", "exp", "sin", "cos", "recip", "sqrt", "ln", "pow"])
    if kind in "+-*":
        return f"({kind} {expr(rng, depth - 1)} {expr(rng, depth - 1)})"
    if kind == "exp":
        return f"(exp (* 0.5 {expr(rng, depth - 1)}))"
    if kind in ("sin", "cos"):
        return f"({kind} {expr(rng, depth - 1)})"
    if kind == "pow":
        return f"(pow {positive(rng, depth)} {rng.uniform(-2.0, 2.0):.3f})"
    return f"({kind} {positive(rng, depth)})"


def parse(tokens):
    tok = tokens.pop(0)
    if tok == "(":
        op = tokens.pop(0)
        args = []
        while tokens[0] != ")":
            args.append(parse(tokens))
        tokens.pop(0)
        return (op, args)
    return tok


def evaluate(tree, x):
    if isinstance(tree, str):
        if tree.startswith("x"):
            return x[int(tree[1:])]
        return mp.mpf(tree)
    op, args = tree
    if op == "pow":
        return evaluate(args[0], x) ** mp.mpf(args[1])
    v = [evaluate(a, x) for a in args]
    return {
        "+": lambda: v[0] + v[1],
        "-": lambda: v[0] - v[1],
        "*": lambda: v[0] * v[1],
        "exp": lambda: mp.exp(v[0]),
        "sin": lambda: mp.sin(v[0]),
        "cos": lambda: mp.cos(v[0]),
        "recip": lambda: 1 / v[0],
        "sqrt": lambda: mp.sqrt(v[0]),
        "ln": lambda: mp.log(v[0]),
    }[op]()


def central_difference(tree, x0, alpha):
    stencils = []
    for m in alpha:
        stencils.append([((-1) ** k * mp.binomial(m, k), mp.mpf(m) / 2 - k) for k in range(m + 1)])
    total = mp.mpf(0)
    for combo in itertools.product(*stencils):
        w = mp.mpf(1)
        x = list(x0)
        for i, (c, s) in enumerate(combo):
            w *= c
            x[i] += s * STEP
        total += w * evaluate(tree, x)
    return total / STEP ** sum(alpha)


def graded_indices():
    out = []
    for deg in range(ORDER + 1):
        out.extend(a for a in itertools.product(range(deg + 1), repeat=N_VARS) if sum(a) == deg)
    return out


def main():
    rng = random.Random(20261019)
    cases = []
    while len(cases) < 50:
        text = expr(rng, rng.randint(2, 4))
        # skip expressions that barely depend on the variables
        if len({v for v in range(N_VARS) if f"x{v}" in text}) < 2:
            continue
        tree = parse(text.replace("(", " ( ").replace(")", " ) ").split())
        x0 = [mp.mpf(f"{rng.uniform(-0.5, 0.5):.3f}") for _ in range(N_VARS)]
        f = lambda *x: evaluate(tree, list(x))
        derivs = [
            {
                "alpha": list(a),
                "value": float(central_difference(tree, x0, a)),
                "exact": float(mp.diff(f, x0, a)),
            }
            for a in graded_indices()
        ]
        scale = max(abs(d["exact"]) for d in derivs)
        if max(abs(d["exact"]) for d in derivs[1:]) < 0.1:
            continue
        if max(abs(d["value"] - d["exact"]) for d in derivs) > 1e-6 * scale:
            continue
        cases.append({"expr": text, "x0": [float(v) for v in x0], "derivatives": derivs})
    out = Path(__file__).with_suffix(".json")
    out.write_text(json.dumps({"step": 1e-3, "order": ORDER, "cases": cases}, indent=1) + "\n")


if __name__ == "__main__":
    main()
