"""Smoke test for the ncsphere_py extension.

Build and install first:
    pip install maturin
    pip install --no-build-isolation ./crates/python
"""

import cmath
import math

import ncsphere_py as ns

ANGLES = [["0", "1/3", "1/5"], ["-1/3", "0", "1/7"], ["-1/5", "-1/7", "0"]]


def check(label, cond):
    print(f"{'ok  ' if cond else 'FAIL'} {label}")
    if not cond:
        raise SystemExit(1)


def main():
    ctx = ns.Context(ANGLES)
    check("normal form of z2 z1", str(ctx.parse("z2 z1")) == "w(1/3) z1 z2")
    a, b = ctx.parse("z1 + 2 z2'"), ctx.parse("z3 z1'")
    check("adjoint reverses products", (a * b).adjoint() == b.adjoint() * a.adjoint())

    z = ctx.zgen(3)
    check("zgen(3) is 4x4", (z.rows, z.cols) == (4, 4))
    check("zgen(3) is sphere unitary", z.is_sphere_unitary(3))
    check("matrix json round trip", ns.Matrix.from_json(z.to_json()) == z)
    check("explicit entry", str(z.entry(1, 3)) == "w(12/35) z3")

    big = ctx.extended(5)
    r = ns.Rotation(5, ["1/5", "2/5", "3/5"])
    f = r.factor(big.zgen(3))
    check("rotation factors", f["b_exponents"][0] == 0 and len(f["a_exponents"]) == 4)
    check("class of z1 z2'", r.homogeneity_class(big.parse("z1 z2'")) == 4)
    check("projection", str(r.project(big.parse("z1 + z2"), 2)) == "z2")

    flat = ns.Context([["0", "0", "0"]] * 3)
    h = ns.Hom.kill_zn(flat)
    report = h.validate()
    check("kill_zn validates", report["valid"])
    anti = ns.Rotation.antipodal(3)
    check("kill_zn is antipodal-equivariant", h.is_equivariant(anti, ns.Rotation.antipodal(2)))
    z2 = h.codomain.zgen(2)
    check("kill_zn splits zgen", h.apply(flat.zgen(3)) == z2.direct_sum(z2.adjoint()))

    pair = ns.Context([["0", "1/3"], ["-1/3", "0"]])
    rep = ns.Rep(pair)
    check("rep dimension", rep.dim == 3)
    check("rep residual", rep.relation_residual() < 1e-12)
    t = [1 / math.sqrt(2)] * 2
    e = rep.eval(pair.sphere_polynomial(), t, [1j, -1])
    check("sphere polynomial evaluates to I", all(abs(e[i][j] - (i == j)) < 1e-12 for i in range(3) for j in range(3)))

    ce = ns.counterexample(pair, 1, 2)
    check("counterexample bound", abs(ce["bound"] - 0.5) < 1e-12)

    samples = [[[cmath.exp(3j * 2 * math.pi * i / 64)]] for i in range(64)]
    check("winding of e^{3it}", ns.winding(samples)["winding"] == 3)
    check("adaptive winding", ns.winding_of(lambda th: [[cmath.exp(-2j * th), 0], [0, 2 + cmath.exp(1j * th)]]) == -2)

    for name in ns.SUITE_NAMES:
        report = ns.run_suite(name, seed=5, trials=2)
        check(f"suite {name}", report["pass"])
    print("smoke test passed")


if __name__ == "__main__":
    main()
