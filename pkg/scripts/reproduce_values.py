"""Print the parameter values of the worked examples, exact where the inputs allow it.

    python3 scripts/reproduce_values.py
"""

from fractions import Fraction as Q

from qharness.conditioning import condition_on_future, glue_classify, meixner_bridge
from qharness.harness import harness_to_qh
from qharness.params import MeanLine, QHParams, VarianceForm
from qharness.scalar import Surd
from qharness.sim import binomial_prediction, dirichlet_prediction


def fmt(x):
    if isinstance(x, Surd):
        return f"{'-' if x.sign < 0 else ''}sqrt({x.square()})"
    if isinstance(x, Q):
        return str(x)
    return f"{float(x):.6g}"


def show(label, p):
    vals = ", ".join(f"{k}={fmt(v)}" for k, v in zip(("eta", "theta", "sigma", "tau", "gamma"), p.astuple()))
    print(f"{label:<34} {vals}")


def main():
    print("-- standardization")
    v, beta = Q(2), Q(3)
    sf = harness_to_qh(MeanLine(beta, 0), (v, 0, v, beta / v), VarianceForm.from_rho(0, 0, 0, 1, 0, 0))
    show("gamma with random scale v=2, b=3", sf.params)
    sf = harness_to_qh(MeanLine(), (1, 0, 1, 1), VarianceForm.from_rho(1, 0, 0, 0, 0, 0), (0, float("inf")))
    show("Wiener with drift v=1", sf.params)
    print(f"{'':<34} on {tuple(fmt(x) for x in sf.interval)}")

    print("-- conditioning on X_V = z")
    for c in (Q(1), Q(2)):
        gamma = QHParams(Q(0), 2 / Surd(1, c), Q(0), 1 / c, Q(1))
        show(f"gamma c={c}, V=1", condition_on_future(gamma, Q(1), Q(0)).params)
        show(f"  Dirichlet prediction c={c}", dirichlet_prediction(float(c), 1.0))
    for N in (1, 3):
        poisson = QHParams(Q(0), Q(1), Q(0), Q(0), Q(1))
        show(f"Poisson, V=1, z=N-V (N={N})", condition_on_future(poisson, Q(1), Q(N - 1)).params)
        show(f"  binomial prediction N={N}", binomial_prediction(N, 1.0))

    print("-- Meixner bridges")
    show("gamma bridge, slope 1", meixner_bridge(Q(2), Q(1), Q(0), Q(1, 4), Q(1)))

    print("-- gluing")
    for p in (QHParams(Q(0), Q(0), Q(0), Q(0), Q(1)), QHParams(Q(0), Q(2), Q(0), Q(1), Q(1)), QHParams(Q(1), Q(1), Q(1, 4), Q(1, 4), Q(3, 2))):
        show("glue_classify of", p)
        g = glue_classify(p)
        print(f"{'':<34} -> {g.case}" + (f" at V={fmt(g.V)}" if g.V is not None else ""))
        if g.derived_params is not None:
            show("  derived", g.derived_params)


if __name__ == "__main__":
    main()
