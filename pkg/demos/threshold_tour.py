"""A guided tour of the certification thresholds.

The filter's one tunable quantity is the threshold epsilon(delta, b): the
largest forward error a b-bit rounded evaluation of the delta-dimensional
determinant scheme can commit.  If the rounded value clears the threshold,
its sign is the true sign; otherwise the instance is handed to exact
arithmetic.  This script

  1. rebuilds the 2-d threshold by hand from the two calculus rules,
  2. prints the packaged threshold tables at 53 and 24 bits,
  3. shows one instance crossing from Uncertain to Certified as the
     working precision grows.

Run it directly; it finishes in well under a second.
"""

from detfilter.dyadic import Dyadic
from detfilter.error_model import (
    PrecisionConfig,
    RoundedBound,
    analyze,
    det_expansion_scheme,
    rb_add,
    rb_mul,
    threshold_table,
)
from detfilter.predicates import (
    GridPoint,
    PredicateKind,
    certify,
    eval_rounded,
    PredicateInstance,
    threshold_for,
)

BAR = "-" * 72


def hand_derivation(bits: int) -> None:
    """The 2-d determinant, one rule application at a time.

    Inputs are exact values of magnitude at most 1: the pair P{1, 0}.
    A rounded product multiplies magnitudes, cross-multiplies error
    terms, and adds half an ulp of the result magnitude.  A rounded sum
    adds both components and again charges half an ulp -- on the *capped*
    magnitude when a tighter cap (here Hadamard, 2) is supplied.
    """
    cfg = PrecisionConfig(bits)
    coordinate = RoundedBound(Dyadic(1), Dyadic(0))

    product = rb_mul(coordinate, coordinate, cfg)
    print(f"  x*y            -> P{{{product.M}, {product.m}}}")

    difference = rb_add(product, product, cfg, cap=2)
    print(f"  x*y - z*w      -> P{{{difference.M}, {difference.m}}}")

    packaged = analyze(det_expansion_scheme(2), cfg)
    assert packaged.m == difference.m and packaged.M == difference.M
    print(f"  packaged DAG   -> P{{{packaged.M}, {packaged.m}}}   (identical)")
    print(f"  threshold      =  {difference.m} = {float(difference.m):.3e}")


def print_tables() -> None:
    for bits in (53, 24):
        print(f"\n  thresholds at b = {bits}")
        print("  dim  coefficient        threshold")
        for row in threshold_table(range(2, 7), PrecisionConfig(bits)):
            coeff = row.epsilon_coefficient.as_int()
            print(f"  {row.dimension:>3}  {coeff:>8} * 2^-{bits}"
                  f"   {float(row.epsilon):.6e}")


def crossing_demo() -> None:
    """A nearly-degenerate pair of grid points across three precisions.

    The exact determinant below is 382 * 2^-18 ~ 1.46e-3: small enough to
    sit under the 10-bit threshold (Uncertain), large enough for 16 bits
    to certify it.
    """
    a = GridPoint((511, 256), 10)
    b = GridPoint((258, 130), 10)   # index det: 511*130 - 256*258 = 382
    inst = PredicateInstance(PredicateKind.WHICHSIDE, (a, b))
    print("  bits   rounded value   threshold      verdict")
    for bits in (10, 16, 53):
        cfg = PrecisionConfig(bits)
        value = eval_rounded(inst, cfg)
        threshold = threshold_for(inst.kind, inst.delta, cfg)
        verdict = certify(value, threshold)
        label = verdict.sign.name if verdict.certified else "UNCERTAIN"
        print(f"  {bits:>4}   {value:>13.6e}   {float(threshold):.6e}"
              f"   {label}")


if __name__ == "__main__":
    print(BAR)
    print("1. deriving epsilon(2, b) by hand at b = 8")
    print(BAR)
    hand_derivation(8)

    print()
    print(BAR)
    print("2. packaged threshold tables")
    print(BAR)
    print_tables()

    print()
    print(BAR)
    print("3. an instance crossing the certification boundary")
    print(BAR)
    crossing_demo()
