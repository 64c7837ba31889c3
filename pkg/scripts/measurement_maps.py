"""Single-qubit projective measurements on four-qubit states.

For each input state and measured qubit, counts the grid measurements whose
three-qubit output lands in the target family, broken down by class label.
"""
import collections

from xygme import measure, states

CASES = [
    ("cluster4", "ghz", (0,)),
    ("singlet4", "w_wt", (0, 1, 2, 3)),
    ("chi4", "w_ghzt", (0,)),
]


def main():
    for name, family, qubits in CASES:
        s = states.named(name)
        for q in qubits:
            res = measure.search_mapping(s, q, family, input_name=name)
            counts = collections.Counter(r.class_label for r in res)
            detail = ", ".join(f"{k} {v}" for k, v in sorted(counts.items()))
            print(f"{name} qubit {q} -> {family}: {len(res)} hits ({detail})")
            if res:
                best = max(res, key=lambda r: r.probability)
                coeffs = {k: round(abs(v), 4) for k, v in best.coefficients.items() if abs(v) > 1e-6}
                print(f"    most likely: p={best.probability:.4f} v={tuple(round(x, 4) for x in best.measurement.v_params)}"
                      f" outcome={best.measurement.outcome} |coeffs|={coeffs}")


if __name__ == "__main__":
    main()
