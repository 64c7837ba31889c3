"""Genuine negativity of every catalog state and every preparation recipe."""
import time

from xygme import circuits, gme, states
from xygme.qstate import local_phase_match


def main():
    print(f"{'state':<16}{'E':>10}{'seconds':>10}")
    for name in states.CATALOG:
        t0 = time.perf_counter()
        e = gme.genuine_negativity(states.named(name)).value
        print(f"{name:<16}{e:>10.6f}{time.perf_counter() - t0:>10.2f}")
    print()
    print(f"{'recipe':<16}{'E':>10}{'fidelity':>12}{'probability':>13}")
    for name in circuits.RECIPES:
        res = circuits.recipe(name)
        fid, _ = local_phase_match(states.named(circuits.RECIPE_TARGETS[name]), res.final)
        e = gme.genuine_negativity(res.final).value
        print(f"{name:<16}{e:>10.6f}{fid:>12.6f}{res.success_probability:>13.6f}")


if __name__ == "__main__":
    main()
