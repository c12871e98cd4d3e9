"""Cost of the symbolic identity check as m grows: rewrites and wall time."""

import time

from autonorm import words


def main():
    print(f"{'m':>5} {'rewrites':>9} {'rewrites/m^2':>13} {'seconds':>9}")
    for m in (1, 2, 4, 8, 16, 32, 64, 128, 256):
        start = time.perf_counter()
        ok, trace = words.verify_identity(m)
        split = words.verify_commutator_split(m)
        elapsed = time.perf_counter() - start
        assert ok and split
        print(f"{m:>5} {len(trace):>9} {len(trace) / m**2:>13.3f} {elapsed:>9.4f}")


if __name__ == "__main__":
    main()
