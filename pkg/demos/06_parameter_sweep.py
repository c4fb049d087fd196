"""Map a small corner of (n, theta, p) space and print the regime table.

Each lattice point gets simulated, classified (Bounded / Growing /
BlowUpSuspected / Inconclusive), and compared against the side of the
critical exponent it sits on.  Artifacts land in a scratch directory:
one JSON per point, a manifest, regime_map.csv, and timings.json.
Re-running with the same directory resumes instead of recomputing;
parallel workers do not change a byte of the output.

Run:  python3 demos/06_parameter_sweep.py [out_dir]
"""

import sys
import tempfile
from pathlib import Path

from fluxks import SweepSpec, regime_map_summary, run_sweep


def main() -> None:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="sweep-"))
    spec = SweepSpec(
        n_values=(1, 2),
        theta_values=(1.5, 2.0),
        p_values=(0.6, 0.9),
        t_end=5.0,
        cells_1d=128,
        cells_2d=64,
        record_every=5,
    )

    result = run_sweep(spec, out, parallelism=2)
    print(f"ran {result.n_run} points, skipped {result.n_skipped}, out = {out}")
    print()
    print(regime_map_summary(result.results))
    print()

    # second call with the same directory: everything is resumed
    again = run_sweep(spec, out, parallelism=2)
    print(f"re-run: ran {again.n_run}, skipped {again.n_skipped} (all resumed)")
    print()
    print("artifacts:")
    for f in sorted(out.iterdir()):
        print(f"  {f.name}  ({f.stat().st_size} bytes)")


if __name__ == "__main__":
    main()
