"""How the buffer size trades faults against per-op work.

Stress: insert n random elements, then delete all of them. Every delete that
empties some buffer forces a recovery query and a full rebuild, so we want
buffers big enough that rebuilds are rare, but not so big that each update
drags. The sweet spot sits near log2(n).
"""

import math

from dynminhash import bench

n, k = 1 << 12, 100
print(f"stress: {n} inserts + {n} deletes, k={k} hash functions, 10 reps\n")

rows = bench.fault_sweep(n=n, k=k, ells=[2, 4, 8, 16, 32, 64, 128], reps=10, seed=7)

print(f"{'ell':>5} {'mean faults':>12} {'mean time':>12}")
for row in rows:
    bar = "#" * max(1, round(math.log2(1 + row["mean_faults"]) * 4))
    print(f"{row['ell']:>5} {row['mean_faults']:>12.2f} {row['mean_time_s'] * 1e3:>10.1f}ms  {bar}")

best = min(rows, key=lambda r: r["mean_time_s"])
print(f"\nfault counts decay fast in ell; wall time bottoms out near ell={best['ell']}")
print(f"(log2(n) = {int(math.log2(n))}; bigger buffers stop paying once faults are rare)")

# The argmin-only baseline is the ell=1 degenerate case: every deleted
# minimum forces a rebuild. Same streams, head-to-head:
speed = bench.speedup([n], k=256, ell=32, reps=3, seed=7)[0]
print(
    f"\nvs argmin-only baseline at k=256: {speed['vanilla_time_s'] * 1e3:.0f}ms "
    f"-> {speed['bmh_time_s'] * 1e3:.0f}ms per run ({speed['speedup']:.0f}x faster)"
)
