"""Experiment runners: timed update/query workloads, estimation quality and
all-candidate-pairs scoring.

Every runner is deterministic given its seed (timing columns excluded),
single-threaded while timing, discards one warm-up repetition and reports
both mean and median wall times measured with a monotonic clock. Results come
back as lists of plain dicts ready for CSV/JSON serialization; each row
carries a versioned schema tag.
"""

from __future__ import annotations

import time
from itertools import combinations
from statistics import mean, median, pstdev

import numpy as np

from .baselines import BssProactiveSketch, BssSketch, VanillaSketch
from .core import BufferedSketch
from .errors import EmptyRowError
from .hashing import HashFamily, new_family
from .lsh import BandingParams, LshIndex, score_acp
from .similarity import estimate_jaccard, exact_jaccard, rmse
from .streams import (
    PairGenConfig,
    QueryEvent,
    SetStore,
    _distinct_elements,
    gen_correlated_pair,
    gen_mixed_workload,
    gen_uniform_stream,
)

SKETCH_KINDS = ("bmh", "vanilla", "bss", "bss-proactive")


def _subseed(*parts) -> int:
    """Deterministic 64-bit subseed from a tuple of integers."""
    words = np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(2, dtype=np.uint32)
    return (int(words[0]) << 32) | int(words[1])


def hash_eval_ns(k: int = 256, seed: int = 0, samples: int = 1 << 16) -> float:
    """Measured cost of one hash evaluation on the vectorised path, in ns.

    This is the per-(element, function) constant that multiplies every init,
    insert and rebuild; reported for context next to timing columns.
    """
    family = new_family(k, seed)
    xs = np.random.default_rng(seed).integers(0, 1 << 32, size=samples, dtype=np.uint64)
    family.keys_many(xs[:64])  # touch tables once before timing
    t0 = time.perf_counter()
    family.keys_many(xs)
    elapsed = time.perf_counter() - t0
    return elapsed / (samples * k) * 1e9


def _timed_update_run(sketch_kind: str, ops, family: HashFamily, ell: int):
    """Replay one update stream; returns (seconds inside sketch ops, sketch)."""
    store = SetStore()
    if sketch_kind == "bmh":
        sketch = BufferedSketch(family, ell)
    elif sketch_kind == "vanilla":
        sketch = VanillaSketch(family)
    elif sketch_kind == "bss":
        sketch = BssSketch(c2=family.k, universe_bits=32, seed=_subseed(family.master_seed, 17))
    elif sketch_kind == "bss-proactive":
        sketch = BssProactiveSketch(
            c2=family.k, family=family, universe_bits=32,
            seed=_subseed(family.master_seed, 17),
        )
    else:
        raise ValueError(f"unknown sketch kind {sketch_kind!r}")
    total = 0.0
    clock = time.perf_counter
    if sketch_kind in ("bss", "bss-proactive"):
        for op in ops:
            store.apply(op)
            t0 = clock()
            sketch.update(op.element, op.op)
            total += clock() - t0
    else:
        recover = store.recovery_provider(ops[0].set_id) if ops else None
        for op in ops:
            store.apply(op)
            if op.op == 1:
                t0 = clock()
                sketch.insert(op.element)
                total += clock() - t0
            else:
                t0 = clock()
                sketch.delete(op.element, recover)
                total += clock() - t0
    return total, sketch


def fault_sweep(n: int, k: int, ells, reps: int, seed: int, universe_bits: int = 32):
    """Insert-everything-then-delete-everything stress over a buffer-size sweep.

    Streams and hash families are paired across buffer sizes (same per-rep
    seeds) so fault counts are directly comparable along the sweep.
    """
    universe = 1 << universe_bits
    rows = []
    for ell in ells:
        times, faults = [], []
        for rep in range(reps + 1):  # rep 0 is the discarded warm-up
            family = new_family(k, _subseed(seed, rep, 1))
            ops = gen_uniform_stream(n, universe, _subseed(seed, rep, 2))
            elapsed, sketch = _timed_update_run("bmh", ops, family, ell)
            if rep == 0:
                continue
            times.append(elapsed)
            faults.append(sketch.fault_count)
        rows.append({
            "schema": "fault-sweep/1",
            "ell": ell,
            "k": k,
            "n": n,
            "reps": reps,
            "mean_time_s": mean(times),
            "median_time_s": median(times),
            "mean_faults": mean(faults),
        })
    return rows


def speedup(n_values, k: int, ell: int, reps: int, seed: int, universe_bits: int = 32):
    """Vanilla-vs-buffered total update time on identical streams."""
    universe = 1 << universe_bits
    eval_ns = hash_eval_ns(k, _subseed(seed, 99))
    rows = []
    for n in n_values:
        v_times, b_times = [], []
        for rep in range(reps + 1):
            family = new_family(k, _subseed(seed, n, rep, 1))
            ops = gen_uniform_stream(n, universe, _subseed(seed, n, rep, 2))
            v_elapsed, _ = _timed_update_run("vanilla", ops, family, ell)
            b_elapsed, _ = _timed_update_run("bmh", ops, family, ell)
            if rep == 0:
                continue
            v_times.append(v_elapsed)
            b_times.append(b_elapsed)
        rows.append({
            "schema": "speedup/1",
            "n": n,
            "k": k,
            "ell": ell,
            "reps": reps,
            "vanilla_time_s": mean(v_times),
            "bmh_time_s": mean(b_times),
            "vanilla_median_s": median(v_times),
            "bmh_median_s": median(b_times),
            "speedup": mean(v_times) / mean(b_times),
            "hash_eval_ns": eval_ns,
        })
    return rows


def _mixed_run(sketch_kind: str, events, family: HashFamily, ell: int):
    """Replay a mixed update/query workload; returns (seconds, query errors)."""
    store = SetStore()
    errors = 0
    if sketch_kind == "bmh":
        sketch = BufferedSketch(family, ell)
    elif sketch_kind == "vanilla":
        sketch = VanillaSketch(family)
    elif sketch_kind == "bss":
        sketch = BssSketch(c2=family.k, universe_bits=32, seed=_subseed(family.master_seed, 17))
    else:
        sketch = BssProactiveSketch(
            c2=family.k, family=family, universe_bits=32,
            seed=_subseed(family.master_seed, 17),
        )
    counter_based = sketch_kind in ("bss", "bss-proactive")
    clock = time.perf_counter
    total = 0.0
    recover = None
    for ev in events:
        if isinstance(ev, QueryEvent):
            t0 = clock()
            try:
                sketch.signature(family) if sketch_kind == "bss" else sketch.signature()
            except EmptyRowError:
                errors += 1
            total += clock() - t0
            continue
        store.apply(ev)
        if recover is None:
            recover = store.recovery_provider(ev.set_id)
        t0 = clock()
        if counter_based:
            sketch.update(ev.element, ev.op)
        elif ev.op == 1:
            sketch.insert(ev.element)
        else:
            sketch.delete(ev.element, recover)
        total += clock() - t0
    return total, errors


def mixed(n: int, p_values, k: int, ell: int, reps: int, seed: int,
          universe_bits: int = 32, sketches=SKETCH_KINDS):
    """Total time per sketch on workloads with a varying query fraction.

    Memory is equalised across sketches by fixing the counter width c^2 = k.
    """
    universe = 1 << universe_bits
    rows = []
    for p in p_values:
        workloads = {}
        for rep in range(reps + 1):
            workloads[rep] = gen_mixed_workload(n, p, _subseed(seed, rep, 3), universe)
        for kind in sketches:
            times, errors = [], 0
            for rep in range(reps + 1):
                family = new_family(k, _subseed(seed, rep, 4))
                elapsed, errs = _mixed_run(kind, workloads[rep], family, ell)
                if rep == 0:
                    continue
                times.append(elapsed)
                errors += errs
            rows.append({
                "schema": "mixed/1",
                "p": p,
                "sketch": kind,
                "n": n,
                "k": k,
                "ell": ell,
                "reps": reps,
                "mean_time_s": mean(times),
                "median_time_s": median(times),
                "query_errors": errors,
            })
    return rows


def rmse_benchmark(j_values, pairs_per_j: int, k: int, seed: int,
                   universe_bits: int = 17, density: float = 0.05,
                   ell: int | None = None, sketches=("bmh", "vanilla", "bss")):
    """Estimation quality on correlated pairs, equal memory across sketches.

    The buffered sketch uses k functions and ell = log2(universe) buffers by
    default; the argmin-only baseline is granted k * log2(universe) functions
    and the counter sketches get c^2 = k cells per row, so all sketches spend
    the same number of memory words. Counter-sketch queries that select an
    empty row are skipped and counted in the ``errors`` column.
    """
    universe = 1 << universe_bits
    if ell is None:
        ell = universe_bits
    vanilla_k = k * universe_bits
    rows = []
    for j in j_values:
        cfg = PairGenConfig(universe_size=universe, density=density, target_j=j)
        estimates: dict = {kind: [] for kind in sketches}
        errors = {kind: 0 for kind in sketches}
        for idx in range(pairs_per_j):
            a, b = gen_correlated_pair(cfg, _subseed(seed, idx, int(j * 1000), 5))
            truth = exact_jaccard(a, b)
            fam_seed = _subseed(seed, idx, int(j * 1000), 6)
            # One family per pair, shared across sketches for a like-for-like
            # comparison (the baseline gets its own, larger family).
            family = new_family(k, fam_seed) if {"bmh", "bss"} & set(sketches) else None
            if "bmh" in sketches:
                sig_a = BufferedSketch.init(a, family, ell).signature()
                sig_b = BufferedSketch.init(b, family, ell).signature()
                estimates["bmh"].append((estimate_jaccard(sig_a, sig_b).estimate, truth))
            if "vanilla" in sketches:
                vfam = new_family(vanilla_k, _subseed(fam_seed, 1))
                sig_a = VanillaSketch.init(a, vfam).signature()
                sig_b = VanillaSketch.init(b, vfam).signature()
                estimates["vanilla"].append((estimate_jaccard(sig_a, sig_b).estimate, truth))
            if "bss" in sketches:
                bss_a = BssSketch(c2=k, universe_bits=universe_bits, seed=_subseed(fam_seed, 2))
                bss_b = BssSketch(c2=k, universe_bits=universe_bits, seed=_subseed(fam_seed, 2))
                for x in a:
                    bss_a.insert(int(x))
                for x in b:
                    bss_b.insert(int(x))
                try:
                    sig_a = bss_a.signature(family)
                    sig_b = bss_b.signature(family)
                except EmptyRowError:
                    errors["bss"] += 1
                else:
                    estimates["bss"].append((estimate_jaccard(sig_a, sig_b).estimate, truth))
        for kind in sketches:
            pairs = estimates[kind]
            diffs = [est - truth for est, truth in pairs]
            rows.append({
                "schema": "rmse/1",
                "j": j,
                "sketch": kind,
                "k": k if kind != "vanilla" else vanilla_k,
                "pairs": len(pairs),
                "rmse": rmse(pairs) if pairs else float("nan"),
                "stddev": pstdev(diffs) if diffs else float("nan"),
                "errors": errors[kind],
            })
    return rows


def build_signatures(sets: dict, k: int, ell: int, seed: int, sketch: str = "bmh",
                     universe_bits: int = 32):
    """Signature per set id, using one shared family. Returns (family, dict)."""
    family = new_family(k, seed)
    sigs = {}
    for set_id, elements in sets.items():
        elements = list(elements)
        if sketch == "bmh":
            sigs[set_id] = BufferedSketch.init(elements, family, ell).signature()
        elif sketch == "vanilla":
            sigs[set_id] = VanillaSketch.init(elements, family).signature()
        elif sketch == "bss":
            b = BssSketch(c2=k, universe_bits=universe_bits, seed=_subseed(seed, 9))
            for x in elements:
                b.insert(int(x))
            sigs[set_id] = b.signature(family)
        else:
            raise ValueError(f"unknown sketch kind {sketch!r}")
    return family, sigs


def acp_run(sets: dict, k: int, ell: int, banding: BandingParams, threshold: float,
            seed: int, sketch: str = "bmh", universe_bits: int = 32,
            negative_sample: int | None = None):
    """Index all sets, extract candidate pairs and grade them.

    With ``negative_sample=None`` the exact similarity of every pair is
    computed (full ground truth). Otherwise only returned pairs are graded
    exactly and recall is estimated from a uniform sample of non-returned
    pairs, reported together with a 95% confidence interval; this is the
    documented fallback for corpora too large for full ground truth.
    Returns (pair_rows, summary_dict).
    """
    _, sigs = build_signatures(sets, k, ell, seed, sketch, universe_bits)
    index = LshIndex(banding, seed=_subseed(seed, 11))
    for set_id, sig in sigs.items():
        index.insert(set_id, sig)
    returned = index.candidates()
    ids = sorted(sets)
    pair_rows = []
    for a, b in sorted(returned):
        est = estimate_jaccard(sigs[a], sigs[b]).estimate
        exact = exact_jaccard(sets[a], sets[b])
        pair_rows.append({
            "schema": "acp-pairs/1",
            "set_id_a": a,
            "set_id_b": b,
            "estimated_sim": est,
            "exact_sim": exact,
        })
    summary = {
        "schema": "acp-summary/1",
        "sketch": sketch,
        "k": k,
        "ell": ell,
        "b": banding.b,
        "r": banding.r,
        "threshold": threshold,
        "sets": len(ids),
        "returned_pairs": len(returned),
    }
    if negative_sample is None:
        universe_pairs = list(combinations(ids, 2))
        exact_sims = {pair: exact_jaccard(sets[pair[0]], sets[pair[1]]) for pair in universe_pairs}
        score = score_acp(returned, universe_pairs, exact_sims, threshold)
        summary.update({
            "tp": score.tp, "fp": score.fp, "fn": score.fn, "tn": score.tn,
            "precision": score.precision, "recall": score.recall, "f1": score.f1,
            "effective_pairs": score.tp + score.fn,
        })
        return pair_rows, summary
    # Sampled ground truth: exact precision, estimated recall.
    tp = sum(1 for row in pair_rows if row["exact_sim"] >= threshold)
    fp = len(pair_rows) - tp
    rng = np.random.default_rng(_subseed(seed, 13))
    returned_set = returned
    n_ids = len(ids)
    total_pairs = n_ids * (n_ids - 1) // 2
    missed_true = 0
    sampled = 0
    while sampled < negative_sample:
        i, j = rng.integers(0, n_ids, size=2)
        if i == j:
            continue
        pair = (ids[min(i, j)], ids[max(i, j)])
        if pair in returned_set:
            continue
        sampled += 1
        if exact_jaccard(sets[pair[0]], sets[pair[1]]) >= threshold:
            missed_true += 1
    frac = missed_true / sampled if sampled else 0.0
    fn_est = frac * (total_pairs - len(returned_set))
    se = (frac * (1 - frac) / sampled) ** 0.5 if sampled else 0.0
    fn_lo = max(0.0, frac - 1.96 * se) * (total_pairs - len(returned_set))
    fn_hi = (frac + 1.96 * se) * (total_pairs - len(returned_set))
    summary.update({
        "tp": tp, "fp": fp,
        "precision": tp / (tp + fp) if tp + fp else 0.0,
        "fn_estimate": fn_est,
        "recall_estimate": tp / (tp + fn_est) if tp + fn_est else 0.0,
        "recall_ci_low": tp / (tp + fn_hi) if tp + fn_hi else 0.0,
        "recall_ci_high": tp / (tp + fn_lo) if tp + fn_lo else 0.0,
        "negatives_sampled": sampled,
    })
    return pair_rows, summary


def make_planted_acp_corpus(n_sets: int, n_planted: int, seed: int,
                            universe_bits: int = 20, base_size: int = 300,
                            planted_j_range=(0.55, 0.8)):
    """Synthetic ACP corpus: background sets plus planted similar pairs.

    Background sets are disjoint-by-chance random draws (pairwise Jaccard
    near 0); each planted pair shares enough elements to land in the given
    Jaccard range. Returns (sets dict, list of planted id pairs).
    """
    rng = np.random.default_rng(seed)
    universe = 1 << universe_bits
    sets = {}
    planted = []
    next_id = 0
    for _ in range(n_planted):
        j = float(rng.uniform(*planted_j_range))
        # |A| = |B| = base_size with overlap m: J = m / (2*base_size - m).
        m = round(2 * base_size * j / (1 + j))
        union_size = 2 * base_size - m
        pool = _distinct_elements(rng, union_size, universe)
        shared = pool[:m]
        rest = pool[m:]
        a = np.concatenate([shared, rest[: base_size - m]])
        b = np.concatenate([shared, rest[base_size - m:]])
        sets[next_id] = set(int(x) for x in a)
        sets[next_id + 1] = set(int(x) for x in b)
        planted.append((next_id, next_id + 1))
        next_id += 2
    while next_id < n_sets:
        draw = _distinct_elements(rng, base_size, universe)
        sets[next_id] = set(int(x) for x in draw)
        next_id += 1
    return sets, planted
