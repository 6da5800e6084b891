"""The buffered k-MinHash sketch for fully-dynamic streams with recovery.

Each of the k hash functions owns a buffer of at most ``ell`` (hash, element)
pairs together with a threshold pair. The buffers always hold exactly the
pairs at or below their threshold, which are therefore the smallest pairs of
the tracked set, so the signature can be read in O(k) and deletions rarely
force a rebuild.

Pairs are ordered lexicographically: (h(x), x) <= (h(y), y) iff h(x) < h(y),
or h(x) = h(y) and x < y. Internally a pair is packed into one uint64 key
(hash in the high 32 bits, element in the low 32), which makes the
lexicographic order the plain integer order. The all-ones key is the
sentinel TOP, standing for the (+inf, +inf) pair; no real pair exceeds it.
"""

from __future__ import annotations

import struct

import numpy as np

from . import _kernels
from .errors import EmptySetError, RecoveryError
from .hashing import MAX_UNIVERSE, HashFamily

#: Sentinel key for the (+inf, +inf) pair; compares >= every real pair key.
TOP = np.uint64(0xFFFFFFFFFFFFFFFF)

_SHIFT = np.uint64(32)
_LOW = np.uint64(0xFFFFFFFF)


def make_key(hash_value: int, element: int) -> int:
    """Pack a (hash, element) pair into its uint64 order key."""
    return (int(hash_value) << 32) | int(element)


def split_key(key: int) -> tuple:
    """Unpack a uint64 key back into the (hash, element) pair."""
    key = int(key)
    return key >> 32, key & 0xFFFFFFFF


def smallest(pairs, r: int):
    """The r smallest (hash, element) pairs of ``pairs``, sorted ascending.

    Returns all of ``pairs`` (sorted) when there are at most r of them.
    """
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    return sorted(pairs)[:r]


def _as_element_array(elements) -> np.ndarray:
    if isinstance(elements, np.ndarray):
        return elements.astype(np.uint64, copy=False)
    return np.asarray(list(elements), dtype=np.uint64)


class InvariantReport:
    """Result of a brute-force invariant check: truthiness plus violations."""

    __slots__ = ("ok", "violations")

    def __init__(self, violations):
        self.violations = list(violations)
        self.ok = not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return f"InvariantReport(ok={self.ok}, violations={self.violations!r})"


class Signature:
    """A length-k vector of minimum hash values.

    Carries the identity of the hash family that produced it so that
    estimators can reject comparisons across incompatible signatures.
    """

    __slots__ = ("values", "family_key")

    def __init__(self, values, family_key=None):
        self.values = np.ascontiguousarray(values, dtype=np.uint64)
        self.family_key = family_key

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Signature):
            return NotImplemented
        return (
            self.family_key == other.family_key
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"Signature(k={len(self)}, family_key={self.family_key})"


class BufferedSketch:
    """Dynamic sketch of one set: k buffers of at most ``ell`` pairs each.

    Supports insert, delete (with recovery-based rebuild on fault) and O(k)
    signature reads that exactly match a from-scratch computation. Inserting
    a present element or deleting an absent one leaves the state bit
    identical, so arbitrary non-legal streams are safe.

    Single-writer: concurrent mutation is not supported, but distinct
    sketches may share one immutable HashFamily across threads.
    """

    __slots__ = (
        "family", "ell", "_buf", "_size", "_delta",
        "fault_count", "recovery_elements_streamed",
    )

    def __init__(self, family: HashFamily, ell: int):
        if ell < 1:
            raise ValueError(f"buffer capacity ell must be >= 1, got {ell}")
        self.family = family
        self.ell = int(ell)
        self.fault_count = 0
        self.recovery_elements_streamed = 0
        self._set_empty()

    # -- construction -----------------------------------------------------

    def _set_empty(self):
        k = self.family.k
        self._buf = np.full((k, self.ell), TOP, dtype=np.uint64)
        self._size = np.zeros(k, dtype=np.int64)
        self._delta = np.full(k, TOP, dtype=np.uint64)

    @classmethod
    def init(cls, elements, family: HashFamily, ell: int) -> "BufferedSketch":
        """Build the sketch of ``elements`` from scratch.

        Duplicate elements are tolerated and deduplicated. Runs in
        O(|A| * k) time (vectorised), one hash evaluation per (element,
        function) pair.
        """
        sketch = cls(family, ell)
        sketch._rebuild(_as_element_array(elements))
        return sketch

    def _rebuild(self, xs: np.ndarray):
        """Recompute all buffers and thresholds from the element array."""
        xs = np.unique(np.ascontiguousarray(xs, dtype=np.uint64))
        if xs.size and int(xs[-1]) >= MAX_UNIVERSE:
            raise ValueError("element outside 32-bit universe")
        ell = self.ell
        self._set_empty()
        n = xs.size
        if n == 0:
            return
        keys = self.family.keys_many(xs)
        if n <= ell:
            keys.sort(axis=0)
            self._buf[:, :n] = keys.T
            self._size[:] = n
            if n == ell:
                self._delta[:] = self._buf[:, ell - 1]
        else:
            head = np.partition(keys, ell - 1, axis=0)[:ell]
            head.sort(axis=0)
            self._buf = np.ascontiguousarray(head.T)
            self._size[:] = ell
            self._delta = self._buf[:, ell - 1].copy()

    # -- stream operations -------------------------------------------------

    def insert(self, x: int) -> None:
        """Add element x. A no-op (bit-identical state) if x is tracked already."""
        if not 0 <= x < MAX_UNIVERSE:
            raise ValueError(f"element {x} outside 32-bit universe")
        if _kernels.ENABLED:
            _kernels.insert_op(self.family._packed_keys(), np.uint64(x),
                               self._buf, self._size, self._delta, self.ell)
            return
        keys = self.family.key_one(x)
        ell = self.ell
        buf, size, delta = self._buf, self._size, self._delta
        for i in np.flatnonzero(keys <= delta):
            row = buf[i]
            key = keys[i]
            pos = int(np.searchsorted(row, key))
            if pos < ell and row[pos] == key:
                continue  # pair already buffered
            s = int(size[i])
            if s == ell:
                row[pos + 1:] = row[pos:ell - 1].copy()
                row[pos] = key
                delta[i] = row[ell - 1]
            else:
                row[pos + 1:s + 1] = row[pos:s].copy()
                row[pos] = key
                size[i] = s + 1
                if s + 1 == ell:
                    delta[i] = row[ell - 1]

    def delete(self, x: int, recover) -> None:
        """Remove element x; rebuild via ``recover`` if a buffer would empty.

        ``recover`` is a zero-argument callable returning the current
        (post-deletion) elements of the tracked set, typically bound to the
        authoritative store. It is invoked at most once. If it raises, the
        error is re-raised as RecoveryError and the sketch keeps its
        pre-delete state. Deleting an absent element is a no-op.
        """
        if self._size[0] == 0:
            return  # empty set: nothing buffered anywhere
        if not 0 <= x < MAX_UNIVERSE:
            raise ValueError(f"element {x} outside 32-bit universe")
        if _kernels.ENABLED:
            fault = _kernels.delete_op(self.family._packed_keys(), np.uint64(x),
                                       self._buf, self._size, self._delta)
            if fault:
                self._recover_and_rebuild(recover)
            return
        keys = self.family.key_one(x)
        buf, size = self._buf, self._size
        hits = []
        fault = False
        for i in np.flatnonzero(keys <= self._delta):
            row = buf[i]
            pos = int(np.searchsorted(row, keys[i]))
            if pos < self.ell and row[pos] == keys[i]:
                hits.append((int(i), pos))
                if size[i] == 1:
                    fault = True
        if fault:
            self._recover_and_rebuild(recover)
            return
        for i, pos in hits:
            row = buf[i]
            s = int(size[i])
            row[pos:s - 1] = row[pos + 1:s]
            row[s - 1] = TOP
            size[i] = s - 1

    def _recover_and_rebuild(self, recover) -> None:
        # Some buffer would empty: one recovery query rebuilds everything,
        # so per-function removals are skipped (the rebuild covers them).
        try:
            recovered = _as_element_array(recover())
        except Exception as exc:
            raise RecoveryError("recovery query failed during delete") from exc
        if recovered.size:
            self.fault_count += 1
        self.recovery_elements_streamed += int(recovered.size)
        self._rebuild(recovered)

    def signature(self) -> Signature:
        """The k-MinHash signature of the tracked set, in O(k) time."""
        if self._size[0] == 0:
            raise EmptySetError("signature undefined for an empty set")
        return Signature(self._buf[:, 0] >> _SHIFT, self.family.family_key)

    # -- introspection ------------------------------------------------------

    @property
    def k(self) -> int:
        return self.family.k

    def is_empty(self) -> bool:
        return int(self._size[0]) == 0

    def total_buffered(self) -> int:
        """Number of stored pairs across all buffers (at most k * ell)."""
        return int(self._size.sum())

    def buffer_contents(self, i: int):
        """Buffer i as a sorted list of (hash, element) pairs."""
        return [split_key(key) for key in self._buf[i, : int(self._size[i])]]

    def threshold(self, i: int):
        """Threshold pair of buffer i, or None when it is the TOP sentinel."""
        d = self._delta[i]
        return None if d == TOP else split_key(d)

    def check_invariants(self, authoritative) -> InvariantReport:
        """Brute-force verification of the structural invariants.

        ``authoritative`` must be the true current contents of the tracked
        set. Checks, for every function i: membership in buffer i is
        equivalent to the pair being at or below the threshold; buffer sizes
        never exceed ell; buffers are empty exactly when the set is; and each
        buffer holds exactly its size's worth of smallest pairs. O(|A| * k),
        fully vectorised so it can run after every op of long streams.
        """
        bad = []
        xs = np.unique(_as_element_array(authoritative))
        k, ell = self.family.k, self.ell
        buf, sizes, delta = self._buf, self._size, self._delta
        if np.any(sizes > ell):
            bad.append(f"(ii) buffer larger than ell={ell}: max size {sizes.max()}")
        if xs.size == 0:
            if np.any(sizes != 0):
                bad.append("(iii) set empty but some buffer is nonempty")
            if np.any(delta != TOP):
                bad.append("(iii) set empty but some threshold is not TOP")
            return InvariantReport(bad)
        if np.any(sizes == 0):
            bad.append("(iii) set nonempty but some buffer is empty")
        s_clip = np.minimum(sizes, ell)  # guards the vector math if (ii) is violated
        in_size = np.arange(ell)[None, :] < s_clip[:, None]  # valid slots, (k, ell)
        if np.any(buf[~in_size] != TOP):
            bad.append("(internal) stale entries past a buffer's size")
        adjacent = in_size[:, 1:] & in_size[:, :-1]
        if np.any((buf[:, 1:] <= buf[:, :-1]) & adjacent):
            bad.append("(internal) some buffer is not strictly sorted")
        # Buffered pairs must be genuine pairs of the tracked set: the element
        # must be a member and the stored hash must match a fresh evaluation.
        elems = buf & _LOW
        packed = self.family._packed_keys()
        rows_idx = np.arange(k)[:, None]
        h = packed[0][(elems & np.uint64(255)).astype(np.intp), rows_idx]
        h ^= packed[1][((elems >> np.uint64(8)) & np.uint64(255)).astype(np.intp), rows_idx]
        h ^= packed[2][((elems >> np.uint64(16)) & np.uint64(255)).astype(np.intp), rows_idx]
        h ^= packed[3][((elems >> np.uint64(24)) & np.uint64(255)).astype(np.intp), rows_idx]
        genuine = np.isin(elems, xs) & (h == (buf & ~_LOW))
        if np.any(in_size & ~genuine):
            bad.append("(i) some buffer stores a pair that is not a pair of the tracked set")
        # Exactly the set pairs at or below the threshold are buffered.
        keys = self.family.keys_many(xs)  # (n, k)
        below = (keys <= delta[None, :]).sum(axis=0)
        if np.any(below != sizes):
            worst = int(np.flatnonzero(below != sizes)[0])
            bad.append(
                f"(i) buffer {worst} holds {int(sizes[worst])} pairs but "
                f"{int(below[worst])} set pairs are <= its threshold"
            )
        last_idx = np.maximum(s_clip - 1, 0)[:, None]
        last = np.take_along_axis(buf, last_idx, axis=1)[:, 0]
        if np.any((last > delta) & (s_clip > 0)):
            bad.append("(i) some buffer stores a pair above its threshold")
        return InvariantReport(bad)

    # -- serialization ------------------------------------------------------

    MAGIC = b"BMH1"

    def to_bytes(self) -> bytes:
        """Versioned little-endian checkpoint of parameters and buffers.

        Layout: magic, k, ell, master seed, then per function the threshold,
        the pair count and the sorted pair keys. Stats counters are not part
        of the checkpoint.
        """
        out = [self.MAGIC, struct.pack("<IIQ", self.family.k, self.ell, self.family.master_seed)]
        for i in range(self.family.k):
            s = int(self._size[i])
            out.append(struct.pack("<QI", int(self._delta[i]), s))
            out.append(self._buf[i, :s].astype("<u8").tobytes())
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes, family: HashFamily | None = None) -> "BufferedSketch":
        """Restore a checkpoint; rebuilds the family from the stored seed.

        Pass ``family`` to share an existing family object; it must match
        the stored (k, seed). Stats counters restart at zero.
        """
        if data[:4] != cls.MAGIC:
            raise ValueError("bad magic: not a buffered-sketch checkpoint")
        k, ell, seed = struct.unpack_from("<IIQ", data, 4)
        if family is None:
            family = HashFamily(k, seed)
        elif family.k != k or family.master_seed != seed:
            raise ValueError("supplied family does not match the checkpoint")
        sketch = cls(family, ell)
        off = 4 + 16
        for i in range(k):
            delta, s = struct.unpack_from("<QI", data, off)
            off += 12
            if s > ell:
                raise ValueError("corrupt checkpoint: buffer larger than ell")
            row = np.frombuffer(data, dtype="<u8", count=s, offset=off)
            off += 8 * s
            sketch._buf[i, :s] = row
            sketch._size[i] = s
            sketch._delta[i] = np.uint64(delta)
        if off != len(data):
            raise ValueError("corrupt checkpoint: trailing bytes")
        return sketch

    def state_equal(self, other: "BufferedSketch") -> bool:
        """Bit-identical comparison of parameters, buffers and thresholds."""
        return (
            self.family.family_key == other.family.family_key
            and self.ell == other.ell
            and np.array_equal(self._size, other._size)
            and np.array_equal(self._delta, other._delta)
            and np.array_equal(self._buf, other._buf)
        )
