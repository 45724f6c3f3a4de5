"""Rate-1/2 convolutional code, block interleaver, hard-decision Viterbi.

The code is the constraint-length-3 pair g0 = 1 + D + D^2, g1 = 1 + D^2
(octal 7, 5), encoded with two zero tail bits so every block starts and
ends in the zero state.  Decoding uses the Hamming metric with
traceback from the zero state; metric ties prefer the smaller state
index so decisions are deterministic.

The interleaver is a row-column block transform over the whole
codeword: bits are written into a ``depth``-row grid column by column
and read out row by row, so bits adjacent in the channel sit ``depth``
apart at the encoder.  A short channel burst then deinterleaves to
near-isolated errors, which is what lets the code correct it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvCodeSpec",
    "InterleaverSpec",
    "conv_encode",
    "interleave",
    "deinterleave",
    "viterbi_decode",
    "viterbi_decode_batch",
]


@dataclass(frozen=True)
class ConvCodeSpec:
    """Generator polynomials as binary masks over [1, D, D^2]; rate 1/2."""

    g0: int = 0o7  # 1 + D + D^2
    g1: int = 0o5  # 1 + D^2

    def __post_init__(self) -> None:
        if not (0 < self.g0 < 8 and 0 < self.g1 < 8):
            raise ValueError("generators must be 3-tap masks (1..7)")

    @property
    def n_tail_bits(self) -> int:
        return 2  # flush the two memory elements back to the zero state

    @property
    def n_states(self) -> int:
        return 4


def _delayed(u: np.ndarray, lag: int) -> np.ndarray:
    out = np.zeros_like(u)
    if lag < u.shape[-1]:
        out[..., lag:] = u[..., :-lag] if lag else u
    return out


def conv_encode(bits: np.ndarray, spec: ConvCodeSpec = ConvCodeSpec()) -> np.ndarray:
    """Encode one block (or a batch, last axis = time); output interleaves c0, c1.

    Output length is 2 * (len(bits) + 2): two zero tail bits terminate
    the register.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    tail_shape = bits.shape[:-1] + (2,)
    u = np.concatenate([bits, np.zeros(tail_shape, dtype=np.uint8)], axis=-1)
    taps = [u, _delayed(u, 1), _delayed(u, 2)]
    c0 = np.zeros_like(u)
    c1 = np.zeros_like(u)
    for power, tap in enumerate(taps):
        if spec.g0 & (4 >> power):
            c0 ^= tap
        if spec.g1 & (4 >> power):
            c1 ^= tap
    out = np.empty(u.shape[:-1] + (2 * u.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = c0
    out[..., 1::2] = c1
    return out


@dataclass(frozen=True)
class InterleaverSpec:
    """Separation the transform guarantees between channel-adjacent bits.

    An n-bit word fills a ``depth``-row grid column by column and is
    sent row by row, so bits next to each other on the channel come
    from encoder positions ``depth`` apart (up to row-boundary edges).
    A channel burst of b errors deinterleaves to runs of at most
    ceil(b * depth / n) adjacent errors, each run a full ``depth``
    away from the next.
    """

    depth: int = 20

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")

    def permutation(self, n: int) -> np.ndarray:
        """Read order over an n-bit word: output k takes input permutation[k].

        Grid cells past the word length are skipped, so the result is a
        bijection on [0, n) for every n.
        """
        if n < 1:
            raise ValueError(f"word must hold at least one bit, got {n}")
        n_cols = -(-n // self.depth)
        grid = np.arange(self.depth * n_cols).reshape(n_cols, self.depth)
        order = grid.T.ravel()
        return order[order < n]


def interleave(bits: np.ndarray, spec: InterleaverSpec = InterleaverSpec()) -> np.ndarray:
    """Permute the last axis into row-read order (batches broadcast)."""
    bits = np.asarray(bits)
    return bits[..., spec.permutation(bits.shape[-1])]


def deinterleave(bits: np.ndarray, spec: InterleaverSpec = InterleaverSpec()) -> np.ndarray:
    """Inverse of :func:`interleave`."""
    bits = np.asarray(bits)
    return bits[..., np.argsort(spec.permutation(bits.shape[-1]))]


def _trellis(spec: ConvCodeSpec) -> tuple[np.ndarray, np.ndarray]:
    """next_state[s, u] and the (c0, c1) branch labels out_bits[s, u, :].

    State s = 2 * u[t-1] + u[t-2].
    """
    next_state = np.zeros((4, 2), dtype=np.intp)
    out_bits = np.zeros((4, 2, 2), dtype=np.uint8)
    for s in range(4):
        s1, s2 = s >> 1, s & 1
        for u in range(2):
            reg = (u, s1, s2)
            c0 = c1 = 0
            for power, bit in enumerate(reg):
                if spec.g0 & (4 >> power):
                    c0 ^= bit
                if spec.g1 & (4 >> power):
                    c1 ^= bit
            next_state[s, u] = 2 * u + s1
            out_bits[s, u] = (c0, c1)
    return next_state, out_bits


def viterbi_decode(coded: np.ndarray, spec: ConvCodeSpec = ConvCodeSpec()) -> np.ndarray:
    """Decode one hard-decision codeword; returns the information bits.

    The two tail-bit steps are consumed by traceback and not returned.
    """
    return viterbi_decode_batch(np.asarray(coded)[None, :], spec)[0]


def viterbi_decode_batch(coded: np.ndarray, spec: ConvCodeSpec = ConvCodeSpec()) -> np.ndarray:
    """Vectorized Viterbi over a [batch, 2 * n_steps] array of hard bits."""
    coded = np.asarray(coded, dtype=np.uint8)
    if coded.ndim != 2 or coded.shape[1] % 2 != 0:
        raise ValueError("coded input must be [batch, even number of bits]")
    batch, n_steps = coded.shape[0], coded.shape[1] // 2
    if n_steps < spec.n_tail_bits:
        raise ValueError(f"need at least {spec.n_tail_bits} coded steps, got {n_steps}")

    next_state, out_bits = _trellis(spec)
    # Branch Hamming distances for received pair (r0, r1): [4 states, 2 inputs].
    received = coded.reshape(batch, n_steps, 2)

    big = np.iinfo(np.int32).max // 2
    metric = np.full((batch, 4), big, dtype=np.int32)
    metric[:, 0] = 0  # encoder starts in the zero state
    prev_input = np.zeros((n_steps, batch, 4), dtype=np.uint8)
    prev_state = np.zeros((n_steps, batch, 4), dtype=np.uint8)

    # Incoming transitions per destination state, predecessor-ascending so the
    # first candidate wins ties (smaller state index).
    incoming = [[] for _ in range(4)]
    for s in range(4):
        for u in range(2):
            incoming[next_state[s, u]].append((s, u))
    in_state = np.array([[sc for sc, _ in incoming[d]] for d in range(4)])  # [4, 2]
    in_input = np.array([[uc for _, uc in incoming[d]] for d in range(4)])
    in_labels = out_bits[in_state, in_input]  # [4 dest, 2 cand, 2 bits]

    for t in range(n_steps):
        r = received[:, t, :]  # [batch, 2]
        # dist[batch, dest, cand]
        dist = (r[:, None, None, :] != in_labels[None, :, :, :]).sum(axis=3)
        cand_metric = metric[:, in_state] + dist  # [batch, 4, 2]
        pick = np.argmin(cand_metric, axis=2)  # first minimum = smaller state
        take = pick[..., None]
        metric = np.take_along_axis(cand_metric, take, axis=2)[..., 0]
        prev_state[t] = np.take_along_axis(
            np.broadcast_to(in_state, (batch, 4, 2)), take, axis=2)[..., 0]
        prev_input[t] = np.take_along_axis(
            np.broadcast_to(in_input, (batch, 4, 2)), take, axis=2)[..., 0]

    # Zero-tail termination: trace back from state 0.
    state = np.zeros(batch, dtype=np.intp)
    rows = np.arange(batch)
    decided = np.empty((batch, n_steps), dtype=np.uint8)
    for t in range(n_steps - 1, -1, -1):
        decided[:, t] = prev_input[t, rows, state]
        state = prev_state[t, rows, state].astype(np.intp)
    return decided[:, : n_steps - spec.n_tail_bits]
