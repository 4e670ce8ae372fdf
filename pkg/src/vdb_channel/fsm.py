"""Cycle-level model of the two-state channel adaptation controller.

The controller holds ``L + 1`` selection registers.  ``R_0`` drives the
modulator while idle and during protocol cycles; after a start request is
seen on a falling clock edge the counter walks ``R_1 .. R_L`` over the next
data bits and drops back to ``R_0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, TextIO

from .exceptions import ValidationError
from .i2c import BYTE, DcpProfile

S0, S1 = "s0", "s1"


@dataclass(frozen=True)
class AdaptationConfig:
    registers: tuple[int, ...]
    n_bits: int = 8

    def __post_init__(self):
        regs = tuple(int(r) for r in self.registers)
        if len(regs) < 2:
            raise ValidationError("need registers R_0..R_L with L >= 1")
        if self.n_bits < 1:
            raise ValidationError("selection width must be at least 1 bit")
        if any(not 0 <= r < 1 << self.n_bits for r in regs):
            raise ValidationError(f"register values must fit in {self.n_bits} bits")
        object.__setattr__(self, "registers", regs)

    @property
    def word_length(self) -> int:
        return len(self.registers) - 1

    @classmethod
    def from_profile(cls, profile: DcpProfile, n_bits: int = 8) -> "AdaptationConfig":
        return cls((profile.nominal,) + profile.settings, n_bits)

    def to_dict(self) -> dict:
        return {"registers": list(self.registers), "n_bits": self.n_bits}

    @classmethod
    def from_dict(cls, data: dict) -> "AdaptationConfig":
        return cls(tuple(data["registers"]), data.get("n_bits", 8))


@dataclass(frozen=True)
class FsmState:
    state: str = S0
    counter: int = 0

    def __post_init__(self):
        if self.state not in (S0, S1):
            raise ValidationError(f"unknown state {self.state!r}")
        if self.state == S0 and self.counter != 0:
            raise ValidationError("counter must be 0 in s0")
        if self.state == S1 and self.counter < 1:
            raise ValidationError("counter must be at least 1 in s1")


def step(st: FsmState, cfg: AdaptationConfig, scl_negedge: bool,
         s_start: bool) -> tuple[FsmState, int]:
    """Advance one event and return the new state with its selection ``R_i``.

    A start request only counts at a falling edge while idle; requests
    during a word are ignored.
    """
    if st.state == S1 and st.counter > cfg.word_length:
        raise ValidationError("counter exceeds word length")
    nxt = st
    if scl_negedge:
        if st.state == S0:
            if s_start:
                nxt = FsmState(S1, 1)
        elif st.counter < cfg.word_length:
            nxt = FsmState(S1, st.counter + 1)
        else:
            nxt = FsmState(S0, 0)
    return nxt, cfg.registers[nxt.counter]


@dataclass(frozen=True)
class Cycle:
    cycle: int
    scl_edge: int
    start: int
    selection: int

    def line(self) -> str:
        return f"{self.cycle} {self.scl_edge} {self.start} {self.selection}"


def run(cfg: AdaptationConfig, stimulus: Iterable[tuple[int, int]]) -> list[Cycle]:
    """Drive the machine with ``(scl_edge, start)`` pairs, one per cycle."""
    st = FsmState()
    trace = []
    for n, (edge, start) in enumerate(stimulus):
        st, sel = step(st, cfg, bool(edge), bool(start))
        trace.append(Cycle(n, int(bool(edge)), int(bool(start)), sel))
    return trace


def transaction_stimulus(cfg: AdaptationConfig, n_words: int, clock: int,
                         gap: int = 1) -> list[tuple[int, int]]:
    """One falling edge per cycle; a start request before each word.

    Each word is preceded by ``gap`` idle cycles (START/ACK) at ``R_0``;
    the start request rides on the falling edge that opens the first data bit.
    """
    if clock < 0 or n_words < 0 or gap < 1:
        raise ValidationError("clock and word count must be non-negative, gap at least 1")
    period = cfg.word_length + gap
    starts = {gap + k * period for k in range(n_words)}
    return [(1, int(c in starts)) for c in range(clock)]


def simulate_transaction(cfg: AdaptationConfig, word_stream: Sequence[int], clock: int,
                         gap: int = 1) -> list[int]:
    """Selection per bit cycle for a stream of words, truncated or padded to ``clock``.

    The selections depend only on the framing, never on the bit values, so
    the words are checked for width and otherwise only counted.
    """
    L = cfg.word_length
    for w in word_stream:
        if not 0 <= int(w) < 1 << L:
            raise ValidationError(f"word {w} does not fit in {L} bits")
    trace = run(cfg, transaction_stimulus(cfg, len(word_stream), clock, gap))
    return [c.selection for c in trace]


def word_profiles(trace: Sequence[Cycle], cfg: AdaptationConfig) -> Iterator[DcpProfile]:
    """One DcpProfile per completed word of a byte-wide trace.

    Word boundaries come from replaying the recorded edges and start
    requests; the profile holds the selections logged while counting.
    """
    if cfg.word_length != BYTE:
        raise ValidationError("DCP profiles describe 8-bit words")
    st = FsmState()
    current: list[int] = []
    for c in trace:
        st, _ = step(st, cfg, bool(c.scl_edge), bool(c.start))
        if st.state == S1:
            if st.counter == 1:
                current = []
            current.append(c.selection)
            if st.counter == BYTE:
                yield DcpProfile(tuple(current), cfg.registers[0])


def write_trace(trace: Iterable[Cycle], fh: TextIO) -> None:
    for c in trace:
        fh.write(c.line() + "\n")


def read_stimulus(fh: TextIO) -> list[tuple[int, int]]:
    """Parse ``<cycle> <scl_edge> <start> [<selection>]`` lines; ``#`` starts a comment."""
    out = []
    for lineno, raw in enumerate(fh, 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) not in (3, 4):
            raise ValidationError(f"line {lineno}: expected 3 or 4 fields")
        try:
            cycle, edge, start = (int(f) for f in fields[:3])
        except ValueError:
            raise ValidationError(f"line {lineno}: non-integer field") from None
        if cycle != len(out):
            raise ValidationError(f"line {lineno}: cycle {cycle} out of order")
        if edge not in (0, 1) or start not in (0, 1):
            raise ValidationError(f"line {lineno}: edge and start must be 0 or 1")
        out.append((edge, start))
    return out


def read_trace(fh: TextIO) -> list[Cycle]:
    cycles = []
    for lineno, raw in enumerate(fh, 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            cycles.append(Cycle(*(int(f) for f in text.split())))
        except (TypeError, ValueError):
            raise ValidationError(f"line {lineno}: expected 4 integer fields") from None
    return cycles


__all__ = ["AdaptationConfig", "Cycle", "FsmState", "S0", "S1", "read_stimulus", "read_trace",
           "run", "simulate_transaction", "step", "transaction_stimulus", "word_profiles",
           "write_trace"]
