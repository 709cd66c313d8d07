"""Turing machines, letter-to-letter transducers and input arithmetic."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

MOVES = ("L", "S", "R")
BLANK = "_"


class MachineError(ValueError):
    pass


class IncrementOverflow(ArithmeticError):
    pass


@dataclass(frozen=True)
class TuringMachine:
    states: tuple[str, ...]
    initial: str
    halting: frozenset[str]
    alphabet: tuple[str, ...]
    blank: str
    transitions: Mapping[tuple[str, str], tuple[str, str, str]]
    name: str = ""

    def __post_init__(self):
        st = set(self.states)
        if self.initial not in st:
            raise MachineError(f"initial state {self.initial!r} is not a state")
        if not self.halting <= st:
            raise MachineError("halting states must be states")
        if self.initial in self.halting:
            raise MachineError("the initial state may not be halting")
        if self.blank not in self.alphabet:
            raise MachineError("blank must belong to the alphabet")
        if len(set(self.alphabet)) != len(self.alphabet) or len(st) != len(self.states):
            raise MachineError("duplicate states or letters")
        for (s, a), (s2, a2, mv) in self.transitions.items():
            if s in self.halting:
                raise MachineError(f"transition out of halting state {s!r}")
            if s not in st or s2 not in st or a not in self.alphabet or a2 not in self.alphabet:
                raise MachineError(f"transition {(s, a)} uses unknown symbols")
            if mv not in MOVES:
                raise MachineError(f"bad move {mv!r}")

    @classmethod
    def build(cls, rules: Iterable[tuple[str, str, str, str, str]], initial: str = "s0",
              halting: Iterable[str] = ("h",), alphabet: Iterable[str] = (BLANK, "1"),
              blank: str = BLANK, name: str = "") -> "TuringMachine":
        """Build from (state, letter, new_state, new_letter, move) rows."""
        rules = list(rules)
        halting = tuple(halting)
        states = [initial]
        for s, _, s2, _, _ in rules:
            for x in (s, s2):
                if x not in states:
                    states.append(x)
        for h in halting:
            if h not in states:
                states.append(h)
        trans = {}
        for s, a, s2, a2, mv in rules:
            if (s, a) in trans:
                raise MachineError(f"two transitions for {(s, a)}")
            trans[(s, a)] = (s2, a2, mv)
        return cls(tuple(states), initial, frozenset(halting), tuple(alphabet), blank, trans, name)


@dataclass
class RunTrace:
    configurations: list[tuple[tuple[str, ...], int, str]]
    halted: bool
    time: int
    space: int
    reason: str = ""


def run_tm(machine: TuringMachine, word: str | Iterable[str], max_time: int, max_space: int) -> RunTrace:
    """Simulate on a one-sided tape of max_space cells, head starting on cell 0.

    `time` counts transitions taken. Hitting a bound, leaving the window or
    reaching a state/letter pair without a transition all stop the run with
    halted=False; `reason` says which.
    """
    if max_time < 0 or max_space < 1:
        raise MachineError("bounds must be positive")
    word = list(word)
    for a in word:
        if a not in machine.alphabet or a == machine.blank:
            raise MachineError(f"input letter {a!r} not in the input alphabet")
    tape = word[:] or [machine.blank]
    head, state, time = 0, machine.initial, 0
    reach = max(len(word), 1)
    configs = [(tuple(tape), head, state)]
    if len(word) > max_space:
        return RunTrace(configs, False, 0, len(word), "space")
    while state not in machine.halting:
        if time >= max_time:
            return RunTrace(configs, False, time, reach, "time")
        step = machine.transitions.get((state, tape[head]))
        if step is None:
            return RunTrace(configs, False, time, reach, "stuck")
        state, tape[head], mv = step
        time += 1
        head += {"L": -1, "S": 0, "R": 1}[mv]
        if head < 0 or head >= max_space:
            return RunTrace(configs, False, time, reach, "space")
        if head == len(tape):
            tape.append(machine.blank)
        reach = max(reach, head + 1)
        configs.append((tuple(tape), head, state))
    return RunTrace(configs, True, time, reach, "halt")


def validate_trace(machine: TuringMachine, trace: RunTrace) -> bool:
    """Each consecutive pair of configurations is one transition apart."""
    for (t0, h0, s0), (t1, h1, s1) in zip(trace.configurations, trace.configurations[1:]):
        a = t0[h0]
        step = machine.transitions.get((s0, a))
        if step is None:
            return False
        s2, a2, mv = step
        want = list(t0)
        want[h0] = a2
        nh = h0 + {"L": -1, "S": 0, "R": 1}[mv]
        if nh == len(want):
            want.append(machine.blank)
        if (tuple(want), nh, s2) != (t1, h1, s1):
            return False
    return True


# ----- transducers


@dataclass(frozen=True)
class Transducer:
    states: tuple[str, ...]
    initial: frozenset[str]
    accepting: frozenset[str]
    rules: tuple[tuple[str, str, str, str], ...]
    name: str = ""

    @property
    def alphabet(self) -> tuple[str, ...]:
        return tuple(sorted({r[1] for r in self.rules} | {r[2] for r in self.rules}))


def increment_transducer() -> Transducer:
    """Reads most significant bit first, guesses the last 0, flips it and clears the 1s after."""
    return Transducer(
        ("q0", "q1"),
        frozenset({"q0"}),
        frozenset({"q1"}),
        (("q0", "0", "0", "q0"), ("q0", "1", "1", "q0"),
         ("q0", "0", "1", "q1"), ("q1", "1", "0", "q1")),
        "increment",
    )


def identity_transducer(alphabet=("0", "1")) -> Transducer:
    return Transducer(("c",), frozenset({"c"}), frozenset({"c"}),
                      tuple(("c", a, a, "c") for a in alphabet), "identity")


def apply_transducer(t: Transducer, word: str) -> set[str]:
    runs = {(s, "") for s in t.initial}
    by_key: dict = {}
    for s, a, b, s2 in t.rules:
        by_key.setdefault((s, a), []).append((b, s2))
    for a in word:
        runs = {(s2, out + b) for s, out in runs for b, s2 in by_key.get((s, a), ())}
        if not runs:
            return set()
    return {out for s, out in runs if s in t.accepting}


def increment_iterate(width: int, count: int) -> str:
    """Apply the increment transducer `count` times to 0^width."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if count >= 2 ** width:
        raise IncrementOverflow(f"{count} does not fit in {width} bits")
    inc = increment_transducer()
    w = "0" * width
    for _ in range(count):
        (w,) = apply_transducer(inc, w)
    return w


# ----- arithmetic on the pair (p, q)


def trailing_zeros(n: int) -> int:
    return (n & -n).bit_length() - 1


def reduce_binary_pair(p: int, q: int) -> tuple[int, int]:
    """Strip the common trailing zeros of p and q."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    z = min(trailing_zeros(p), trailing_zeros(q))
    return p >> z, q >> z


def scale_for_time(p: int, q: int, t: int) -> tuple[int, int]:
    """(m, n) = 2^ceil(log2 t) * (p, q), so that m >= t."""
    if not p > q > 0 or t < 1:
        raise ValueError("need p > q > 0 and t >= 1")
    e = (t - 1).bit_length()
    return p << e, q << e


def encode_pair(p: int, q: int) -> str:
    """Tape layout for the pair: bin(p) '#' bin(q), most significant bit first."""
    return f"{p:b}#{q:b}"


# ----- toy machines


def immediate_halt_machine() -> TuringMachine:
    return TuringMachine.build([("s0", BLANK, "h", BLANK, "S"), ("s0", "1", "h", "1", "S")],
                               name="halt-now")


def looping_machine() -> TuringMachine:
    return TuringMachine.build([("s0", BLANK, "s0", BLANK, "S"), ("s0", "1", "s0", "1", "S")],
                               name="loop")


def empty_machine() -> TuringMachine:
    return TuringMachine.build([], name="empty")


def right_scanner() -> TuringMachine:
    """Walk right over 1s, halt on the first blank."""
    return TuringMachine.build([("s0", "1", "s0", "1", "R"), ("s0", BLANK, "h", BLANK, "S")],
                               name="scanner")


def parity_machine() -> TuringMachine:
    """Halts iff the number of 1s is even; gets stuck otherwise."""
    return TuringMachine.build([("s0", "1", "s1", "1", "R"), ("s1", "1", "s0", "1", "R"),
                                ("s0", BLANK, "h", BLANK, "S")], name="parity")


def bounce_machine() -> TuringMachine:
    """Step right, step back left, halt."""
    return TuringMachine.build([("s0", "1", "s1", "1", "R"), ("s0", BLANK, "s1", "1", "R"),
                                ("s1", "1", "s2", BLANK, "L"), ("s1", BLANK, "s2", "1", "L"),
                                ("s2", "1", "h", "1", "S"), ("s2", BLANK, "h", BLANK, "S")],
                               name="bounce")


def left_runner() -> TuringMachine:
    """Erase, then fall off the left end."""
    return TuringMachine.build([("s0", "1", "s0", BLANK, "R"), ("s0", BLANK, "s1", BLANK, "L"),
                                ("s1", BLANK, "s1", BLANK, "L")], name="left-runner")


def writer_machine() -> TuringMachine:
    """Writes 1s to the right forever."""
    return TuringMachine.build([("s0", BLANK, "s0", "1", "R"), ("s0", "1", "s0", "1", "R")],
                               name="writer")


def toy_corpus() -> list[TuringMachine]:
    return [immediate_halt_machine(), looping_machine(), right_scanner(), parity_machine(),
            bounce_machine(), left_runner(), writer_machine(), empty_machine()]
