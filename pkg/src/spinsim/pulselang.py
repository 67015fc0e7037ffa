"""Pulse-program DSL: parsing, compilation against a transition catalog,
and execution with phase cycling.

Grammar, one instruction per line ('#' starts a comment):

    selpulse <tN | (bits,bits)> <angle_deg> <phase>
    pulse <angle_deg> <phase>
    grad
    delay <seconds | t1 | t2>
    acquire <points> <dwell_s>
    cycle <SLOT...>
    row <phase...> [+|-]

A phase is one of x, y, -x, -y, deg:<float> or $SLOT; slots must be
declared by a single ``cycle`` line whose ``row`` lines each assign a phase
per slot (optionally ending with a receiver sign, default +).  Programs are
written in the order pulses are applied: the first line acts first.
Diagnostics use the conventional ``file:line:col: message`` format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EigenSystem, TransitionCatalog
from . import dynamics as dyn

_AXIS_TO_DEG = {"x": 0.0, "y": 90.0, "-x": 180.0, "-y": 270.0}
_DEG_TO_AXIS = {0.0: "x", 90.0: "y", 180.0: "-x", 270.0: "-y"}


class PulseProgramError(ValueError):
    def __init__(self, message: str, source: str = "<string>",
                 line: int = 0, col: int = 0):
        self.source, self.line, self.col = source, line, col
        self.reason = message
        super().__init__(f"{source}:{line}:{col}: {message}")


@dataclass(frozen=True)
class TransitionRef:
    tid: int | None = None
    pair: tuple[str, str] | None = None

    def __str__(self):
        if self.tid is not None:
            return f"t{self.tid}"
        return f"({self.pair[0]},{self.pair[1]})"


@dataclass(frozen=True)
class PhaseSpec:
    degrees: float | None = None
    slot: str | None = None

    def __str__(self):
        if self.slot is not None:
            return f"${self.slot}"
        return _format_phase(self.degrees)


def _format_phase(deg: float) -> str:
    deg = deg % 360.0
    for canon, name in _DEG_TO_AXIS.items():
        if math.isclose(deg, canon, abs_tol=1e-12):
            return name
    return f"deg:{deg:.12g}"


@dataclass(frozen=True)
class SelPulse:
    ref: TransitionRef
    angle_deg: float
    phase: PhaseSpec

    def __str__(self):
        return f"selpulse {self.ref} {self.angle_deg:.12g} {self.phase}"


@dataclass(frozen=True)
class HardPulse:
    angle_deg: float
    phase: PhaseSpec

    def __str__(self):
        return f"pulse {self.angle_deg:.12g} {self.phase}"


@dataclass(frozen=True)
class Grad:
    def __str__(self):
        return "grad"


@dataclass(frozen=True)
class Delay:
    seconds: float | None = None
    symbol: str | None = None

    def __str__(self):
        return f"delay {self.symbol if self.symbol else f'{self.seconds:.12g}'}"


@dataclass(frozen=True)
class Acquire:
    points: int
    dwell_s: float

    def __str__(self):
        return f"acquire {self.points} {self.dwell_s:.12g}"


Instruction = SelPulse | HardPulse | Grad | Delay | Acquire


@dataclass(frozen=True)
class PhaseCycle:
    slots: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]
    receivers: tuple[int, ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("phase cycle needs at least one row")
        if any(len(r) != len(self.slots) for r in self.rows):
            raise ValueError("phase-cycle rows must match the slot arity")

    def phase_of(self, slot: str, row: int) -> float:
        return self.rows[row][self.slots.index(slot)]


@dataclass(frozen=True)
class PulseProgram:
    instructions: tuple[Instruction, ...]
    cycle: PhaseCycle | None = None


def _token_columns(raw: str) -> list[tuple[str, int]]:
    toks = []
    col = 0
    i = 0
    while i < len(raw):
        if raw[i].isspace():
            i += 1
            continue
        j = i
        while j < len(raw) and not raw[j].isspace():
            j += 1
        toks.append((raw[i:j], i + 1))
        i = j
    return toks


def _parse_phase(tok: str, source, line, col) -> PhaseSpec:
    if tok.startswith("$"):
        if len(tok) < 2:
            raise PulseProgramError("empty phase slot name", source, line, col)
        return PhaseSpec(slot=tok[1:])
    return PhaseSpec(degrees=_parse_phase_value(tok, source, line, col))


def _parse_phase_value(tok: str, source, line, col) -> float:
    if tok in _AXIS_TO_DEG:
        return _AXIS_TO_DEG[tok]
    if tok.startswith("deg:"):
        try:
            return float(tok[4:]) % 360.0
        except ValueError:
            raise PulseProgramError(f"malformed phase {tok!r}", source, line, col) from None
    raise PulseProgramError(f"malformed phase {tok!r}", source, line, col)


def _parse_float(tok: str, what: str, source, line, col) -> float:
    try:
        val = float(tok)
    except ValueError:
        raise PulseProgramError(f"malformed {what} {tok!r}", source, line, col) from None
    if not math.isfinite(val):
        raise PulseProgramError(f"non-finite {what} {tok!r}", source, line, col)
    return val


def _parse_transition(tok: str, source, line, col) -> TransitionRef:
    if tok.startswith("t") and tok[1:].isdigit():
        return TransitionRef(tid=int(tok[1:]))
    if tok.startswith("(") and tok.endswith(")") and "," in tok:
        a, b = tok[1:-1].split(",", 1)
        a, b = a.strip(), b.strip()
        if a and b and set(a + b) <= {"0", "1"}:
            return TransitionRef(pair=(a, b))
    raise PulseProgramError(f"malformed transition reference {tok!r}",
                            source, line, col)


def parse_program(text: str, source: str = "<string>") -> PulseProgram:
    instructions: list[Instruction] = []
    slots: tuple[str, ...] | None = None
    rows: list[tuple[float, ...]] = []
    receivers: list[int] = []
    cycle_line = 0

    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = _token_columns(body)
        if not toks:
            continue
        (kw, col0) = toks[0]

        def need(k: int, what: str):
            if len(toks) <= k:
                raise PulseProgramError(f"missing {what}", source, ln,
                                        col0 + len(kw))
            return toks[k]

        if kw == "selpulse":
            rtok, rcol = need(1, "transition reference")
            atok, acol = need(2, "angle")
            ptok, pcol = need(3, "phase")
            instructions.append(SelPulse(
                ref=_parse_transition(rtok, source, ln, rcol),
                angle_deg=_parse_float(atok, "angle", source, ln, acol),
                phase=_parse_phase(ptok, source, ln, pcol)))
        elif kw == "pulse":
            atok, acol = need(1, "angle")
            ptok, pcol = need(2, "phase")
            instructions.append(HardPulse(
                angle_deg=_parse_float(atok, "angle", source, ln, acol),
                phase=_parse_phase(ptok, source, ln, pcol)))
        elif kw == "grad":
            instructions.append(Grad())
        elif kw == "delay":
            dtok, dcol = need(1, "duration")
            if dtok in ("t1", "t2"):
                instructions.append(Delay(symbol=dtok))
            else:
                secs = _parse_float(dtok, "delay", source, ln, dcol)
                if secs < 0:
                    raise PulseProgramError("negative delay", source, ln, dcol)
                instructions.append(Delay(seconds=secs))
        elif kw == "acquire":
            ntok, ncol = need(1, "point count")
            dtok, dcol = need(2, "dwell")
            if not ntok.isdigit():
                raise PulseProgramError(f"malformed point count {ntok!r}",
                                        source, ln, ncol)
            instructions.append(Acquire(
                points=int(ntok),
                dwell_s=_parse_float(dtok, "dwell", source, ln, dcol)))
        elif kw == "cycle":
            if slots is not None:
                raise PulseProgramError("duplicate cycle declaration",
                                        source, ln, col0)
            if len(toks) < 2:
                raise PulseProgramError("cycle needs at least one slot",
                                        source, ln, col0)
            slots = tuple(t for t, _ in toks[1:])
            cycle_line = ln
        elif kw == "row":
            if slots is None:
                raise PulseProgramError("row before cycle declaration",
                                        source, ln, col0)
            vals = toks[1:]
            recv = 1
            if vals and vals[-1][0] in ("+", "-"):
                recv = 1 if vals[-1][0] == "+" else -1
                vals = vals[:-1]
            if len(vals) != len(slots):
                raise PulseProgramError(
                    f"row has {len(vals)} phases, cycle declares {len(slots)}",
                    source, ln, col0)
            rows.append(tuple(_parse_phase_value(t, source, ln, c)
                              for t, c in vals))
            receivers.append(recv)
        else:
            raise PulseProgramError(f"unknown instruction {kw!r}", source, ln, col0)

    cycle = None
    if slots is not None:
        if not rows:
            raise PulseProgramError("cycle declared but no rows given",
                                    source, cycle_line, 1)
        cycle = PhaseCycle(slots=slots, rows=tuple(rows),
                           receivers=tuple(receivers))

    used = {ins.phase.slot for ins in instructions
            if isinstance(ins, (SelPulse, HardPulse)) and ins.phase.slot}
    declared = set(slots or ())
    missing = sorted(used - declared)
    if missing:
        raise PulseProgramError(
            f"phase slot {missing[0]!r} used but not defined in cycle table",
            source, 0, 0)

    for k, ins in enumerate(instructions):
        if isinstance(ins, Acquire) and k != len(instructions) - 1:
            raise PulseProgramError("acquire must be the final instruction",
                                    source, 0, 0)
    return PulseProgram(instructions=tuple(instructions), cycle=cycle)


def format_program(program: PulseProgram) -> str:
    out = []
    if program.cycle is not None:
        out.append("cycle " + " ".join(program.cycle.slots))
        for row, recv in zip(program.cycle.rows, program.cycle.receivers):
            out.append("row " + " ".join(_format_phase(p) for p in row)
                       + (" +" if recv > 0 else " -"))
    out.extend(str(ins) for ins in program.instructions)
    return "\n".join(out) + "\n"


def resolve_transition(ref: TransitionRef, es: EigenSystem,
                       catalog: TransitionCatalog) -> tuple[int, int]:
    """Map a transition reference to a (lower, upper) eigenstate index pair."""
    try:
        if ref.tid is not None:
            t = catalog.by_id(ref.tid)
        else:
            a, b = ref.pair
            if len(a) != es.n or len(b) != es.n:
                raise KeyError(f"labels {a},{b} do not match a {es.n}-spin system")
            t = catalog.by_labels(es, a, b)
    except KeyError as exc:
        raise PulseProgramError(f"unknown transition: {exc.args[0]}") from None
    return t.lower, t.upper


def _resolved_phase(spec: PhaseSpec, cycle: PhaseCycle | None, row: int) -> float:
    if spec.slot is None:
        return spec.degrees
    return cycle.phase_of(spec.slot, row)


def execute(program: PulseProgram, es: EigenSystem,
            rho0: dyn.DeviationDensityMatrix,
            catalog: TransitionCatalog | None = None,
            row: int = 0, t1: float | None = None,
            t2: float | None = None) -> dyn.DeviationDensityMatrix:
    """Apply the instructions left to right to rho0 and return the result.

    Symbolic delays must be bound through t1/t2; acquire instructions are
    not executable here (use the acquisition module's runners).  When the
    program has a phase cycle, ``row`` selects which row resolves the slots.
    """
    from .core import transition_catalog as _build_catalog
    if catalog is None:
        catalog = _build_catalog(es)
    rho = rho0.copy()
    for ins in program.instructions:
        if isinstance(ins, SelPulse):
            lo, up = resolve_transition(ins.ref, es, catalog)
            ph = _resolved_phase(ins.phase, program.cycle, row)
            u = dyn.selective_pulse_unitary(es, lo, up, ins.angle_deg, ph)
            rho = dyn.apply_unitary(rho, u)
        elif isinstance(ins, HardPulse):
            ph = _resolved_phase(ins.phase, program.cycle, row)
            rho = dyn.apply_unitary(rho, dyn.hard_pulse_unitary(es, ins.angle_deg, ph))
        elif isinstance(ins, Grad):
            rho = dyn.crush_gradient(rho)
        elif isinstance(ins, Delay):
            if ins.symbol is not None:
                bound = {"t1": t1, "t2": t2}[ins.symbol]
                if bound is None:
                    raise PulseProgramError(
                        f"unresolved symbolic delay {ins.symbol}")
                rho = dyn.free_evolution(es, rho, bound)
            else:
                rho = dyn.free_evolution(es, rho, ins.seconds)
        elif isinstance(ins, Acquire):
            raise PulseProgramError("acquire cannot be executed directly; "
                                    "use an acquisition runner")
    return rho


def execute_cycled(program: PulseProgram, es: EigenSystem,
                   rho0: dyn.DeviationDensityMatrix,
                   catalog: TransitionCatalog | None = None,
                   t1: float | None = None,
                   t2: float | None = None) -> dyn.DeviationDensityMatrix:
    """Receiver-weighted average of the per-row results of the phase cycle.

    Rows are independent; the stack is reduced with numpy's pairwise
    summation so the result does not depend on evaluation order.
    """
    if program.cycle is None:
        return execute(program, es, rho0, catalog, t1=t1, t2=t2)
    mats = []
    for row, recv in enumerate(program.cycle.receivers):
        out = execute(program, es, rho0, catalog, row=row, t1=t1, t2=t2)
        mats.append(recv * out.mat)
    avg = np.mean(np.stack(mats), axis=0)
    return dyn.DeviationDensityMatrix(avg, es)
