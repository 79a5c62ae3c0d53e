"""ASCII AIGER (``aag``) reading and writing.

Literals follow the AIGER convention: variable ``v`` has positive literal
``2v`` and negated literal ``2v + 1``; literal 0 is constant false and 1 is
constant true.  Inputs whose symbol starts with ``controllable_`` belong to
the controller, all others to the environment.
"""
from __future__ import annotations

from dataclasses import dataclass, field

CONTROLLABLE_PREFIX = "controllable_"


class AigerError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MalformedHeader(AigerError):
    pass


class MalformedFile(AigerError):
    pass


class LiteralOutOfRange(AigerError):
    pass


class CyclicAndDefinition(AigerError):
    pass


class MultipleOutputs(AigerError):
    pass


class DanglingReference(AigerError):
    pass


def negate(lit: int) -> int:
    return lit ^ 1


def strip(lit: int) -> int:
    return lit & ~1


@dataclass
class AigFile:
    max_var: int
    inputs: list[int] = field(default_factory=list)
    latches: list[tuple[int, int]] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    ands: list[tuple[int, int, int]] = field(default_factory=list)
    # keys are ("i" | "l" | "o", position)
    symbols: dict[tuple[str, int], str] = field(default_factory=dict)
    comments: list[str] = field(default_factory=list)

    def input_name(self, k: int) -> str | None:
        return self.symbols.get(("i", k))

    def latch_name(self, k: int) -> str | None:
        return self.symbols.get(("l", k))


@dataclass
class CircuitSpec:
    """The circuit tuple: input partition, latches with next-state literals, bad literal."""

    aig: AigFile
    uncontrollable: list[int]
    controllable: list[int]
    latches: list[tuple[int, int]]
    bad: int
    name_table: dict[int, str]

    def name(self, lit: int) -> str:
        return self.name_table[strip(lit)]


def parse_aag(text: str | bytes, *, strict: bool = True) -> AigFile:
    """Parse and validate an ``aag`` file.

    With ``strict`` (the default) the file must have exactly one output, as
    required for a synthesis specification.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise MalformedHeader("empty file", 1)
    head = lines[0].split()
    if len(head) < 6 or head[0] != "aag":
        raise MalformedHeader(f"expected 'aag M I L O A', got {lines[0]!r}", 1)
    try:
        m, i, l, o, a, *extra = (int(x) for x in head[1:])
    except ValueError:
        raise MalformedHeader(f"non-numeric header field in {lines[0]!r}", 1) from None
    if any(extra):
        raise MalformedHeader("bad/constraint/justice/fairness sections are not supported", 1)
    if min(m, i, l, o, a) < 0 or m < i + l + a:
        raise MalformedHeader(f"inconsistent header counts M={m} I={i} L={l} A={a}", 1)
    if strict and o != 1:
        if o > 1:
            raise MultipleOutputs(f"specification needs exactly one output, found {o}", 1)
        raise MalformedHeader("specification needs exactly one output, found 0", 1)

    pos = 1

    def take(what: str) -> tuple[int, list[int]]:
        nonlocal pos
        if pos >= len(lines) or not lines[pos].strip():
            raise MalformedFile(f"missing {what} line (header promises more)", pos + 1)
        try:
            nums = [int(x) for x in lines[pos].split()]
        except ValueError:
            raise MalformedFile(f"non-numeric {what} line {lines[pos]!r}", pos + 1) from None
        pos += 1
        return pos, nums

    maxlit = 2 * m + 1
    defined: dict[int, int] = {}  # variable -> defining line

    def define(lit: int, lineno: int, what: str) -> None:
        if lit > maxlit:
            raise LiteralOutOfRange(f"{what} literal {lit} exceeds 2*M+1={maxlit}", lineno)
        if lit & 1 or lit == 0:
            raise MalformedFile(f"{what} literal {lit} must be even and nonzero", lineno)
        var = lit >> 1
        if var in defined:
            raise MalformedFile(f"variable {var} already defined on line {defined[var]}", lineno)
        defined[var] = lineno

    def check_range(lit: int, lineno: int) -> None:
        if lit < 0 or lit > maxlit:
            raise LiteralOutOfRange(f"literal {lit} exceeds 2*M+1={maxlit}", lineno)

    aig = AigFile(max_var=m)
    for _ in range(i):
        lineno, nums = take("input")
        if len(nums) != 1:
            raise MalformedFile("input line must hold one literal", lineno)
        define(nums[0], lineno, "input")
        aig.inputs.append(nums[0])
    latch_lines = []
    for _ in range(l):
        lineno, nums = take("latch")
        if len(nums) == 3 and nums[2] != 0:
            raise MalformedFile("latches must reset to 0", lineno)
        if len(nums) not in (2, 3):
            raise MalformedFile("latch line must be 'lit next'", lineno)
        define(nums[0], lineno, "latch")
        check_range(nums[1], lineno)
        aig.latches.append((nums[0], nums[1]))
        latch_lines.append(lineno)
    output_lines = []
    for _ in range(o):
        lineno, nums = take("output")
        if len(nums) != 1:
            raise MalformedFile("output line must hold one literal", lineno)
        check_range(nums[0], lineno)
        aig.outputs.append(nums[0])
        output_lines.append(lineno)
    and_lines = []
    for _ in range(a):
        lineno, nums = take("and")
        if len(nums) != 3:
            raise MalformedFile("and line must be 'lhs rhs0 rhs1'", lineno)
        lhs, r0, r1 = nums
        define(lhs, lineno, "and")
        check_range(r0, lineno)
        check_range(r1, lineno)
        aig.ands.append((lhs, r0, r1))
        and_lines.append(lineno)

    # every referenced variable must be defined
    def check_defined(lit: int, lineno: int) -> None:
        if lit > 1 and (lit >> 1) not in defined:
            raise LiteralOutOfRange(f"literal {lit} refers to undefined variable {lit >> 1}", lineno)

    for (lhs, r0, r1), lineno in zip(aig.ands, and_lines):
        check_defined(r0, lineno)
        check_defined(r1, lineno)
    for (_, nxt), lineno in zip(aig.latches, latch_lines):
        check_defined(nxt, lineno)
    for out, lineno in zip(aig.outputs, output_lines):
        check_defined(out, lineno)
    _check_and_order(aig, and_lines)

    # symbol table and comments
    while pos < len(lines):
        raw = lines[pos]
        pos += 1
        if not raw.strip():
            continue
        if raw.strip() == "c":
            aig.comments = [c for c in lines[pos:]]
            while aig.comments and not aig.comments[-1]:
                aig.comments.pop()
            break
        kind = raw[0]
        if kind in "ilo" and " " in raw:
            idx, name = raw[1:].split(" ", 1)
            try:
                k = int(idx)
            except ValueError:
                raise MalformedFile(f"bad symbol line {raw!r}", pos) from None
            limit = {"i": i, "l": l, "o": o}[kind]
            if not 0 <= k < limit:
                raise MalformedFile(f"symbol index {k} out of range", pos)
            aig.symbols[(kind, k)] = name
        elif kind in "bcjf":
            continue
        else:
            raise MalformedFile(f"unexpected line {raw!r}", pos)
    return aig


def _check_and_order(aig: AigFile, and_lines: list[int]) -> None:
    """Gates must come topologically sorted: lhs strictly above both inputs."""
    gate_of = {lhs >> 1: (r0, r1) for lhs, r0, r1 in aig.ands}
    for (lhs, r0, r1), lineno in zip(aig.ands, and_lines):
        if lhs > r0 and lhs > r1:
            continue
        # out of order: distinguish a true cycle from a mere ordering violation
        stack, seen = [r0 >> 1, r1 >> 1], set()
        while stack:
            v = stack.pop()
            if v == lhs >> 1:
                raise CyclicAndDefinition(f"and gate {lhs} depends on itself", lineno)
            if v in seen or v not in gate_of:
                continue
            seen.add(v)
            stack.extend(x >> 1 for x in gate_of[v])
        raise CyclicAndDefinition(f"and gate {lhs} is not above its inputs {r0}, {r1} "
                                  "(gates must be topologically numbered)", lineno)


def write_aag(aig: AigFile) -> str:
    out = [f"aag {aig.max_var} {len(aig.inputs)} {len(aig.latches)} {len(aig.outputs)} {len(aig.ands)}"]
    out += [str(x) for x in aig.inputs]
    out += [f"{lit} {nxt}" for lit, nxt in aig.latches]
    out += [str(x) for x in aig.outputs]
    out += [f"{lhs} {r0} {r1}" for lhs, r0, r1 in aig.ands]
    order = {"i": 0, "l": 1, "o": 2}
    for (kind, k), name in sorted(aig.symbols.items(), key=lambda kv: (order[kv[0][0]], kv[0][1])):
        out.append(f"{kind}{k} {name}")
    if aig.comments:
        out.append("c")
        out += aig.comments
    return "\n".join(out) + "\n"


def split_inputs(aig: AigFile) -> CircuitSpec:
    if len(aig.outputs) != 1:
        raise MultipleOutputs(f"specification needs exactly one output, found {len(aig.outputs)}")
    names: dict[int, str] = {}
    xu, xc = [], []
    for k, lit in enumerate(aig.inputs):
        name = aig.input_name(k)
        if name is not None and name.startswith(CONTROLLABLE_PREFIX):
            xc.append(lit)
        else:
            xu.append(lit)
        names[lit] = name if name is not None else f"i{k}"
    for k, (lit, _) in enumerate(aig.latches):
        names[lit] = aig.latch_name(k) or f"l{k}"
    return CircuitSpec(aig=aig, uncontrollable=xu, controllable=xc,
                       latches=list(aig.latches), bad=aig.outputs[0], name_table=names)


def read_spec(path) -> CircuitSpec:
    with open(path, "rb") as fh:
        return split_inputs(parse_aag(fh.read()))


@dataclass
class GateNetwork:
    """A small AND-inverter network computing one signal.

    Local variable 0 is constant false, variables ``1..len(leaves)`` stand for
    the given leaf signals (AIGER literals of the host circuit), and each entry
    of ``ands`` defines the next local variable.  ``output`` is a local literal.
    """

    leaves: list[int]
    ands: list[tuple[int, int]]
    output: int

    @property
    def gate_count(self) -> int:
        return len(self.ands)

    def evaluate(self, leaf_values: dict[int, bool]) -> bool:
        vals = [False] + [leaf_values[x] for x in self.leaves]

        def lit(x):
            return vals[x >> 1] ^ bool(x & 1)

        for r0, r1 in self.ands:
            vals.append(lit(r0) and lit(r1))
        return lit(self.output)


def write_controlled_aag(aig: AigFile, controller: list[tuple[int, GateNetwork]]) -> str:
    """Return a closed circuit where each controllable input is driven by its network.

    Variables are renumbered: uncontrollable inputs, then latches, then the
    controller gates, then the original gates, so that every gate still sits
    above its inputs.
    """
    spec = split_inputs(aig)
    ctrl = dict(controller)
    if set(ctrl) != set(spec.controllable) or len(ctrl) != len(controller):
        raise DanglingReference("controller must give exactly one network per controllable input")
    keep_inputs = spec.uncontrollable
    remap: dict[int, int] = {0: 0}  # old variable -> new variable
    nxt = 1
    for lit in keep_inputs:
        remap[lit >> 1] = nxt
        nxt += 1
    for lit, _ in aig.latches:
        remap[lit >> 1] = nxt
        nxt += 1
    allowed = {lit >> 1 for lit in keep_inputs} | {lit >> 1 for lit, _ in aig.latches}
    new_ands: list[tuple[int, int, int]] = []
    strash: dict[tuple[int, int], int] = {}

    def mk_and(a: int, b: int) -> int:
        nonlocal nxt
        if a > b:
            a, b = b, a
        key = (a, b)
        if key not in strash:
            strash[key] = 2 * nxt
            new_ands.append((2 * nxt, b, a))
            nxt += 1
        return strash[key]

    for c_lit in spec.controllable:
        net = ctrl[c_lit]
        local = [0]
        for leaf in net.leaves:
            if leaf >> 1 not in allowed:
                raise DanglingReference(f"controller for {spec.name(c_lit)} reads undefined signal {leaf}")
            local.append(2 * remap[leaf >> 1] ^ (leaf & 1))

        def tr(x, local=local):
            return local[x >> 1] ^ (x & 1)

        for r0, r1 in net.ands:
            local.append(mk_and(tr(r0), tr(r1)))
        out = tr(net.output)
        # the controllable variable becomes a gate of its own: out & TRUE
        remap[c_lit >> 1] = nxt
        new_ands.append((2 * nxt, out, 1))
        nxt += 1

    original = sorted(aig.ands)
    for lhs, _, _ in original:
        remap[lhs >> 1] = nxt
        nxt += 1

    def rl(x: int) -> int:
        return 2 * remap[x >> 1] ^ (x & 1)

    for lhs, r0, r1 in original:
        a, b = rl(r0), rl(r1)
        new_ands.append((rl(lhs), max(a, b), min(a, b)))
    out = AigFile(max_var=nxt - 1,
                  inputs=[rl(x) for x in keep_inputs],
                  latches=[(rl(lit), rl(n)) for lit, n in aig.latches],
                  outputs=[rl(x) for x in aig.outputs],
                  ands=new_ands)
    for k, lit in enumerate(keep_inputs):
        out.symbols[("i", k)] = spec.name(lit)
    for k in range(len(aig.latches)):
        if aig.latch_name(k) is not None:
            out.symbols[("l", k)] = aig.latch_name(k)
    for k in range(len(aig.outputs)):
        if ("o", k) in aig.symbols:
            out.symbols[("o", k)] = aig.symbols[("o", k)]
    out.comments = list(aig.comments)
    for c_lit in spec.controllable:
        out.comments.append(f"controller: {spec.name(c_lit)} -> {2 * remap[c_lit >> 1]}")
    return write_aag(out)
