"""Token alphabet, grammar and grammar-constrained generation.

A design is a flat token sequence: ``<start>``, components (catalogue part
numbers) joined by interface tokens, ``<end>``. Interface tokens are
``tra+``/``tra-`` (shaft placement direction) and ``mesh_1p``/``mesh_1n``/
``mesh_2p``/``mesh_2n`` (which perpendicular of the current motion axis the
next component is placed along, and the sign). A shaft and the gear mounted
on it are adjacent with no interface token in between.

Production rules (component-type level):

    start     -> Translate Shaft | Rack Mesh Spur
    Shaft     -> Gear Mesh Gear | Spur Mesh Rack | end
    Spur      -> Mesh Spur | Translate Shaft | end
    Rack      -> end
    Gear      -> Translate Shaft | end      (Gear = any toothed non-rack type)

plus mesh compatibility from the catalogue: every Mesh joins parts that are
listed mesh partners.
"""

from __future__ import annotations

import hashlib
import random
import weakref
from dataclasses import dataclass
from enum import Enum

from .catalogue import Catalogue, PartRecord
from .errors import DeadEnd

MAX_COMPONENTS = 10
MAX_TOKENS = 21   # implied by the 10-component bound

START = "<start>"
END = "<end>"
PAD = "<pad>"

TRA_TOKENS: dict[str, int] = {"tra+": +1, "tra-": -1}
# mesh token -> (perpendicular index k in {1,2}, sign)
MESH_TOKENS: dict[str, tuple[int, int]] = {
    "mesh_1p": (1, +1),
    "mesh_1n": (1, -1),
    "mesh_2p": (2, +1),
    "mesh_2n": (2, -1),
}
INTERFACE_TOKENS = (*TRA_TOKENS, *MESH_TOKENS)


class TokenKind(Enum):
    START = "start"
    END = "end"
    PART = "part"
    TRA = "tra"
    MESH = "mesh"
    UNKNOWN = "unknown"


def token_kind(token: str, cat: Catalogue) -> TokenKind:
    if token == START:
        return TokenKind.START
    if token == END:
        return TokenKind.END
    if token in TRA_TOKENS:
        return TokenKind.TRA
    if token in MESH_TOKENS:
        return TokenKind.MESH
    if token in cat:
        return TokenKind.PART
    return TokenKind.UNKNOWN


@dataclass(frozen=True)
class GearSequence:
    """An ordered token sequence (a candidate design)."""

    tokens: tuple[str, ...]

    @property
    def component_tokens(self) -> tuple[str, ...]:
        special = {START, END, *INTERFACE_TOKENS}
        return tuple(t for t in self.tokens if t not in special)

    @property
    def n_components(self) -> int:
        return len(self.component_tokens)

    def __str__(self) -> str:
        return " ".join(self.tokens)

    @classmethod
    def from_string(cls, line: str) -> "GearSequence":
        return cls(tuple(line.split()))


@dataclass(frozen=True)
class GrammarViolation:
    """First point at which a sequence stops deriving from the grammar."""

    position: int
    expected: tuple[str, ...]
    found: str

    def __str__(self) -> str:
        want = " | ".join(self.expected) if self.expected else "nothing"
        return f"position {self.position}: expected {want}, found {self.found!r}"


def vocabulary(cat: Catalogue) -> tuple[str, ...]:
    """Canonical 53-token vocabulary: pad, sentinels, interfaces, parts."""
    return (PAD, START, END, *INTERFACE_TOKENS, *cat.part_numbers())


def vocabulary_hash(cat: Catalogue) -> str:
    text = "\n".join(vocabulary(cat)) + "\n"
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class _State(Enum):
    AT_START = 0        # <start> seen
    AFTER_TRA = 1       # expecting a shaft
    AFTER_SHAFT = 2     # shaft placed; end or first gear of a pair
    RACK_HEAD = 3       # leading rack placed; expecting mesh
    RACK_HEAD_MESH = 4  # expecting the pinion of the leading rack
    GEAR1 = 5           # gear mounted on a shaft; expecting mesh
    GEAR1_MESH = 6      # expecting the partner of the mounted gear
    FREE_SPUR = 7       # spur is current: end, translate or mesh another spur
    SPUR_MESH = 8       # expecting a spur partner
    FREE_GEAR = 9       # non-spur gear is current: end or translate
    RACK_TAIL = 10      # terminal rack placed; only end
    DONE = 11


class _Tables:
    """Catalogue-derived lookup tables, in catalogue (vocabulary) order."""

    def __init__(self, cat: Catalogue):
        order = {pn: i for i, pn in enumerate(cat.part_numbers())}
        self.shafts = tuple(p.part_number for p in cat.iter_parts() if p.is_shaft)
        self.sorted_partners = {
            p.part_number: tuple(sorted(p.mesh_partners, key=order.__getitem__))
            for p in cat.iter_parts()
        }
        self.spur_partners = {
            pn: tuple(q for q in ps if cat.part(q).is_spur)
            for pn, ps in self.sorted_partners.items()
        }
        # first gear of a shaft-mounted pair: any toothed non-rack part with a partner
        self.gear1 = tuple(
            p.part_number for p in cat.iter_parts()
            if p.is_toothed and not p.is_rack and self.sorted_partners[p.part_number]
        )
        # a leading rack must have a spur to mesh with
        self.head_racks = tuple(
            p.part_number for p in cat.iter_parts()
            if p.is_rack and self.spur_partners[p.part_number]
        )
        self.rack_pinions = {
            pn: self.spur_partners[pn] for pn in self.head_racks
        }


_tables_cache: "weakref.WeakKeyDictionary[Catalogue, _Tables]" = weakref.WeakKeyDictionary()


def _tables(cat: Catalogue) -> _Tables:
    tables = _tables_cache.get(cat)
    if tables is None:
        tables = _Tables(cat)
        _tables_cache[cat] = tables
    return tables


@dataclass
class _Parse:
    state: _State
    n_components: int
    cur: PartRecord | None        # current (most recently placed) component
    violation: GrammarViolation | None


def _step(parse: _Parse, token: str, pos: int, cat: Catalogue,
          tables: _Tables, max_components: int) -> None:
    """Advance the parse by one token, recording the first violation."""
    st = parse.state
    n = parse.n_components

    def fail(*expected: str) -> None:
        parse.violation = GrammarViolation(pos, expected, token)

    if st is _State.AT_START:
        if token in TRA_TOKENS and n + 1 <= max_components:
            parse.state = _State.AFTER_TRA
        elif token in tables.head_racks and n + 2 <= max_components:
            parse.cur = cat.part(token)
            parse.n_components += 1
            parse.state = _State.RACK_HEAD
        else:
            fail("tra", "rack")
    elif st is _State.AFTER_TRA:
        if token in tables.shafts:
            parse.cur = cat.part(token)
            parse.n_components += 1
            parse.state = _State.AFTER_SHAFT
        else:
            fail("shaft")
    elif st is _State.AFTER_SHAFT:
        if token == END:
            parse.state = _State.DONE
        elif token in tables.gear1 and n + 2 <= max_components:
            parse.cur = cat.part(token)
            parse.n_components += 1
            parse.state = _State.GEAR1
        else:
            fail("end", "gear")
    elif st is _State.RACK_HEAD:
        if token in MESH_TOKENS:
            parse.state = _State.RACK_HEAD_MESH
        else:
            fail("mesh")
    elif st is _State.RACK_HEAD_MESH:
        assert parse.cur is not None
        if token in tables.rack_pinions.get(parse.cur.part_number, ()):
            parse.cur = cat.part(token)
            parse.n_components += 1
            parse.state = _State.FREE_SPUR
        else:
            fail("spur meshing the rack")
    elif st is _State.GEAR1:
        if token in MESH_TOKENS:
            parse.state = _State.GEAR1_MESH
        else:
            fail("mesh")
    elif st is _State.GEAR1_MESH:
        assert parse.cur is not None
        if token in tables.sorted_partners[parse.cur.part_number]:
            part = cat.part(token)
            parse.cur = part
            parse.n_components += 1
            if part.is_rack:
                parse.state = _State.RACK_TAIL
            elif part.is_spur:
                parse.state = _State.FREE_SPUR
            else:
                parse.state = _State.FREE_GEAR
        else:
            fail("mesh partner of " + parse.cur.part_number)
    elif st is _State.FREE_SPUR:
        assert parse.cur is not None
        if token == END:
            parse.state = _State.DONE
        elif token in TRA_TOKENS and n + 1 <= max_components:
            parse.state = _State.AFTER_TRA
        elif (token in MESH_TOKENS and n + 1 <= max_components
              and tables.spur_partners[parse.cur.part_number]):
            parse.state = _State.SPUR_MESH
        else:
            fail("end", "tra", "mesh")
    elif st is _State.SPUR_MESH:
        assert parse.cur is not None
        if token in tables.spur_partners[parse.cur.part_number]:
            parse.cur = cat.part(token)
            parse.n_components += 1
            parse.state = _State.FREE_SPUR
        else:
            fail("spur meshing " + parse.cur.part_number)
    elif st is _State.FREE_GEAR:
        if token == END:
            parse.state = _State.DONE
        elif token in TRA_TOKENS and n + 1 <= max_components:
            parse.state = _State.AFTER_TRA
        else:
            fail("end", "tra")
    elif st is _State.RACK_TAIL:
        if token == END:
            parse.state = _State.DONE
        else:
            fail("end")
    else:   # DONE
        fail("nothing (sequence already closed)")


def _parse_tokens(tokens: tuple[str, ...] | list[str], cat: Catalogue,
                  max_components: int) -> _Parse:
    parse = _Parse(_State.AT_START, 0, None, None)
    if not tokens or tokens[0] != START:
        parse.violation = GrammarViolation(0, ("<start>",), tokens[0] if tokens else "<eof>")
        return parse
    for pos, token in enumerate(tokens[1:], start=1):
        _step(parse, token, pos, cat, _tables(cat), max_components)
        if parse.violation is not None:
            return parse
    return parse


def validate_grammar(seq: GearSequence | tuple[str, ...] | list[str], cat: Catalogue,
                     max_components: int = MAX_COMPONENTS) -> GrammarViolation | None:
    """Return None when the sequence derives from the grammar, else the
    first violation."""
    tokens = seq.tokens if isinstance(seq, GearSequence) else tuple(seq)
    parse = _parse_tokens(tokens, cat, max_components)
    if parse.violation is not None:
        return parse.violation
    if parse.state is not _State.DONE:
        return GrammarViolation(len(tokens), ("more tokens",), "<eof>")
    return None


def is_valid(seq: GearSequence | tuple[str, ...] | list[str], cat: Catalogue) -> bool:
    return validate_grammar(seq, cat) is None


def next_tokens(prefix: tuple[str, ...] | list[str], cat: Catalogue,
                max_components: int = MAX_COMPONENTS) -> tuple[str, ...]:
    """All tokens that extend ``prefix`` toward some valid sequence.

    The result is ordered canonically (sentinel, interfaces, then catalogue
    order) and is never empty: a prefix with no continuation raises DeadEnd,
    as does a prefix that already violates the grammar or is complete.
    """
    parse = _parse_tokens(tuple(prefix), cat, max_components)
    if parse.violation is not None:
        raise DeadEnd(f"prefix not extendable: {parse.violation}")
    tables = _tables(cat)
    st, n = parse.state, parse.n_components
    out: tuple[str, ...]
    if st is _State.AT_START:
        out = ()
        if n + 1 <= max_components:
            out += tuple(TRA_TOKENS)
        if n + 2 <= max_components:
            out += tables.head_racks
    elif st is _State.AFTER_TRA:
        out = tables.shafts
    elif st is _State.AFTER_SHAFT:
        out = (END,)
        if n + 2 <= max_components:
            out += tables.gear1
    elif st is _State.RACK_HEAD:
        out = tuple(MESH_TOKENS)
    elif st is _State.RACK_HEAD_MESH:
        assert parse.cur is not None
        out = tables.rack_pinions[parse.cur.part_number]
    elif st is _State.GEAR1:
        out = tuple(MESH_TOKENS)
    elif st is _State.GEAR1_MESH:
        assert parse.cur is not None
        out = tables.sorted_partners[parse.cur.part_number]
    elif st is _State.FREE_SPUR:
        assert parse.cur is not None
        out = (END,)
        if n + 1 <= max_components:
            out += tuple(TRA_TOKENS)
            if tables.spur_partners[parse.cur.part_number]:
                out += tuple(MESH_TOKENS)
    elif st is _State.SPUR_MESH:
        assert parse.cur is not None
        out = tables.spur_partners[parse.cur.part_number]
    elif st is _State.FREE_GEAR:
        out = (END,)
        if n + 1 <= max_components:
            out += tuple(TRA_TOKENS)
    elif st is _State.RACK_TAIL:
        out = (END,)
    else:
        raise DeadEnd("sequence already complete")
    if not out:
        raise DeadEnd("no continuation under the component budget")
    return out


def complete_random(prefix: tuple[str, ...] | list[str], cat: Catalogue,
                    seed: int | None = None, rng: random.Random | None = None,
                    max_components: int = MAX_COMPONENTS) -> GearSequence:
    """Extend ``prefix`` to a full valid sequence by uniform random choice
    over the allowed tokens at each step. A complete prefix is returned
    unchanged."""
    if rng is None:
        rng = random.Random(seed)
    tokens = list(prefix)
    if tokens and tokens[-1] == END and is_valid(tokens, cat):
        return GearSequence(tuple(tokens))
    while not tokens or tokens[-1] != END:
        tokens.append(rng.choice(next_tokens(tokens, cat, max_components)))
    return GearSequence(tuple(tokens))


def random_valid_sequence(cat: Catalogue, seed: int | None = None,
                          rng: random.Random | None = None,
                          max_components: int = MAX_COMPONENTS) -> GearSequence:
    """Draw one grammar-valid sequence with at most ``max_components``."""
    if not 1 <= max_components <= MAX_COMPONENTS:
        raise ValueError(f"max_components must be in 1..{MAX_COMPONENTS}")
    return complete_random((START,), cat, seed=seed, rng=rng,
                           max_components=max_components)


# Component-type level enumeration ------------------------------------------

V_START = "<start>"
V_END = "<end>"
V_TRANSLATE = "Translate"
V_MESH = "Mesh"
V_SHAFT = "Shaft"
V_RACK = "Rack"
V_SPUR = "Spur gear"
V_BEVEL = "Bevel gear"
V_MITER = "Miter gear"
V_WORM = "Worm gear"
V_HYPOID = "Hypoid gear"

_GEAR_TYPES = (V_SPUR, V_BEVEL, V_MITER, V_WORM, V_HYPOID)
# type pairs realizable by at least one compatible part pair
_TYPE_PAIRS = tuple((g, g) for g in _GEAR_TYPES)


def enumerate_variable_sequences(max_components: int = MAX_COMPONENTS):
    """Yield every distinct component-type sequence with up to
    ``max_components`` components, as tuples of variable names."""
    if not 1 <= max_components <= MAX_COMPONENTS:
        raise ValueError(f"max_components must be in 1..{MAX_COMPONENTS}")

    def close(body):
        return (V_START, *body, V_END)

    def from_spur(body, n):
        yield close(body)
        if n + 1 <= max_components:
            yield from from_spur((*body, V_MESH, V_SPUR), n + 1)
            yield from from_shaft((*body, V_TRANSLATE, V_SHAFT), n + 1)

    def from_gear(body, n):
        yield close(body)
        if n + 1 <= max_components:
            yield from from_shaft((*body, V_TRANSLATE, V_SHAFT), n + 1)

    def from_shaft(body, n):
        yield close(body)
        if n + 2 <= max_components:
            for g1, g2 in _TYPE_PAIRS:
                cont = from_spur if g2 == V_SPUR else from_gear
                yield from cont((*body, g1, V_MESH, g2), n + 2)
            yield close((*body, V_SPUR, V_MESH, V_RACK))

    yield from from_shaft((V_TRANSLATE, V_SHAFT), 1)
    if max_components >= 2:
        yield from from_spur((V_RACK, V_MESH, V_SPUR), 2)


def count_variable_sequences(max_components: int = MAX_COMPONENTS) -> int:
    return sum(1 for _ in enumerate_variable_sequences(max_components))


_TYPE_OF_VARIABLE = {
    V_SHAFT: ("shaft",),
    V_RACK: ("rack",),
    V_SPUR: ("spur",),
    V_BEVEL: ("bevel",),
    V_MITER: ("miter",),
    V_WORM: ("worm", "worm_wheel"),
    V_HYPOID: ("hypoid_pinion", "hypoid_ring"),
}


def instantiate_variables(variables: tuple[str, ...], cat: Catalogue,
                          rng: random.Random) -> GearSequence:
    """Assign one uniformly random token to every variable of a
    component-type sequence, honoring mesh compatibility."""
    tables = _tables(cat)
    by_type: dict[str, tuple[str, ...]] = {}
    for var, types in _TYPE_OF_VARIABLE.items():
        by_type[var] = tuple(p.part_number for p in cat.iter_parts()
                             if p.component_type.value in types)

    tokens = [START]
    prev_part: str | None = None
    prev_was_mesh = False
    body = variables[1:-1]
    for i, var in enumerate(body):
        if var == V_TRANSLATE:
            tokens.append(rng.choice(tuple(TRA_TOKENS)))
            prev_was_mesh = False
            continue
        if var == V_MESH:
            tokens.append(rng.choice(tuple(MESH_TOKENS)))
            prev_was_mesh = True
            continue
        pool = by_type[var]
        if prev_was_mesh:
            assert prev_part is not None
            partners = set(tables.sorted_partners[prev_part])
            pool = tuple(p for p in pool if p in partners)
        if i + 2 < len(body) and body[i + 1] == V_MESH:
            # the choice must leave a legal partner for the next mesh
            mate_pool = set(by_type[body[i + 2]])
            pool = tuple(p for p in pool
                         if mate_pool.intersection(tables.sorted_partners[p]))
        if not pool:
            raise DeadEnd(f"no {var!r} token fits after {prev_part!r}")
        choice = rng.choice(pool)
        tokens.append(choice)
        prev_part = choice
        prev_was_mesh = False
    tokens.append(END)
    return GearSequence(tuple(tokens))


def random_sequence_two_stage(cat: Catalogue, rng: random.Random,
                              max_components: int = MAX_COMPONENTS,
                              _cache: dict = {}) -> GearSequence:
    """Draw a uniform component-type sequence, then uniform tokens for its
    variables. Longer type sequences are more numerous, so this construction
    is weighted toward long designs (unlike the per-token uniform walk)."""
    key = max_components
    shapes = _cache.get(key)
    if shapes is None:
        shapes = tuple(enumerate_variable_sequences(max_components))
        _cache[key] = shapes
    return instantiate_variables(rng.choice(shapes), cat, rng)
