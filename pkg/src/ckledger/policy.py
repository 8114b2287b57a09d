"""Boolean attribute policies: parsing, canonical form, identifiers, evaluation.

Policies are monotone AND/OR trees over ``name=value`` equality leaves::

    expr   := term (OR term)*
    term   := factor (AND factor)*
    factor := attr | '(' expr ')'
    attr   := name '=' value

AND binds tighter than OR and keywords are case-insensitive.  Range-style
constraints such as ``clearance >= 2`` are expressed by enumerating the
admissible values in an OR group (``clearance=2 OR clearance=3``).
"""

from __future__ import annotations

import functools
import hashlib
import random
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Union

from ckledger.errors import PolicyError, PolicySyntaxError

EPOCH = "epoch"

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+")
_AND = "AND"
_OR = "OR"


@dataclass(frozen=True, order=True)
class Attribute:
    name: str
    value: str

    def __post_init__(self) -> None:
        for part in (self.name, self.value):
            if not isinstance(part, str) or not _TOKEN_RE.fullmatch(part):
                raise PolicyError(f"invalid attribute token {part!r}")

    def __str__(self) -> str:
        return f"{self.name}={self.value}"

    @classmethod
    def parse(cls, text: str) -> "Attribute":
        name, sep, value = text.strip().partition("=")
        if not sep:
            raise PolicyError(f"attribute must look like name=value, got {text!r}")
        return cls(name, value)


@dataclass(frozen=True)
class Leaf:
    attr: Attribute


@dataclass(frozen=True)
class Gate:
    op: str
    children: tuple["Node", ...]

    def __post_init__(self) -> None:
        if self.op not in (_AND, _OR):
            raise PolicyError(f"unknown gate {self.op!r}")
        if len(self.children) < 2:
            raise PolicyError("a gate needs at least two children")


Node = Union[Leaf, Gate]
Policy = Node


def leaf(text: str) -> Leaf:
    return Leaf(Attribute.parse(text))


def AND(*children: Node) -> Gate:
    return Gate(_AND, tuple(children))


def OR(*children: Node) -> Gate:
    return Gate(_OR, tuple(children))


# --------------------------------------------------------------------------
# parsing


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Split into (kind, lexeme, 0-based char index) triples."""
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()=":
            tokens.append((c, c, i))
            i += 1
        else:
            m = _TOKEN_RE.match(text, i)
            if m is None:
                raise PolicySyntaxError(f"unexpected character {c!r}", _offset(text, i))
            tokens.append(("word", m.group(), i))
            i = m.end()
    return tokens


def _offset(text: str, index: int) -> int:
    # 1-based byte position, so end of input reports len + 1
    return len(text[:index].encode("utf-8")) + 1


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def error(self, message: str) -> PolicySyntaxError:
        if self.pos < len(self.tokens):
            index = self.tokens[self.pos][2]
            found = repr(self.tokens[self.pos][1])
        else:
            index = len(self.text)
            found = "end of input"
        return PolicySyntaxError(f"{message}, found {found}", _offset(self.text, index))

    def peek_keyword(self) -> str | None:
        if self.pos < len(self.tokens):
            kind, lexeme, _ = self.tokens[self.pos]
            if kind == "word" and lexeme.upper() in (_AND, _OR):
                return lexeme.upper()
        return None

    def expect(self, kind: str) -> str:
        if self.pos >= len(self.tokens) or self.tokens[self.pos][0] != kind:
            what = "attribute token" if kind == "word" else repr(kind)
            raise self.error(f"expected {what}")
        lexeme = self.tokens[self.pos][1]
        self.pos += 1
        return lexeme

    def expr(self) -> Node:
        terms = [self.term()]
        while self.peek_keyword() == _OR:
            self.pos += 1
            terms.append(self.term())
        return _gate(_OR, terms)

    def term(self) -> Node:
        factors = [self.factor()]
        while self.peek_keyword() == _AND:
            self.pos += 1
            factors.append(self.factor())
        return _gate(_AND, factors)

    def factor(self) -> Node:
        if self.pos < len(self.tokens) and self.tokens[self.pos][0] == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        name = self.expect("word")
        self.expect("=")
        value = self.expect("word")
        return Leaf(Attribute(name, value))


def _gate(op: str, nodes: list[Node]) -> Node:
    if len(nodes) == 1:
        return nodes[0]
    flat: list[Node] = []
    for node in nodes:
        if isinstance(node, Gate) and node.op == op:
            flat.extend(node.children)
        else:
            flat.append(node)
    return Gate(op, tuple(flat))


# trees are immutable, so repeated texts can share one parse
@functools.lru_cache(maxsize=4096)
def parse(text: str) -> Node:
    if not text or not text.strip():
        raise PolicySyntaxError("empty policy", 1)
    parser = _Parser(text)
    node = parser.expr()
    if parser.pos != len(parser.tokens):
        raise parser.error("expected AND, OR or end of input")
    return node


# --------------------------------------------------------------------------
# canonical form


@functools.lru_cache(maxsize=4096)
def normalize(p: Node) -> Node:
    """Flatten same-op nesting, drop duplicate children and sort them.

    The result renders to the canonical text and is the tree shape that
    ciphertext share layouts follow.
    """
    if isinstance(p, Leaf):
        return p
    children: dict[str, Node] = {}
    for child in p.children:
        child = normalize(child)
        parts = child.children if isinstance(child, Gate) and child.op == p.op else (child,)
        for part in parts:
            children.setdefault(_render(part), part)
    ordered = [children[key] for key in sorted(children)]
    if len(ordered) == 1:
        return ordered[0]
    return Gate(p.op, tuple(ordered))


def _render(p: Node) -> str:
    if isinstance(p, Leaf):
        return str(p.attr)
    return "(" + f" {p.op} ".join(_render(c) for c in p.children) + ")"


@functools.lru_cache(maxsize=4096)
def canonicalize(p: Node) -> str:
    return _render(normalize(p))


def policy_id(p: Node) -> str:
    return hashlib.sha256(canonicalize(p).encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# evaluation and inspection


def satisfies(p: Node, attrs: Iterable[Attribute]) -> bool:
    held = attrs if isinstance(attrs, (set, frozenset)) else set(attrs)
    return _eval(p, held)


def _eval(p: Node, held: set[Attribute] | frozenset[Attribute]) -> bool:
    if isinstance(p, Leaf):
        return p.attr in held
    if p.op == _AND:
        return all(_eval(c, held) for c in p.children)
    return any(_eval(c, held) for c in p.children)


def leaves(p: Node) -> Iterator[Attribute]:
    if isinstance(p, Leaf):
        yield p.attr
    else:
        for child in p.children:
            yield from leaves(child)


def leaf_count(p: Node) -> int:
    return sum(1 for _ in leaves(p))


def preorder(p: Node) -> Iterator[Node]:
    yield p
    if isinstance(p, Gate):
        for child in p.children:
            yield from preorder(child)


def depth(p: Node) -> int:
    if isinstance(p, Leaf):
        return 1
    return 1 + max(depth(c) for c in p.children)


# --------------------------------------------------------------------------
# epochs


def epoch_attribute(epoch: int) -> Attribute:
    return Attribute(EPOCH, str(epoch))


def epoch_of(p: Node) -> int | None:
    found = [a for a in leaves(p) if a.name == EPOCH]
    if not found:
        return None
    if len(found) > 1:
        raise PolicyError("policy carries more than one epoch leaf")
    return int(found[0].value)


def attach_epoch(p: Node, epoch: int) -> Gate:
    if epoch < 0:
        raise PolicyError("epoch must be nonnegative")
    if any(a.name == EPOCH for a in leaves(p)):
        raise PolicyError("policy already carries an epoch leaf")
    tag = Leaf(epoch_attribute(epoch))
    if isinstance(p, Gate) and p.op == _AND:
        return Gate(_AND, p.children + (tag,))
    return Gate(_AND, (p, tag))


def strip_epoch(p: Node) -> Node:
    """Inverse of :func:`attach_epoch` for policies built by it."""
    if isinstance(p, Gate) and p.op == _AND:
        kept = tuple(c for c in p.children if not (isinstance(c, Leaf) and c.attr.name == EPOCH))
        if len(kept) != len(p.children):
            return kept[0] if len(kept) == 1 else Gate(_AND, kept)
    if any(a.name == EPOCH for a in leaves(p)):
        raise PolicyError("epoch leaf is not a top-level conjunct")
    return p


# --------------------------------------------------------------------------
# synthetic workloads


class PolicyForm(str, Enum):
    AND = "AND"
    AND_OF_OR = "AND_OF_OR"


def shape(p: Node) -> tuple[PolicyForm, int]:
    """Form and leaf count of a policy, ignoring any epoch conjunct."""
    if epoch_of(p) is not None:
        p = strip_epoch(p)
    k = leaf_count(p)
    if isinstance(p, Leaf) or all(isinstance(c, Leaf) for c in p.children) and p.op == _AND:
        return PolicyForm.AND, k
    return PolicyForm.AND_OF_OR, k


VALUE_POOL = 4


def gen_policy(k: int, form: PolicyForm | str, seed: int) -> Node:
    """Synthetic policy with ``k`` distinct leaves over names ``a0, a1, ...``.

    AND_OF_OR builds ``k // 2`` OR pairs that each offer two values of one
    attribute; an odd ``k`` adds one plain leaf to the conjunction.
    """
    form = PolicyForm(form)
    rng = random.Random(seed)
    if form is PolicyForm.AND:
        if k < 1:
            raise PolicyError("AND policies need k >= 1")
        nodes: list[Node] = [
            Leaf(Attribute(f"a{i}", f"v{rng.randrange(VALUE_POOL)}")) for i in range(k)
        ]
        return nodes[0] if k == 1 else Gate(_AND, tuple(nodes))
    if k < 2:
        raise PolicyError("AND_OF_OR policies need k >= 2")
    nodes = []
    for i in range(k // 2):
        lo, hi = sorted(rng.sample(range(VALUE_POOL), 2))
        nodes.append(OR(Leaf(Attribute(f"a{i}", f"v{lo}")), Leaf(Attribute(f"a{i}", f"v{hi}"))))
    if k % 2:
        i = k // 2
        nodes.append(Leaf(Attribute(f"a{i}", f"v{rng.randrange(VALUE_POOL)}")))
    return nodes[0] if len(nodes) == 1 else Gate(_AND, tuple(nodes))


def a_satisfying_set(p: Node) -> set[Attribute]:
    """Some attribute set satisfying ``p``: every AND child, the first OR child."""
    if isinstance(p, Leaf):
        return {p.attr}
    if p.op == _OR:
        return a_satisfying_set(p.children[0])
    out: set[Attribute] = set()
    for child in p.children:
        out |= a_satisfying_set(child)
    return out
