"""RDF terms, N-Triples parsing, canonical serialization and dictionary encoding."""

from __future__ import annotations

import gzip
import io
import os
import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, NamedTuple, Union

from .exceptions import NTriplesError, UnknownId

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = RDF + "type"
RDF_LANGSTRING = RDF + "langString"

_SCHEME = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")
_BNODE_LABEL = re.compile(r"[A-Za-z0-9][A-Za-z0-9._\-]*")
_LANGTAG = re.compile(r"[A-Za-z]+(?:-[A-Za-z0-9]+)*")
_IRI_FORBIDDEN = frozenset(' <>"{}|^`\\\t\n\r')
# \s matches exactly the characters for which str.isspace() is true
_IRI_BAD = re.compile(r'[\s<>"{}|^`\\]')

_ESCAPE_TABLE = {c: "\\u%04X" % c for c in list(range(0x20)) + [0x7F]}
_ESCAPE_TABLE.update({ord("\\"): "\\\\", ord('"'): '\\"', ord("\n"): "\\n", ord("\r"): "\\r"})
_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


class Term:
    """Base for the three RDF term kinds; ordered by canonical N-Triples form."""

    __slots__ = ()

    def n3(self) -> str:
        raise NotImplementedError

    def __lt__(self, other):
        return self.n3() < other.n3()

    def __le__(self, other):
        return self.n3() <= other.n3()

    def __gt__(self, other):
        return self.n3() > other.n3()

    def __ge__(self, other):
        return self.n3() >= other.n3()

    def __str__(self):
        return self.n3()


@dataclass(frozen=True, slots=True)
class Iri(Term):
    value: str

    def __post_init__(self):
        if not self.value or _IRI_BAD.search(self.value):
            raise ValueError(f"invalid IRI: {self.value!r}")

    def n3(self) -> str:
        return f"<{self.value}>"


@dataclass(frozen=True, slots=True)
class BlankNode(Term):
    label: str

    def __post_init__(self):
        if not _BNODE_LABEL.fullmatch(self.label) or self.label.endswith("."):
            raise ValueError(f"invalid blank node label: {self.label!r}")

    def n3(self) -> str:
        return f"_:{self.label}"


@dataclass(frozen=True, slots=True)
class Literal(Term):
    lexical: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self):
        if self.datatype is not None and self.language is not None:
            raise ValueError("a literal carries either a datatype or a language tag")

    @property
    def effective_datatype(self) -> str:
        if self.language is not None:
            return RDF_LANGSTRING
        return self.datatype or XSD + "string"

    def n3(self) -> str:
        body = '"' + self.lexical.translate(_ESCAPE_TABLE) + '"'
        if self.language is not None:
            return f"{body}@{self.language}"
        if self.datatype is not None:
            return f"{body}^^<{self.datatype}>"
        return body


Node = Union[Iri, BlankNode]


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Node
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise TypeError("subject must be an IRI or blank node")
        if not isinstance(self.predicate, Iri):
            raise TypeError("predicate must be an IRI")
        if not isinstance(self.object, Term):
            raise TypeError("object must be an RDF term")

    def sort_key(self) -> tuple[str, str, str]:
        return (self.subject.n3(), self.predicate.n3(), self.object.n3())

    def n3(self) -> str:
        return "%s %s %s ." % self.sort_key()

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __iter__(self):
        return iter((self.subject, self.predicate, self.object))

    def __str__(self):
        return self.n3()


def is_node(term: Term) -> bool:
    return isinstance(term, (Iri, BlankNode))


# --------------------------------------------------------------------- parsing


@dataclass(frozen=True)
class ParseError:
    line: int
    kind: str
    reason: str

    def __str__(self):
        return f"line {self.line}: {self.kind}: {self.reason}"


class _LineError(Exception):
    def __init__(self, kind, reason):
        super().__init__(reason)
        self.kind = kind
        self.reason = reason


def _unescape_uchar(text: str, i: int) -> tuple[str, int]:
    # text[i] is the 'u' or 'U' following a backslash
    width = 4 if text[i] == "u" else 8
    digits = text[i + 1 : i + 1 + width]
    if len(digits) != width or not all(c in "0123456789abcdefABCDEF" for c in digits):
        raise ValueError("bad \\u escape")
    return chr(int(digits, 16)), i + 1 + width


def _skip_ws(text: str, i: int) -> int:
    n = len(text)
    while i < n and text[i] in " \t":
        i += 1
    return i


def _read_iri(text: str, i: int) -> tuple[Iri, int]:
    # text[i] == "<"
    end = text.find(">", i + 1)
    if end > i + 1 and _SCHEME.match(text, i + 1):
        value = text[i + 1:end]
        if not _IRI_BAD.search(value):
            return Iri(value), end + 1
    # slow path: escapes, or something to report
    out = []
    i += 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == ">":
            value = "".join(out)
            if not value:
                raise _LineError("MalformedIri", "empty IRI")
            if not _SCHEME.match(value):
                raise _LineError("MalformedIri", f"IRI is not absolute: <{value}>")
            try:
                return Iri(value), i + 1
            except ValueError as exc:
                raise _LineError("MalformedIri", str(exc)) from None
        if c == "\\":
            if i + 1 < n and text[i + 1] in "uU":
                try:
                    ch, i = _unescape_uchar(text, i + 1)
                except ValueError:
                    raise _LineError("MalformedIri", "invalid escape in IRI") from None
                out.append(ch)
                continue
            raise _LineError("MalformedIri", "invalid escape in IRI")
        if c in _IRI_FORBIDDEN or c.isspace():
            raise _LineError("MalformedIri", f"illegal character {c!r} in IRI")
        out.append(c)
        i += 1
    raise _LineError("MalformedIri", "unterminated IRI")


def _read_bnode(text: str, i: int) -> tuple[BlankNode, int]:
    m = _BNODE_LABEL.match(text, i + 2)
    if not text.startswith("_:", i) or m is None:
        raise _LineError("MalformedIri", "malformed blank node label")
    label = m.group(0).rstrip(".")
    return BlankNode(label), i + 2 + len(label)


def _read_literal(text: str, i: int) -> tuple[Literal, int]:
    # text[i] == '"'
    out = []
    i += 1
    n = len(text)
    while True:
        if i >= n:
            raise _LineError("MalformedLiteral", "unterminated literal")
        c = text[i]
        if c == '"':
            i += 1
            break
        if c == "\\":
            if i + 1 >= n:
                raise _LineError("MalformedLiteral", "dangling backslash")
            e = text[i + 1]
            if e in _ECHAR:
                out.append(_ECHAR[e])
                i += 2
            elif e in "uU":
                try:
                    ch, i = _unescape_uchar(text, i + 1)
                except ValueError:
                    raise _LineError("MalformedLiteral", "invalid \\u escape") from None
                out.append(ch)
            else:
                raise _LineError("MalformedLiteral", f"invalid escape \\{e}")
            continue
        out.append(c)
        i += 1
    lexical = "".join(out)
    if text.startswith("@", i):
        m = _LANGTAG.match(text, i + 1)
        if m is None:
            raise _LineError("MalformedLiteral", "malformed language tag")
        return Literal(lexical, language=m.group(0)), m.end()
    if text.startswith("^^", i):
        if not text.startswith("<", i + 2):
            raise _LineError("MalformedLiteral", "datatype must be an IRI")
        dt, j = _read_iri(text, i + 2)
        return Literal(lexical, datatype=dt.value), j
    return Literal(lexical), i


def _read_node(text: str, i: int, position: str) -> tuple[Term, int]:
    if i >= len(text):
        raise _LineError("MalformedIri", f"missing {position}")
    c = text[i]
    if c == "<":
        return _read_iri(text, i)
    if c == "_":
        return _read_bnode(text, i)
    if c == '"':
        if position == "subject":
            raise _LineError("InvalidSubjectKind", "literal in subject position")
        if position == "predicate":
            raise _LineError("MalformedIri", "predicate must be an IRI")
        return _read_literal(text, i)
    raise _LineError("MalformedIri", f"unexpected character {c!r} at {position}")


def parse_line(text: str) -> Triple | None:
    """Parse one N-Triples line; None for blank and comment lines."""
    i = _skip_ws(text, 0)
    if i >= len(text) or text[i] == "#":
        return None
    s, i = _read_node(text, i, "subject")
    i = _skip_ws(text, i)
    p, i = _read_node(text, i, "predicate")
    if not isinstance(p, Iri):
        raise _LineError("MalformedIri", "predicate must be an IRI")
    i = _skip_ws(text, i)
    o, i = _read_node(text, i, "object")
    i = _skip_ws(text, i)
    if i >= len(text) or text[i] != ".":
        raise _LineError("MissingTerminatingDot", "statement is not terminated by '.'")
    i = _skip_ws(text, i + 1)
    if i < len(text) and text[i] != "#":
        raise _LineError("MissingTerminatingDot", "trailing content after '.'")
    return Triple(s, p, o)


Source = Union[bytes, str, IO[bytes], Iterable[bytes]]


def _iter_lines(source: Source) -> Iterator[bytes]:
    if isinstance(source, str):
        source = source.encode("utf-8")
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    for raw in source:
        yield raw


def parse_ntriples(source: Source, *, strict: bool = False) -> tuple[list[Triple], list[ParseError]]:
    """Parse N-Triples from bytes, text, or a binary stream.

    Returns the well-formed triples in document order together with one
    :class:`ParseError` per malformed line. With ``strict=True`` the first
    error raises :class:`NTriplesError` instead.
    """
    triples: list[Triple] = []
    errors: list[ParseError] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        try:
            text = raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw
            text = text.rstrip("\r\n")
            triple = parse_line(text)
        except UnicodeDecodeError as exc:
            err = ParseError(lineno, "InvalidUtf8", str(exc))
        except _LineError as exc:
            err = ParseError(lineno, exc.kind, exc.reason)
        else:
            if triple is not None:
                triples.append(triple)
            continue
        if strict:
            raise NTriplesError(err)
        errors.append(err)
    return triples, errors


def read_ntriples(path: str | os.PathLike, *, strict: bool = False) -> tuple[list[Triple], list[ParseError]]:
    """Parse an N-Triples file; ``.gz`` files are decompressed transparently."""
    opener = gzip.open if os.fspath(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        return parse_ntriples(fh, strict=strict)


def canonical_lines(triples: Iterable[Triple]) -> list[str]:
    """Sorted, duplicate-free N-Triples lines (without line terminators)."""
    keys = sorted({t.sort_key() for t in triples})
    return ["%s %s %s ." % k for k in keys]


def canonical_serialize(triples: Iterable[Triple]) -> bytes:
    lines = canonical_lines(triples)
    if not lines:
        return b""
    return ("\n".join(lines) + "\n").encode("utf-8")


# ------------------------------------------------------------------ dictionary


class EncodedTriple(NamedTuple):
    s: int
    p: int
    o: int


class Dictionary:
    """Dense first-seen term ↔ id mapping."""

    def __init__(self):
        self.forward: dict[Term, int] = {}
        self.reverse: list[Term] = []

    @property
    def next_id(self) -> int:
        return len(self.reverse)

    def __len__(self):
        return len(self.reverse)

    def __contains__(self, term):
        return term in self.forward

    def term_id(self, term: Term) -> int:
        tid = self.forward.get(term)
        if tid is None:
            tid = len(self.reverse)
            self.forward[term] = tid
            self.reverse.append(term)
        return tid

    def term(self, tid: int) -> Term:
        if not 0 <= tid < len(self.reverse):
            raise UnknownId(tid)
        return self.reverse[tid]

    def encode(self, t: Triple) -> EncodedTriple:
        return EncodedTriple(self.term_id(t.subject), self.term_id(t.predicate), self.term_id(t.object))

    def decode(self, e: EncodedTriple) -> Triple:
        return Triple(self.term(e[0]), self.term(e[1]), self.term(e[2]))


def encode(dictionary: Dictionary, t: Triple) -> EncodedTriple:
    return dictionary.encode(t)


def decode(dictionary: Dictionary, e: EncodedTriple) -> Triple:
    return dictionary.decode(e)
