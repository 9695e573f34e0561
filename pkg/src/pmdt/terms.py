"""RDF-style terms: IRIs, typed literals and the prefix table."""

from __future__ import annotations

import datetime as _dt
import os
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterable, Mapping, Union

from .errors import LiteralError, PmdtError, UnknownPrefixError

PMDT = "https://w3id.org/pmdt/ontology#"
EX = "https://w3id.org/pmdt/example/"
META = "https://w3id.org/pmdt/meta#"
XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"

DEFAULT_PREFIXES: dict[str, str] = {
    "pmdt": PMDT,
    "ex": EX,
    "xsd": XSD,
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "pmdtm": META,
}

DATATYPES = ("string", "integer", "decimal", "boolean", "dateTime", "date")

_DATETIME_RE = re.compile(
    r"^-?\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})?$"
)
_DATE_RE = re.compile(r"^-?\d{4}-\d{2}-\d{2}$")
_INTEGER_RE = re.compile(r"^[+-]?\d+$")
_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")


@dataclass(frozen=True, order=True)
class Iri:
    value: str

    def __post_init__(self):
        if not isinstance(self.value, str) or not self.value:
            raise PmdtError("IRI must be a non-empty string", "invalid-iri")
        if ":" not in self.value or any(c in self.value for c in ' <>"{}|\\^`\n\t'):
            raise PmdtError(f"not an absolute IRI: {self.value!r}", "invalid-iri")

    def __str__(self) -> str:
        return self.value

    @property
    def local_name(self) -> str:
        cut = max(self.value.rfind("#"), self.value.rfind("/"))
        return self.value[cut + 1 :]


def _canonical_decimal(text: str) -> str:
    try:
        d = Decimal(text)
    except InvalidOperation as exc:
        raise LiteralError(f"invalid decimal lexical form {text!r}") from exc
    out = f"{d.normalize():f}"
    if "." not in out:
        out += ".0"
    if out.startswith("-0") and Decimal(out) == 0:
        out = out[1:]
    return out


def parse_datetime(text: str) -> _dt.datetime:
    value = _dt.datetime.fromisoformat(text.replace("Z", "+00:00"))
    if value.tzinfo is None:
        value = value.replace(tzinfo=_dt.timezone.utc)
    return value


@dataclass(frozen=True)
class Literal:
    """A typed literal. Numeric and boolean lexical forms are canonicalised
    on construction so that equal values compare equal as terms."""

    lexical: str
    datatype: str = "string"

    def __post_init__(self):
        if self.datatype not in DATATYPES:
            raise LiteralError(f"unsupported datatype {self.datatype!r}")
        lex = self.lexical
        if not isinstance(lex, str):
            raise LiteralError(f"lexical form must be text, got {type(lex).__name__}")
        dt = self.datatype
        if dt == "integer":
            if not _INTEGER_RE.match(lex):
                raise LiteralError(f"invalid integer lexical form {lex!r}")
            object.__setattr__(self, "lexical", str(int(lex)))
        elif dt == "decimal":
            if not _DECIMAL_RE.match(lex):
                raise LiteralError(f"invalid decimal lexical form {lex!r}")
            object.__setattr__(self, "lexical", _canonical_decimal(lex))
        elif dt == "boolean":
            if lex not in ("true", "false", "1", "0"):
                raise LiteralError(f"invalid boolean lexical form {lex!r}")
            object.__setattr__(self, "lexical", "true" if lex in ("true", "1") else "false")
        elif dt == "dateTime":
            if not _DATETIME_RE.match(lex):
                raise LiteralError(f"invalid dateTime lexical form {lex!r}")
            try:
                parse_datetime(lex)
            except ValueError as exc:
                raise LiteralError(f"invalid dateTime {lex!r}: {exc}") from exc
        elif dt == "date":
            if not _DATE_RE.match(lex):
                raise LiteralError(f"invalid date lexical form {lex!r}")
            try:
                _dt.date.fromisoformat(lex)
            except ValueError as exc:
                raise LiteralError(f"invalid date {lex!r}: {exc}") from exc

    @classmethod
    def of(cls, value) -> "Literal":
        """Build a literal from a Python value."""
        if isinstance(value, bool):
            return cls("true" if value else "false", "boolean")
        if isinstance(value, int):
            return cls(str(value), "integer")
        if isinstance(value, (float, Decimal)):
            return cls(str(value), "decimal")
        if isinstance(value, _dt.datetime):
            return cls(value.isoformat().replace("+00:00", "Z"), "dateTime")
        if isinstance(value, _dt.date):
            return cls(value.isoformat(), "date")
        if isinstance(value, str):
            return cls(value, "string")
        raise LiteralError(f"cannot build a literal from {type(value).__name__}")

    @property
    def value(self):
        dt = self.datatype
        if dt == "integer":
            return int(self.lexical)
        if dt == "decimal":
            return Decimal(self.lexical)
        if dt == "boolean":
            return self.lexical == "true"
        if dt == "dateTime":
            return parse_datetime(self.lexical)
        if dt == "date":
            return _dt.date.fromisoformat(self.lexical)
        return self.lexical

    @property
    def family(self) -> str:
        """Comparison family: values in the same family are ordered."""
        return "numeric" if self.datatype in ("integer", "decimal") else self.datatype

    def __str__(self) -> str:
        return self.lexical


Term = Union[Iri, Literal]

RDF_TYPE = Iri(RDF + "type")


def term_key(term: Term) -> tuple:
    """Canonical total order: IRIs before literals; IRIs by resolved form;
    literals by family, typed value, then datatype and lexical form."""
    if isinstance(term, Iri):
        return (0, term.value)
    value = term.value
    if term.family == "numeric":
        value = Decimal(value)
    return (1, term.family, value, term.datatype, term.lexical)


def xsd_iri(datatype: str) -> Iri:
    return Iri(XSD + datatype)


def datatype_from_iri(iri: Iri) -> str | None:
    if iri.value.startswith(XSD):
        name = iri.value[len(XSD):]
        if name in DATATYPES:
            return name
    return None


_LOCAL_RE = re.compile(r"^[A-Za-z0-9_](?:[A-Za-z0-9_\-./]*[A-Za-z0-9_\-/])?$|^$")
_PREFIX_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_\-]*$|^$")


class PrefixMap:
    """Prefix table mapping prefix labels to namespaces."""

    def __init__(self, prefixes: "Mapping[str, str] | PrefixMap | None" = None, *, defaults: bool = True):
        self._map: dict[str, str] = {}
        if defaults:
            self._map.update(DEFAULT_PREFIXES)
            self._map.update(env_prefixes())
        if isinstance(prefixes, PrefixMap):
            prefixes = prefixes.as_dict()
        if prefixes:
            self._map.update(prefixes)

    def __contains__(self, prefix: str) -> bool:
        return prefix in self._map

    def __getitem__(self, prefix: str) -> str:
        return self._map[prefix]

    def items(self):
        return sorted(self._map.items())

    def as_dict(self) -> dict[str, str]:
        return dict(self._map)

    def bind(self, prefix: str, namespace: str) -> None:
        if not _PREFIX_RE.match(prefix):
            raise PmdtError(f"invalid prefix label {prefix!r}", "invalid-prefix")
        self._map[prefix] = namespace

    def resolve(self, name: str) -> Iri:
        """Resolve ``prefix:local`` or ``<absolute>`` to an Iri."""
        if name.startswith("<") and name.endswith(">"):
            return Iri(name[1:-1])
        prefix, sep, local = name.partition(":")
        if not sep:
            raise PmdtError(f"not a prefixed name: {name!r}", "invalid-iri")
        if prefix not in self._map:
            raise UnknownPrefixError(prefix)
        return Iri(self._map[prefix] + local)

    def compact(self, iri: Iri) -> str:
        """Shortest valid prefixed form of ``iri``, or ``<iri>``."""
        best: str | None = None
        for prefix, ns in sorted(self._map.items()):
            if iri.value.startswith(ns):
                local = iri.value[len(ns):]
                if _LOCAL_RE.match(local):
                    cand = f"{prefix}:{local}"
                    if best is None or len(cand) < len(best):
                        best = cand
        return best if best is not None else f"<{iri.value}>"


def env_prefixes() -> dict[str, str]:
    """Extra prefixes from the file named by ``PMDT_PREFIXES``.

    One ``prefix namespace`` pair per line; blank lines and ``#`` comments
    are ignored. A trailing colon on the prefix is tolerated.
    """
    path = os.environ.get("PMDT_PREFIXES")
    if not path:
        return {}
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise PmdtError(f"{path}:{lineno}: expected 'prefix namespace'", "invalid-prefix")
            prefix, ns = parts
            out[prefix.rstrip(":")] = ns.strip("<>")
    return out


def iri_set(prefixes: PrefixMap, names: Iterable[str]) -> frozenset[Iri]:
    return frozenset(prefixes.resolve(n) for n in names)


def pmdt(local: str) -> Iri:
    return Iri(PMDT + local)


def ex(local: str) -> Iri:
    return Iri(EX + local)
