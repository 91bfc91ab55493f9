"""Decision-table data model plus ARFF/CSV parsing and serialization.

The table is a fixed schema of nominal and numeric attributes with exactly
one binary nominal class attribute, and a tuple of conforming instances.
Nominal cells are stored as integer indexes into the attribute's declared
domain, numeric cells as finite floats, missing cells as None.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

NOMINAL = "nominal"
NUMERIC = "numeric"

PREDICTOR = "predictor"
CLASS = "class"

# attribute type keywords accepted in declarations; all collapse to NUMERIC
_NUMERIC_KEYWORDS = {"numeric", "real", "integer"}

MISSING_TOKEN = "?"


class DataError(ValueError):
    """Invalid dataset content, schema, or operation preconditions."""


class ParseError(DataError):
    """Malformed input text; carries the offending position when known."""

    def __init__(self, message, line=None, column=None):
        prefix = ""
        if line is not None:
            prefix = f"line {line}"
            if column is not None:
                prefix += f", column {column}"
            prefix += ": "
        super().__init__(prefix + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class AttributeSchema:
    """One attribute: a name, a kind, and (for nominals) an ordered domain."""

    name: str
    kind: str
    values: tuple[str, ...] = ()
    role: str = PREDICTOR

    def __post_init__(self):
        if self.kind not in (NOMINAL, NUMERIC):
            raise DataError(f"unknown attribute kind {self.kind!r}")
        if self.role not in (PREDICTOR, CLASS):
            raise DataError(f"unknown attribute role {self.role!r}")
        if self.kind == NOMINAL:
            if not self.values:
                raise DataError(f"nominal attribute {self.name!r} declares an empty domain")
            if len(set(self.values)) != len(self.values):
                raise DataError(f"nominal attribute {self.name!r} declares duplicate values")
        elif self.values:
            raise DataError(f"numeric attribute {self.name!r} cannot declare a domain")

    def index_of(self, token: str) -> int:
        """Domain index of a nominal value token."""
        try:
            return self.values.index(token)
        except ValueError:
            raise DataError(
                f"value {token!r} is not in the domain of attribute {self.name!r}"
            ) from None


@dataclass(frozen=True)
class Instance:
    """One row; values align positionally with the dataset schema."""

    values: tuple


class Dataset:
    """Immutable decision table: schema, instances, and a relation name.

    Construction validates everything downstream code relies on: exactly
    one class attribute, a binary nominal class, positionally conforming
    instance values (in-domain symbol indexes, finite reals), and no
    missing class values.
    """

    def __init__(self, schema, instances, relation: str = "dataset"):
        self.schema = tuple(schema)
        self.instances = tuple(instances)
        self.relation = relation
        self._validate()

    def _validate(self):
        names = [a.name for a in self.schema]
        if len(set(names)) != len(names):
            raise DataError("attribute names must be unique")
        class_positions = [i for i, a in enumerate(self.schema) if a.role == CLASS]
        if len(class_positions) != 1:
            raise DataError(
                f"expected exactly one class attribute, found {len(class_positions)}"
            )
        ci = class_positions[0]
        cattr = self.schema[ci]
        if cattr.kind != NOMINAL or len(cattr.values) != 2:
            raise DataError("the class attribute must be nominal with exactly two values")
        self._class_index = ci
        for n, inst in enumerate(self.instances):
            if len(inst.values) != len(self.schema):
                raise DataError(
                    f"instance {n} has {len(inst.values)} values, schema expects {len(self.schema)}"
                )
            for attr_pos, (attr, v) in enumerate(zip(self.schema, inst.values)):
                if v is None:
                    if attr_pos == ci:
                        raise DataError(f"instance {n} has a missing class value")
                    continue
                if attr.kind == NOMINAL:
                    if isinstance(v, bool) or not isinstance(v, int):
                        raise DataError(
                            f"instance {n}: nominal attribute {attr.name!r} needs an int index"
                        )
                    if not 0 <= v < len(attr.values):
                        raise DataError(
                            f"instance {n}: symbol index {v} out of range for {attr.name!r}"
                        )
                else:
                    if isinstance(v, bool) or not isinstance(v, (int, float)):
                        raise DataError(
                            f"instance {n}: numeric attribute {attr.name!r} needs a real value"
                        )
                    if not math.isfinite(v):
                        raise DataError(
                            f"instance {n}: non-finite value for {attr.name!r}"
                        )

    # -- identity ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.instances)

    def __eq__(self, other) -> bool:
        # relation name is presentation, not data; two tables are equal when
        # their schemas and values agree
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.schema == other.schema and self.instances == other.instances

    def __repr__(self):
        return (
            f"Dataset({self.relation!r}, {len(self.instances)} instances, "
            f"{len(self.schema)} attributes)"
        )

    # -- schema views ------------------------------------------------------

    @property
    def class_index(self) -> int:
        return self._class_index

    @property
    def class_attribute(self) -> AttributeSchema:
        return self.schema[self._class_index]

    @property
    def class_labels(self) -> tuple[str, ...]:
        return self.class_attribute.values

    @cached_property
    def predictor_indices(self) -> tuple[int, ...]:
        return tuple(i for i, a in enumerate(self.schema) if a.role == PREDICTOR)

    @cached_property
    def nominal_predictor_indices(self) -> tuple[int, ...]:
        return tuple(i for i in self.predictor_indices if self.schema[i].kind == NOMINAL)

    @cached_property
    def numeric_predictor_indices(self) -> tuple[int, ...]:
        return tuple(i for i in self.predictor_indices if self.schema[i].kind == NUMERIC)

    def attribute_index(self, name: str) -> int:
        for i, a in enumerate(self.schema):
            if a.name == name:
                return i
        raise DataError(f"no attribute named {name!r}")

    # -- array views (missing: -1 in codes, nan in numerics) ---------------

    @cached_property
    def _codes_matrix(self) -> np.ndarray:
        cols = self.nominal_predictor_indices
        out = np.empty((len(self.instances), len(cols)), dtype=np.int64)
        for j, ai in enumerate(cols):
            out[:, j] = [
                -1 if inst.values[ai] is None else inst.values[ai] for inst in self.instances
            ]
        return out

    @cached_property
    def _numeric_matrix(self) -> np.ndarray:
        cols = self.numeric_predictor_indices
        out = np.empty((len(self.instances), len(cols)), dtype=np.float64)
        for j, ai in enumerate(cols):
            out[:, j] = [
                np.nan if inst.values[ai] is None else inst.values[ai]
                for inst in self.instances
            ]
        return out

    def codes_matrix(self) -> np.ndarray:
        """Nominal predictor columns as int codes, missing as -1. Copy."""
        return self._codes_matrix.copy()

    def numeric_matrix(self) -> np.ndarray:
        """Numeric predictor columns as floats, missing as nan. Copy."""
        return self._numeric_matrix.copy()

    def class_codes(self) -> np.ndarray:
        """Class column as int codes (never missing)."""
        return np.fromiter(
            (inst.values[self._class_index] for inst in self.instances),
            dtype=np.int64,
            count=len(self.instances),
        )

    # -- construction helpers ----------------------------------------------

    def subset(self, indices) -> "Dataset":
        """New table with the rows at `indices`, in the given order."""
        inst = self.instances
        return Dataset(self.schema, [inst[i] for i in indices], self.relation)

    def replace_instances(self, instances) -> "Dataset":
        return Dataset(self.schema, instances, self.relation)


def class_counts(d: Dataset) -> dict[str, int]:
    """Instance count per class value, keyed in declaration order.

    Classes with no instances still appear with count 0.
    """
    labels = d.class_labels
    counts = dict.fromkeys(labels, 0)
    ci = d.class_index
    for inst in d.instances:
        counts[labels[inst.values[ci]]] += 1
    return counts


def missing_census(d: Dataset) -> dict[str, int]:
    """Missing-cell count per attribute name, only attributes that have any."""
    out: dict[str, int] = {}
    for i, a in enumerate(d.schema):
        n = sum(1 for inst in d.instances if inst.values[i] is None)
        if n:
            out[a.name] = n
    return out


def impute_missing(d: Dataset, strategy: str = "mean-or-mode") -> Dataset:
    """Resolve missing predictor values.

    strategy "mean-or-mode": numerics get the attribute mean over non-missing
    values, nominals the most frequent value (ties toward the earlier domain
    value). strategy "drop-instance": rows with any missing value are removed.
    """
    if strategy == "drop-instance":
        keep = [i for i, inst in enumerate(d.instances) if None not in inst.values]
        return d.subset(keep)
    if strategy != "mean-or-mode":
        raise DataError(f"unknown imputation strategy {strategy!r}")

    fills: dict[int, float | int] = {}
    for i, a in enumerate(d.schema):
        col = [inst.values[i] for inst in d.instances]
        if None not in col:
            continue
        present = [v for v in col if v is not None]
        if not present:
            raise DataError(f"attribute {a.name!r} has no observed values to impute from")
        if a.kind == NUMERIC:
            fills[i] = float(sum(present)) / len(present)
        else:
            counts = [0] * len(a.values)
            for v in present:
                counts[v] += 1
            fills[i] = max(range(len(counts)), key=lambda k: (counts[k], -k))
    if not fills:
        return d
    new_rows = []
    for inst in d.instances:
        vals = list(inst.values)
        for i, fill in fills.items():
            if vals[i] is None:
                vals[i] = fill
        new_rows.append(Instance(tuple(vals)))
    return d.replace_instances(new_rows)


# -- ARFF -------------------------------------------------------------------


def _strip_comment(raw: str) -> str:
    pos = raw.find("%")
    return raw if pos < 0 else raw[:pos]


def _parse_attribute_decl(rest: str, lineno: int) -> AttributeSchema:
    rest = rest.strip()
    if not rest:
        raise ParseError("attribute declaration needs a name and a type", line=lineno)
    if rest[0] in "'\"":
        quote = rest[0]
        end = rest.find(quote, 1)
        if end < 0:
            raise ParseError("unterminated quoted attribute name", line=lineno)
        name = rest[1:end]
        spec = rest[end + 1 :].strip()
    else:
        brace = rest.find("{")
        head = rest if brace < 0 else rest[:brace]
        parts = head.split(None, 1)
        name = parts[0]
        spec = (parts[1] if len(parts) > 1 else "") + ("" if brace < 0 else rest[brace:])
        spec = spec.strip()
    if not name:
        raise ParseError("empty attribute name", line=lineno)
    if not spec:
        raise ParseError(f"attribute {name!r} declares no type", line=lineno)
    if spec.startswith("{"):
        if not spec.endswith("}"):
            raise ParseError(f"attribute {name!r}: unterminated nominal domain", line=lineno)
        tokens = [t.strip() for t in spec[1:-1].split(",")]
        if any(not t for t in tokens):
            raise ParseError(f"attribute {name!r}: empty nominal value", line=lineno)
        try:
            return AttributeSchema(name, NOMINAL, tuple(tokens))
        except DataError as e:
            raise ParseError(str(e), line=lineno) from None
    if spec.lower() in _NUMERIC_KEYWORDS:
        return AttributeSchema(name, NUMERIC)
    raise ParseError(f"attribute {name!r} has unsupported type {spec!r}", line=lineno)


def _split_data_line(line: str) -> list[tuple[str, int]]:
    """Comma-split a data row, keeping each field's 1-based start column."""
    fields = []
    start = 0
    while True:
        pos = line.find(",", start)
        if pos < 0:
            fields.append((line[start:], start + 1))
            return fields
        fields.append((line[start:pos], start + 1))
        start = pos + 1


def _convert_token(token: str, attr: AttributeSchema, line: int, column: int):
    if token == MISSING_TOKEN:
        return None
    if attr.kind == NOMINAL:
        try:
            return attr.index_of(token)
        except DataError as e:
            raise ParseError(str(e), line=line, column=column) from None
    try:
        value = float(token)
    except ValueError:
        raise ParseError(
            f"invalid numeric literal {token!r} for attribute {attr.name!r}",
            line=line,
            column=column,
        ) from None
    if not math.isfinite(value):
        raise ParseError(
            f"non-finite numeric value for attribute {attr.name!r}", line=line, column=column
        )
    return value


def _assign_class(schema: list[AttributeSchema], class_attribute: str | None):
    names = [a.name for a in schema]
    target = class_attribute if class_attribute is not None else names[-1]
    if target not in names:
        raise DataError(f"class attribute {target!r} not found in the schema")
    out = []
    for a in schema:
        role = CLASS if a.name == target else PREDICTOR
        out.append(AttributeSchema(a.name, a.kind, a.values, role))
    return out


def parse_arff(source, class_attribute: str | None = None) -> Dataset:
    """Parse an ARFF document (string or text file object) into a Dataset.

    Supported subset: @relation, @attribute with a nominal domain or a
    numeric type keyword, @data with comma-separated rows, '%' comments,
    '?' for missing values. Keywords are case-insensitive. The last
    attribute is the class unless `class_attribute` names another.
    """
    text = source.read() if hasattr(source, "read") else source
    relation = "dataset"
    schema: list[AttributeSchema] = []
    rows: list[Instance] = []
    in_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if not in_data:
            low = line.lower()
            if low.startswith("@relation"):
                relation = line[len("@relation") :].strip().strip("'\"") or relation
            elif low.startswith("@attribute"):
                schema.append(_parse_attribute_decl(line[len("@attribute") :], lineno))
            elif low.startswith("@data"):
                if not schema:
                    raise ParseError("@data before any attribute declaration", line=lineno)
                in_data = True
            else:
                raise ParseError(f"unrecognized declaration {line.split()[0]!r}", line=lineno)
            continue
        fields = _split_data_line(line)
        if len(fields) != len(schema):
            raise ParseError(
                f"row has {len(fields)} values, schema expects {len(schema)}", line=lineno
            )
        values = tuple(
            _convert_token(tok.strip(), attr, lineno, col)
            for (tok, col), attr in zip(fields, schema)
        )
        rows.append(Instance(values))
    if not in_data:
        raise ParseError("missing @data section")
    return Dataset(_assign_class(schema, class_attribute), rows, relation)


def _format_value(attr: AttributeSchema, v) -> str:
    if v is None:
        return MISSING_TOKEN
    if attr.kind == NOMINAL:
        return attr.values[v]
    return repr(float(v))


def to_arff(d: Dataset) -> str:
    """Serialize to ARFF; re-parsing the result reproduces the dataset."""
    out = [f"@relation {d.relation}"]
    for a in d.schema:
        if a.kind == NOMINAL:
            out.append(f"@attribute {a.name} {{{','.join(a.values)}}}")
        else:
            out.append(f"@attribute {a.name} numeric")
    out.append("@data")
    for inst in d.instances:
        out.append(",".join(_format_value(a, v) for a, v in zip(d.schema, inst.values)))
    return "\n".join(out) + "\n"


# -- CSV --------------------------------------------------------------------


def parse_csv(source, schema, class_attribute: str | None = None,
              relation: str = "dataset") -> Dataset:
    """Parse CSV rows against an externally supplied schema.

    The header row must repeat the schema's attribute names in order.
    Values follow the same rules as ARFF rows ('?' for missing).
    """
    text = source.read() if hasattr(source, "read") else source
    schema = list(schema)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty document, expected a header row") from None
    names = [a.name for a in schema]
    got = [h.strip() for h in header]
    if got != names:
        raise ParseError(
            f"header {got!r} does not match the expected attribute names {names!r}", line=1
        )
    rows = []
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        lineno = reader.line_num
        if len(row) != len(schema):
            raise ParseError(
                f"row has {len(row)} values, schema expects {len(schema)}", line=lineno
            )
        values = tuple(
            _convert_token(tok.strip(), attr, lineno, col + 1)
            for col, (tok, attr) in enumerate(zip(row, schema))
        )
        rows.append(Instance(values))
    return Dataset(_assign_class(schema, class_attribute), rows, relation)


def to_csv(d: Dataset) -> str:
    """Serialize to CSV (header row plus data rows, '?' for missing)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([a.name for a in d.schema])
    for inst in d.instances:
        writer.writerow([_format_value(a, v) for a, v in zip(d.schema, inst.values)])
    return buf.getvalue()
