import csv
import io
import numbers


__all__ = ["ResultTable"]


def _format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return repr(float(value))
    return str(value)


def _parse_value(text):
    if text in ("true", "false"):
        return text == "true"
    for parse in (int, float):
        try:
            return parse(text)
        except ValueError:
            pass
    return text


class ResultTable:
    """Rows of one experiment, with the metadata needed to reproduce them.

    The CSV form starts with ``# key: value`` lines, followed by the header and the rows. Floats
    are written with :func:`repr`, so reading the CSV back yields bit-identical values; booleans
    are written as ``true`` and ``false``.

    Parameters
    ----------
    header : sequence of str
        Column names.
    rows : iterable of sequence
        Data rows of integers, reals, booleans or strings.
    metadata : dict of str to str
        Configuration echo, package version and other provenance.

    Raises
    ------
    :exc:`ValueError`
        If a row has a different length than the header.
    """
    def __init__(self, header, rows, *, metadata=None):
        header = tuple(header)
        if not header:
            raise ValueError("Result table must have at least one column")
        for name in header:
            if not isinstance(name, str) or not name or "," in name:
                raise TypeError(f"Column name must be a non-empty string without commas, "
                                f"not {name!r}")
        checked = []
        for row in rows:
            row = tuple(row)
            if len(row) != len(header):
                raise ValueError(f"Row must have {len(header)} values, not {len(row)}: {row!r}")
            checked.append(row)
        metadata = dict(metadata or {})
        for key, value in metadata.items():
            if not isinstance(key, str) or not key or ":" in key or "\n" in key:
                raise TypeError(f"Metadata key must be a non-empty string without colons or "
                                f"line breaks, not {key!r}")
            if "\n" in str(value):
                raise ValueError(f"Metadata value must not contain line breaks, not {value!r}")

        self._header   = header
        self._rows     = tuple(checked)
        self._metadata = {key: str(value) for key, value in metadata.items()}

    @property
    def header(self):
        return self._header

    @property
    def rows(self):
        return self._rows

    @property
    def metadata(self):
        return dict(self._metadata)

    def column(self, name):
        """Values of column ``name``, in row order."""
        try:
            index = self._header.index(name)
        except ValueError:
            raise KeyError(f"Result table has no column {name!r}") from None
        return [row[index] for row in self._rows]

    def to_csv(self):
        stream = io.StringIO()
        for key, value in self._metadata.items():
            stream.write(f"# {key}: {value}\n")
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(self._header)
        for row in self._rows:
            writer.writerow(map(_format_value, row))
        return stream.getvalue()

    @classmethod
    def from_csv(cls, text):
        """Read a table written by :meth:`to_csv`."""
        lines = text.splitlines()
        metadata = {}
        while lines and lines[0].startswith("#"):
            key, separator, value = lines.pop(0)[1:].partition(":")
            if not separator:
                raise ValueError(f"Metadata line must have the form '# key: value', "
                                 f"not {key!r}")
            metadata[key.strip()] = value.strip()
        records = list(csv.reader(lines))
        if not records:
            raise ValueError("Result table has no header row")
        header, *rows = records
        return cls(header, ([_parse_value(value) for value in row] for row in rows),
                   metadata=metadata)

    def __eq__(self, other):
        if not isinstance(other, ResultTable):
            return NotImplemented
        return (self._header == other._header and self._rows == other._rows and
                self._metadata == other._metadata)

    __hash__ = None

    def __repr__(self):
        return f"ResultTable({self._header!r}, rows={len(self._rows)})"
