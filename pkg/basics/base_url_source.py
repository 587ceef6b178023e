import logging
import pathlib
from dataclasses import dataclass, field
from typing import Iterator, List, Optional

from utils import open_text
from utils.errors import InvalidInputError

BENIGN = 0
MALICIOUS = 1
LABEL_NAMES = {BENIGN: 'benign', MALICIOUS: 'malicious'}


@dataclass(frozen=True)
class LabeledUrl:
    url: str
    label: int
    timestamp: Optional[int] = None

    def __post_init__(self):
        if not self.url:
            raise InvalidInputError('A labeled URL cannot be empty.')
        if self.label not in LABEL_NAMES:
            raise InvalidInputError(f'Invalid label {self.label!r}; expected 0 (benign) or 1 (malicious).')


@dataclass
class Dataset:
    entries: List[LabeledUrl] = field(default_factory=list)
    provenance: str = ''
    skipped: int = 0

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[LabeledUrl]:
        return iter(self.entries)

    @property
    def urls(self) -> List[str]:
        return [e.url for e in self.entries]

    @property
    def labels(self) -> List[int]:
        return [e.label for e in self.entries]

    def label_counts(self):
        counts = {label: 0 for label in LABEL_NAMES}
        for e in self.entries:
            counts[e.label] += 1
        return counts

    def derive(self, entries: List[LabeledUrl], step: str) -> 'Dataset':
        """A new dataset whose provenance records the transformation applied to this one."""
        provenance = f'{self.provenance} | {step}' if self.provenance else step
        return Dataset(entries=entries, provenance=provenance)


class BaseUrlSource:
    """
        Base class for URL list readers.
        *load* opens the file, hands it to *parse* and logs how many rows were kept
        and how many were skipped.

        Subclasses should define:
        1. *parse*:
            yield LabeledUrl entries from an open text file, calling *skip* for
            every row that cannot be used;
        2. *newline*:
            the newline mode the file has to be opened with ('' for csv).
    """
    newline: Optional[str] = None

    def __init__(self):
        self.skipped = 0

    def skip(self, reason: str, line_no: int):
        self.skipped += 1
        logging.debug(f'{self.__class__.__name__}: skipped line {line_no} ({reason})')

    def parse(self, f) -> Iterator[LabeledUrl]:
        raise NotImplementedError()

    def describe(self, path: pathlib.Path) -> str:
        return f'{self.__class__.__name__}({path})'

    def load(self, path) -> Dataset:
        path = pathlib.Path(path)
        self.skipped = 0
        with open_text(path, newline=self.newline) as f:
            entries = list(self.parse(f))
        if self.skipped > 0:
            logging.warning(f'| {path}: skipped {self.skipped} unusable line(s).')
        logging.info(f'| {path}: loaded {len(entries)} URL(s).')
        return Dataset(entries=entries, provenance=self.describe(path), skipped=self.skipped)
