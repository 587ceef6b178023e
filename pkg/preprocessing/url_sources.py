"""
    Readers for the three raw URL sources:
        PhishTank dump:  csv with a header row containing `url` (and usually `submission_time`)
        URL list:        one URL per line, blank lines and `#` comments ignored
        access log:      `epoch_seconds<TAB>url` per line
"""
import csv
import datetime
from typing import Iterator, Optional

from basics.base_url_source import BENIGN, MALICIOUS, BaseUrlSource, Dataset, LabeledUrl
from utils.errors import DatasetSchemaError, InvalidInputError


def to_utc(moment) -> datetime.datetime:
    if isinstance(moment, str):
        try:
            moment = parse_timestamp(moment)
        except ValueError:
            raise InvalidInputError(f'\'{moment}\' is not an ISO 8601 date or date/time.') from None
    elif not isinstance(moment, datetime.datetime):
        moment = datetime.datetime(moment.year, moment.month, moment.day)
    if moment.tzinfo is None:
        return moment.replace(tzinfo=datetime.timezone.utc)
    return moment.astimezone(datetime.timezone.utc)


def has_line_break(url: str) -> bool:
    return '\n' in url or '\r' in url


def parse_timestamp(text: str) -> datetime.datetime:
    text = text.strip()
    if text.endswith('Z'):
        text = text[:-1] + '+00:00'
    return to_utc(datetime.datetime.fromisoformat(text))


class PhishTankCsvSource(BaseUrlSource):
    newline = ''

    def __init__(self, reported_before=None):
        super().__init__()
        self.reported_before: Optional[datetime.datetime] = \
            to_utc(reported_before) if reported_before is not None else None

    def describe(self, path):
        if self.reported_before is None:
            return f'phishtank({path})'
        return f'phishtank({path}, reported before {self.reported_before.isoformat()})'

    def parse(self, f) -> Iterator[LabeledUrl]:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or 'url' not in reader.fieldnames:
            raise DatasetSchemaError(f'PhishTank csv needs a \'url\' column, got header {reader.fieldnames}.')
        use_cutoff = self.reported_before is not None and 'submission_time' in reader.fieldnames
        for row in reader:
            line_no = reader.line_num
            url = (row.get('url') or '').strip()
            if url == '':
                self.skip('empty url', line_no)
                continue
            if has_line_break(url):
                self.skip('line break inside url', line_no)
                continue
            if use_cutoff:
                try:
                    submitted = parse_timestamp(row.get('submission_time') or '')
                except ValueError:
                    self.skip('unparseable submission_time', line_no)
                    continue
                if submitted >= self.reported_before:
                    continue
            yield LabeledUrl(url=url, label=MALICIOUS)


class UrlListSource(BaseUrlSource):
    def __init__(self, label: int):
        super().__init__()
        self.label = label

    def describe(self, path):
        return f'url-list({path}, label={self.label})'

    def parse(self, f) -> Iterator[LabeledUrl]:
        for line in f:
            url = line.strip()
            if url == '' or url.startswith('#'):
                continue
            yield LabeledUrl(url=url, label=self.label)


class AccessLogSource(BaseUrlSource):
    def describe(self, path):
        return f'access-log({path})'

    def parse(self, f) -> Iterator[LabeledUrl]:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip('\r\n')
            if line.strip() == '':
                continue
            fields = line.split('\t', maxsplit=1)
            if len(fields) != 2 or fields[1].strip() == '':
                self.skip('expected epoch<TAB>url', line_no)
                continue
            try:
                timestamp = int(fields[0])
            except ValueError:
                try:
                    timestamp = int(float(fields[0]))
                except (ValueError, OverflowError):
                    self.skip('bad epoch seconds', line_no)
                    continue
            yield LabeledUrl(url=fields[1].strip(), label=BENIGN, timestamp=timestamp)


def load_phishtank_csv(path, reported_before=None) -> Dataset:
    return PhishTankCsvSource(reported_before=reported_before).load(path)


def load_url_list(path, label: int) -> Dataset:
    return UrlListSource(label).load(path)


def load_access_log(path) -> Dataset:
    return AccessLogSource().load(path)
