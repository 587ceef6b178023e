import logging
import math
from collections import OrderedDict
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np

from basics.base_url_source import LABEL_NAMES, Dataset, LabeledUrl
from utils import atomic_write, open_text
from utils.errors import DatasetError, InvalidInputError, SamplingError

SECONDS_PER_HOUR = 3600


def hour_bucket(timestamp: int) -> int:
    """UTC hour since the epoch that a timestamp falls into."""
    return int(timestamp) // SECONDS_PER_HOUR


def dedup_by_url(d: Dataset) -> Dataset:
    seen = set()
    entries = []
    for e in d:
        if e.url in seen:
            continue
        seen.add(e.url)
        entries.append(e)
    return d.derive(entries, f'dedup({len(d) - len(entries)} removed)')


def cleanse(whitelist: Dataset, blacklist: Dataset) -> Dataset:
    """Drop every whitelist entry whose exact url string is listed in the blacklist."""
    black_urls = set(blacklist.urls)
    entries = [e for e in whitelist if e.url not in black_urls]
    logging.info(f'| cleanse: removed {len(whitelist) - len(entries)} of {len(whitelist)} whitelist entries.')
    return whitelist.derive(entries, f'cleanse({len(whitelist) - len(entries)} removed)')


def balance_sample(log: Dataset, per_hour: int, target_size: Optional[int], seed: int) -> Dataset:
    """
    Two-stage sampling without replacement:
        1. at most per_hour entries from every UTC hour bucket;
        2. target_size entries from the union of stage 1 (all of it when target_size is None).
    Selected entries keep their original order.
    """
    if per_hour < 1:
        raise InvalidInputError(f'per_hour must be positive, got {per_hour}.')
    buckets = OrderedDict()
    for i, e in enumerate(log):
        if e.timestamp is None:
            raise SamplingError(f'Entry {i} ({e.url}) has no timestamp; hourly sampling needs an access log.')
        buckets.setdefault(hour_bucket(e.timestamp), []).append(i)

    rng = np.random.default_rng(seed)
    picked = []
    for hour in sorted(buckets):
        indices = buckets[hour]
        if len(indices) <= per_hour:
            picked += indices
        else:
            chosen = rng.choice(len(indices), size=per_hour, replace=False)
            picked += [indices[j] for j in sorted(chosen)]
    picked.sort()
    logging.info(f'| balance: {len(picked)} entries picked from {len(buckets)} hour bucket(s).')

    if target_size is not None:
        if target_size > len(picked):
            raise SamplingError(
                f'Requested {target_size} entries but hourly sampling yielded only {len(picked)}.'
            )
        if target_size < 0:
            raise InvalidInputError(f'target_size must be non-negative, got {target_size}.')
        chosen = rng.choice(len(picked), size=target_size, replace=False)
        picked = [picked[j] for j in sorted(chosen)]

    entries = [log.entries[i] for i in picked]
    return log.derive(entries, f'balance(per_hour={per_hour}, size={len(entries)}, seed={seed})')


def train_count(total: int, train_fraction: float) -> int:
    # exact decimal arithmetic so that e.g. 100 * 0.29 floors to 29
    return math.floor(Fraction(repr(float(train_fraction))) * total)


def merge_shuffle(black: Dataset, white: Dataset, seed: int) -> Dataset:
    union = black.entries + white.entries
    if len(union) == 0:
        raise DatasetError('Cannot shuffle an empty union of datasets.')
    order = np.random.default_rng(seed).permutation(len(union))
    provenance = f'merge[{black.provenance}] + [{white.provenance}] shuffle(seed={seed})'
    return Dataset(entries=[union[i] for i in order], provenance=provenance)


def merge_shuffle_split(black: Dataset, white: Dataset, train_fraction: float,
                        seed: int) -> Tuple[Dataset, Dataset]:
    if not 0. < train_fraction < 1.:
        raise InvalidInputError(f'train_fraction must be in (0, 1), got {train_fraction}.')
    merged = merge_shuffle(black, white, seed)
    n_train = train_count(len(merged), train_fraction)
    train = merged.derive(merged.entries[:n_train], f'train split {train_fraction}')
    validation = merged.derive(merged.entries[n_train:], f'validation split {1 - train_fraction:.4g}')
    logging.info(f'| split: {len(train)} train / {len(validation)} validation.')
    return train, validation


def save_dataset(d: Dataset, path):
    """`label<TAB>url` per line, preceded by a `#` provenance comment."""
    with atomic_write(path) as f:
        if d.provenance:
            f.write(f'# {d.provenance}\n')
        for e in d:
            if '\n' in e.url or '\r' in e.url:
                raise DatasetError(f'Cannot save {e.url!r}: line breaks do not fit the label<TAB>url format.')
            f.write(f'{e.label}\t{e.url}\n')


def load_dataset(path) -> Dataset:
    entries = []
    provenance = ''
    with open_text(path) as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip('\r\n')
            if line.strip() == '':
                continue
            if line.startswith('#'):
                if not provenance:
                    provenance = line[1:].strip()
                continue
            fields = line.split('\t', maxsplit=1)
            if len(fields) != 2 or fields[0].strip() not in ('0', '1') or fields[1].strip() == '':
                raise DatasetError(f'{path}: line {line_no}: expected \'label<TAB>url\' with label 0 or 1.')
            entries.append(LabeledUrl(url=fields[1].strip(), label=int(fields[0])))
    return Dataset(entries=entries, provenance=provenance or str(path))


def describe_dataset(d: Dataset) -> str:
    counts = d.label_counts()
    return ', '.join(f'{LABEL_NAMES[k]}={v}' for k, v in counts.items())
