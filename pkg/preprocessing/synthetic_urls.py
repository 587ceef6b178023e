"""
    Two generated URL families that differ only in their byte statistics, used to check
    the whole pipeline when real blacklists and access logs are not at hand.

    benign:     dictionary-word hosts on common TLDs, shallow word paths
    malicious:  hex-heavy hosts on cheap TLDs, deep token-laden paths with query strings
"""
import csv
import pathlib
from typing import Tuple

import numpy as np

from basics.base_url_source import BENIGN, MALICIOUS, Dataset, LabeledUrl
from preprocessing.url_datasets import SECONDS_PER_HOUR
from utils import atomic_write

WORDS = [
    'news', 'mail', 'shop', 'blog', 'cloud', 'music', 'photo', 'travel', 'garden', 'sport',
    'library', 'weather', 'market', 'school', 'health', 'video', 'forum', 'search', 'maps', 'wiki',
    'store', 'coffee', 'books', 'city', 'river', 'green', 'daily', 'open', 'kitchen', 'games',
    'energy', 'office', 'museum', 'radio', 'journal', 'planet', 'studio', 'family', 'career', 'event',
]
PAGES = ['index.html', 'about', 'contact', 'home', 'articles', 'products', 'help', '']
BENIGN_TLDS = ['com', 'org', 'net', 'jp', 'edu', 'co.uk', 'de']
MALICIOUS_TLDS = ['tk', 'ml', 'ga', 'cf', 'gq', 'xyz', 'top']
TOKENS = ['login', 'verify', 'secure', 'account', 'update', 'webscr', 'signin', 'confirm', 'wp-admin', 'cmd']
HEX = '0123456789abcdef'

EPOCH_START = 1493078400  # 2017-04-25T00:00:00Z


def _hex(rng: np.random.Generator, n: int) -> str:
    return ''.join(HEX[i] for i in rng.integers(0, 16, size=n))


def _pick(rng: np.random.Generator, items):
    return items[int(rng.integers(0, len(items)))]


def benign_url(rng: np.random.Generator) -> str:
    host = ''.join(_pick(rng, WORDS) for _ in range(int(rng.integers(1, 3))))
    if rng.random() < 0.6:
        host = 'www.' + host
    host = f'{host}.{_pick(rng, BENIGN_TLDS)}'
    depth = int(rng.integers(0, 3))
    path = ''.join('/' + _pick(rng, WORDS) for _ in range(depth)) + '/' + _pick(rng, PAGES)
    scheme = 'https' if rng.random() < 0.5 else 'http'
    return f'{scheme}://{host}{path}'


def malicious_url(rng: np.random.Generator) -> str:
    labels = [_hex(rng, int(rng.integers(6, 14))) for _ in range(int(rng.integers(1, 4)))]
    host = '.'.join(labels) + '.' + _pick(rng, MALICIOUS_TLDS)
    depth = int(rng.integers(3, 7))
    segments = []
    for _ in range(depth):
        if rng.random() < 0.5:
            segments.append(_pick(rng, TOKENS))
        else:
            segments.append(_hex(rng, int(rng.integers(8, 24))))
    query = '&'.join(f'{_pick(rng, TOKENS)}={_hex(rng, int(rng.integers(8, 32)))}'
                     for _ in range(int(rng.integers(1, 4))))
    return f'http://{host}/' + '/'.join(segments) + f'/index.php?{query}'


def generate_synthetic(per_class: int, seed: int) -> Dataset:
    """per_class benign URLs followed by per_class malicious URLs (unshuffled)."""
    rng = np.random.default_rng(seed)
    entries = [LabeledUrl(url=benign_url(rng), label=BENIGN) for _ in range(per_class)]
    entries += [LabeledUrl(url=malicious_url(rng), label=MALICIOUS) for _ in range(per_class)]
    return Dataset(entries=entries, provenance=f'synthetic(per_class={per_class}, seed={seed})')


def write_synthetic_sources(out_dir, per_class: int, seed: int, hours: int = 24) -> Tuple[pathlib.Path, pathlib.Path]:
    """
    Write a PhishTank-shaped csv of malicious URLs and a one-day access log of benign URLs
    (spread evenly over `hours` hour buckets), so that `dataset prepare` can be run end to end.
    :return: (blacklist csv path, access log path)
    """
    out_dir = pathlib.Path(out_dir)
    d = generate_synthetic(per_class, seed)
    rng = np.random.default_rng(seed + 1)
    blacklist = out_dir / 'blacklist.csv'
    with atomic_write(blacklist, newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['phish_id', 'url', 'submission_time'])
        for i, e in enumerate(x for x in d if x.label == MALICIOUS):
            writer.writerow([i + 1, e.url, '2017-04-24T00:00:00+00:00'])
    access_log = out_dir / 'access.log'
    with atomic_write(access_log) as f:
        for i, e in enumerate(x for x in d if x.label == BENIGN):
            ts = EPOCH_START + (i % hours) * SECONDS_PER_HOUR + int(rng.integers(0, SECONDS_PER_HOUR))
            f.write(f'{ts}\t{e.url}\n')
    return blacklist, access_log
