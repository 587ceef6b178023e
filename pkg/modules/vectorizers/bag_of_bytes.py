"""
    Bag-of-bytes URL vectors.

    A URL is split into its host part and its path part. For each part we collect
    every character byte plus one "overlap" byte per neighbouring pair (the low
    nibble of the earlier byte followed by the high nibble of the later byte),
    count the values into a 256-bin histogram and scale the histogram to unit
    Euclidean norm. Host half and path half are concatenated into 512 values.
"""
from typing import Iterable, List, NamedTuple, Sequence, Union

import numpy as np
from tqdm import tqdm

from utils.errors import InvalidInputError
from utils.multiprocess_utils import chunked_multiprocess_run

NUM_BINS = 256
VECTOR_SIZE = 2 * NUM_BINS
SCHEME_SEPARATOR = b'://'


class ParsedUrl(NamedTuple):
    host: bytes
    path: bytes


def to_bytes(url: Union[str, bytes]) -> bytes:
    """
    URLs are opaque byte strings. Text is encoded as UTF-8; surrogate escapes
    (from files read with ``errors='surrogateescape'``) map back to their raw bytes.
    """
    if isinstance(url, (bytes, bytearray, memoryview)):
        return bytes(url)
    return url.encode('utf-8', errors='surrogateescape')


def split_url(url: Union[str, bytes]) -> ParsedUrl:
    raw = to_bytes(url)
    if len(raw) == 0:
        raise InvalidInputError('Cannot split an empty URL.')
    scheme_end = raw.find(SCHEME_SEPARATOR)
    host_start = 0 if scheme_end < 0 else scheme_end + len(SCHEME_SEPARATOR)
    path_start = raw.find(b'/', host_start)
    if path_start < 0:
        return ParsedUrl(host=raw[host_start:], path=b'')
    return ParsedUrl(host=raw[host_start:path_start], path=raw[path_start:])


def extract_bytes(s: bytes) -> np.ndarray:
    """
    :param s: raw bytes of one URL part
    :return: uint8 array of the n character bytes followed by the n-1 overlap bytes
    """
    chars = np.frombuffer(to_bytes(s), dtype=np.uint8)
    if chars.size < 2:
        return chars.copy()
    overlaps = ((chars[:-1] & 0x0F) << 4) | (chars[1:] >> 4)
    return np.concatenate([chars, overlaps.astype(np.uint8)])


def histogram(values: Union[np.ndarray, Sequence[int]]) -> np.ndarray:
    values = np.asarray(values, dtype=np.int64)
    if values.size and (values.min() < 0 or values.max() >= NUM_BINS):
        raise InvalidInputError('Byte values must lie in [0, 255].')
    return np.bincount(values, minlength=NUM_BINS).astype(np.int64)


def normalize(counts: np.ndarray) -> np.ndarray:
    counts = counts.astype(np.float64)
    norm = np.linalg.norm(counts)
    if norm == 0.:
        return counts
    return counts / norm


def vectorize(url: Union[str, bytes]) -> np.ndarray:
    """
    :return: float64 array of shape [512]; [0, 256) is the host half, [256, 512) the path half
    """
    parsed = split_url(url)
    host_half = normalize(histogram(extract_bytes(parsed.host)))
    path_half = normalize(histogram(extract_bytes(parsed.path)))
    return np.concatenate([host_half, path_half])


def _vectorize_item(url):
    return vectorize(url)


class BagOfBytesVectorizer:
    """Turns lists of URLs into [N, 512] matrices, optionally with worker processes."""

    def __init__(self, num_workers: int = 0, show_progress: bool = False):
        self.num_workers = max(int(num_workers or 0), 0)
        self.show_progress = show_progress

    def __call__(self, url: Union[str, bytes]) -> np.ndarray:
        return vectorize(url)

    def transform(self, urls: Iterable[Union[str, bytes]]) -> np.ndarray:
        urls: List = list(urls)
        out = np.zeros((len(urls), VECTOR_SIZE), dtype=np.float64)
        if self.num_workers > 0 and len(urls) > 1:
            results = chunked_multiprocess_run(
                _vectorize_item, [[u] for u in urls], num_workers=self.num_workers
            )
        else:
            results = (vectorize(u) for u in urls)
        for i, vec in enumerate(tqdm(results, total=len(urls), desc='| vectorize',
                                     disable=not self.show_progress, leave=False)):
            out[i] = vec
        return out
