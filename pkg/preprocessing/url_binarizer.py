"""
    item: one LabeledUrl
    blacklist: PhishTank dump (malicious)
    whitelist log: access log (benign, timestamped)
    cleanse list: PhishTank dump used to scrub the whitelist; may be newer than the blacklist
"""
import logging
import pathlib
from typing import Optional, Tuple

import numpy as np

from basics.base_url_source import Dataset
from preprocessing.url_datasets import (
    balance_sample, cleanse, dedup_by_url, describe_dataset,
    merge_shuffle, merge_shuffle_split, save_dataset
)
from preprocessing.url_sources import load_access_log, load_phishtank_csv
from utils.errors import SamplingError


class UrlBinarizer:
    """
        Builds balanced benign/malicious URL datasets.
        1. *load*:
            read the blacklist, the whitelist access log and the cleanse list;
        2. *balanced_classes*:
            scrub the whitelist with the cleanse list and sample it hour by hour down to
            the blacklist size;
        3. *process*:
            shuffle both classes together and write a train/validation split;
        4. *process_prediction_set*:
            write both classes shuffled together without a split (a later capture that
            is only used to score an already-trained model).
    """

    def __init__(self, blacklist_path, whitelist_log_path, cleanse_with_path=None,
                 per_hour: int = 10000, size: Optional[int] = None, seed: int = 1234,
                 reported_before=None, cleanse_reported_before=None, dedup: bool = False):
        self.blacklist_path = pathlib.Path(blacklist_path)
        self.whitelist_log_path = pathlib.Path(whitelist_log_path)
        self.cleanse_with_path = pathlib.Path(cleanse_with_path) if cleanse_with_path else None
        self.per_hour = per_hour
        self.size = size
        self.seed = seed
        self.reported_before = reported_before
        self.cleanse_reported_before = cleanse_reported_before
        self.dedup = dedup

        self.blacklist: Optional[Dataset] = None
        self.whitelist_log: Optional[Dataset] = None
        self.cleanse_list: Optional[Dataset] = None

    def load(self):
        self.blacklist = load_phishtank_csv(self.blacklist_path, reported_before=self.reported_before)
        self.whitelist_log = load_access_log(self.whitelist_log_path)
        if self.cleanse_with_path is not None:
            self.cleanse_list = load_phishtank_csv(
                self.cleanse_with_path, reported_before=self.cleanse_reported_before
            )
        else:
            self.cleanse_list = self.blacklist
        if self.dedup:
            self.blacklist = dedup_by_url(self.blacklist)

    def balanced_classes(self) -> Tuple[Dataset, Dataset]:
        if self.blacklist is None:
            self.load()
        white = cleanse(self.whitelist_log, self.cleanse_list)
        if self.dedup:
            white = dedup_by_url(white)
        if self.size is not None and self.size > len(self.blacklist):
            raise SamplingError(
                f'Requested {self.size} entries per class but the blacklist has only {len(self.blacklist)}.'
            )
        target = self.size if self.size is not None else len(self.blacklist)
        white = balance_sample(white, per_hour=self.per_hour, target_size=target, seed=self.seed)
        black = self.blacklist
        if self.size is not None and self.size < len(black):
            black = balance_black(black, self.size, self.seed)
        logging.info(f'| classes: blacklist {len(black)}, whitelist {len(white)}')
        return black, white

    def process(self, out_train, out_val, train_fraction: float = 0.8) -> Tuple[Dataset, Dataset]:
        black, white = self.balanced_classes()
        train, val = merge_shuffle_split(black, white, train_fraction=train_fraction, seed=self.seed)
        save_dataset(train, out_train)
        save_dataset(val, out_val)
        print(f'| train: {len(train)} ({describe_dataset(train)}) -> {out_train}')
        print(f'| valid: {len(val)} ({describe_dataset(val)}) -> {out_val}')
        return train, val

    def process_prediction_set(self, out_all) -> Dataset:
        black, white = self.balanced_classes()
        merged = merge_shuffle(black, white, seed=self.seed)
        save_dataset(merged, out_all)
        print(f'| prediction set: {len(merged)} ({describe_dataset(merged)}) -> {out_all}')
        return merged


def balance_black(black: Dataset, size: int, seed: int) -> Dataset:
    """Down-sample the blacklist so both classes have `size` entries."""
    chosen = sorted(np.random.default_rng(seed + 1).choice(len(black), size=size, replace=False))
    return black.derive([black.entries[i] for i in chosen], f'sample(size={size}, seed={seed})')
