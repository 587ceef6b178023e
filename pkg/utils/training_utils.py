import csv
import math
from typing import List, Optional

import numpy as np

from utils import atomic_write

CURVE_COLUMNS = ['epoch', 'train_loss', 'train_acc', 'val_loss', 'val_acc', 'seconds']


class MinibatchSampler:
    """
    Index batches over a training set of `num_samples` items. Every epoch draws a fresh
    permutation from the sampler's own random stream; the final short batch is kept.
    """

    def __init__(self, num_samples: int, batch_size: int, rng: np.random.Generator, shuffle: bool = True):
        self.num_samples = num_samples
        self.batch_size = batch_size
        self.rng = rng
        self.shuffle = shuffle

    def __len__(self):
        return math.ceil(self.num_samples / self.batch_size)

    def epoch_batches(self) -> List[np.ndarray]:
        if self.shuffle:
            indices = self.rng.permutation(self.num_samples)
        else:
            indices = np.arange(self.num_samples)
        return [indices[i:i + self.batch_size] for i in range(0, self.num_samples, self.batch_size)]


class CurveLogger:
    """
    Collects per-epoch learning-curve rows, optionally mirroring them as TensorBoard
    scalars (tr/loss, tr/acc, val/loss, val/acc).
    """

    def __init__(self, log_dir: Optional[str] = None):
        self.rows = []
        self.writer = None
        if log_dir:
            from tensorboardX import SummaryWriter
            self.writer = SummaryWriter(logdir=str(log_dir))

    def log(self, record):
        self.rows.append(record)
        if self.writer is not None:
            self.writer.add_scalar('tr/loss', record.train_loss, record.epoch)
            self.writer.add_scalar('tr/acc', record.train_acc, record.epoch)
            self.writer.add_scalar('val/loss', record.val_loss, record.epoch)
            self.writer.add_scalar('val/acc', record.val_acc, record.epoch)
            self.writer.add_scalar('time/seconds', record.seconds, record.epoch)

    def close(self):
        if self.writer is not None:
            self.writer.close()
            self.writer = None


def write_curve_csv(records, path):
    with atomic_write(path, newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CURVE_COLUMNS)
        for r in records:
            writer.writerow([r.epoch, repr(r.train_loss), repr(r.train_acc),
                             repr(r.val_loss), repr(r.val_acc), f'{r.seconds:.3f}'])
