import dataclasses
import logging
import time
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from basics.base_optimizer import OptimizerConfig
from basics.base_url_source import Dataset
from modules.losses.softmax_ce import softmax_cross_entropy
from modules.nn.mlp import EVAL, TRAIN, MlpModel, backward, forward, init_model, predict_labels
from modules.optimizers import OPTIMIZER_KINDS, build_optimizer, config_from_hparams, default_config
from modules.vectorizers.bag_of_bytes import BagOfBytesVectorizer
from utils.errors import DatasetError, InvalidInputError, NumericDivergenceError
from utils.training_utils import CurveLogger, MinibatchSampler

EVAL_CHUNK = 1000


@dataclass
class TrainConfig:
    batch_size: int = 100
    epochs: int = 20
    dropout_ratio: float = 0.75
    train_fraction: float = 0.8
    optimizer: OptimizerConfig = field(default_factory=lambda: default_config('adam'))
    seed: int = 1234
    input_size: int = 512
    hidden_size: int = 256
    num_classes: int = 2

    def __post_init__(self):
        if self.batch_size < 1:
            raise InvalidInputError(f'batch_size must be at least 1, got {self.batch_size}.')
        if self.epochs < 1:
            raise InvalidInputError(f'epochs must be at least 1, got {self.epochs}.')
        if not 0. <= self.dropout_ratio < 1.:
            raise InvalidInputError(f'dropout ratio must be in [0, 1), got {self.dropout_ratio}.')
        if not 0. < self.train_fraction < 1.:
            raise InvalidInputError(f'train_fraction must be in (0, 1), got {self.train_fraction}.')

    @classmethod
    def from_hparams(cls, hparams: dict, **overrides) -> 'TrainConfig':
        training = hparams.get('training', {})
        model = hparams.get('model', {})
        values = dict(
            batch_size=training.get('batch_size', 100),
            epochs=training.get('epochs', 20),
            dropout_ratio=model.get('dropout', 0.75),
            train_fraction=training.get('train_fraction', 0.8),
            optimizer=config_from_hparams(hparams.get('optimizer', {})),
            seed=hparams.get('seed', 1234),
            input_size=model.get('input_size', 512),
            hidden_size=model.get('hidden_size', 256),
            num_classes=model.get('num_classes', 2),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float
    seconds: float
    steps: int = 0


class OptimizerResult(NamedTuple):
    kind: str
    val_accuracy: float
    val_loss: float
    seconds: float


def dataset_arrays(d: Dataset, vectorizer: BagOfBytesVectorizer) -> Tuple[np.ndarray, np.ndarray]:
    if len(d) == 0:
        raise DatasetError(f'Dataset \'{d.provenance}\' is empty.')
    return vectorizer.transform(d.urls), np.asarray(d.labels, dtype=np.int64)


def evaluate_arrays(model: MlpModel, x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """Eval-mode mean loss and accuracy; equal logits count as a benign prediction."""
    if len(x) == 0:
        raise DatasetError('Cannot evaluate on an empty dataset.')
    loss_sum = 0.
    correct = 0
    for start in range(0, len(x), EVAL_CHUNK):
        xb, yb = x[start:start + EVAL_CHUNK], y[start:start + EVAL_CHUNK]
        logits = forward(model, xb, mode=EVAL).logits
        loss, _ = softmax_cross_entropy(logits, yb)
        loss_sum += loss * len(xb)
        correct += int(np.sum(predict_labels(logits) == yb))
    return loss_sum / len(x), correct / len(x)


def evaluate_on(model: MlpModel, d: Dataset, vectorizer: Optional[BagOfBytesVectorizer] = None) -> Tuple[float, float]:
    x, y = dataset_arrays(d, vectorizer or BagOfBytesVectorizer())
    return evaluate_arrays(model, x, y)


def fit(config: TrainConfig, x_train: np.ndarray, y_train: np.ndarray, x_val: np.ndarray, y_val: np.ndarray,
        curve_logger: Optional[CurveLogger] = None, show_progress: bool = False) -> Tuple[MlpModel, List[EpochRecord]]:
    """
    Train on pre-computed vectors. Each epoch reshuffles the training set, runs
    forward(train) / loss / backward / optimizer step over every minibatch and then
    measures eval-mode loss and accuracy on both sets. Returns the last-epoch model.
    """
    if len(x_train) == 0 or len(x_val) == 0:
        raise DatasetError('Training and validation sets must both be non-empty.')
    model = init_model(config.seed, input_size=config.input_size, hidden_size=config.hidden_size,
                       num_classes=config.num_classes, dropout_ratio=config.dropout_ratio)
    shuffle_seq, dropout_seq = np.random.SeedSequence(config.seed).spawn(2)
    sampler = MinibatchSampler(len(x_train), config.batch_size, np.random.default_rng(shuffle_seq))
    dropout_rng = np.random.default_rng(dropout_seq)
    optimizer = build_optimizer(config.optimizer)
    params = model.parameters()
    state = optimizer.init_state(params)

    records = []
    for epoch in range(1, config.epochs + 1):
        start = time.perf_counter()
        steps = 0
        batches = sampler.epoch_batches()
        for batch_no, idx in enumerate(tqdm(batches, desc=f'| epoch {epoch}/{config.epochs}',
                                            disable=not show_progress, leave=False), start=1):
            trace = forward(model, x_train[idx], mode=TRAIN, rng=dropout_rng)
            loss, dlogits = softmax_cross_entropy(trace.logits, y_train[idx])
            if not np.isfinite(loss):
                raise NumericDivergenceError(epoch, batch_no, loss)
            grads = backward(model, trace, dlogits)
            optimizer.step(state, params, grads.arrays())
            steps += 1
        train_loss, train_acc = evaluate_arrays(model, x_train, y_train)
        val_loss, val_acc = evaluate_arrays(model, x_val, y_val)
        record = EpochRecord(epoch=epoch, train_loss=train_loss, train_acc=train_acc, val_loss=val_loss,
                             val_acc=val_acc, seconds=time.perf_counter() - start, steps=steps)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise NumericDivergenceError(epoch, steps, train_loss if not np.isfinite(train_loss) else val_loss)
        records.append(record)
        if curve_logger is not None:
            curve_logger.log(record)
        logging.info(f'| epoch {epoch}: train loss {train_loss:.4f} acc {train_acc:.4f}, '
                     f'val loss {val_loss:.4f} acc {val_acc:.4f} ({record.seconds:.1f}s)')
    return model, records


def train(config: TrainConfig, train_set: Dataset, val_set: Dataset,
          vectorizer: Optional[BagOfBytesVectorizer] = None, curve_logger: Optional[CurveLogger] = None,
          show_progress: bool = False) -> Tuple[MlpModel, List[EpochRecord]]:
    vectorizer = vectorizer or BagOfBytesVectorizer(show_progress=show_progress)
    x_train, y_train = dataset_arrays(train_set, vectorizer)
    x_val, y_val = dataset_arrays(val_set, vectorizer)
    return fit(config, x_train, y_train, x_val, y_val, curve_logger=curve_logger, show_progress=show_progress)


def compare_optimizers(config: TrainConfig, train_set: Dataset, val_set: Dataset,
                       kinds: Sequence[str] = OPTIMIZER_KINDS,
                       vectorizer: Optional[BagOfBytesVectorizer] = None,
                       show_progress: bool = False) -> List[OptimizerResult]:
    """Train once per optimizer (default hyperparameters) on the same vectors and seed."""
    vectorizer = vectorizer or BagOfBytesVectorizer(show_progress=show_progress)
    x_train, y_train = dataset_arrays(train_set, vectorizer)
    x_val, y_val = dataset_arrays(val_set, vectorizer)
    results = []
    for kind in kinds:
        run_config = dataclasses.replace(config, optimizer=default_config(kind))
        _, records = fit(run_config, x_train, y_train, x_val, y_val, show_progress=show_progress)
        final = records[-1]
        seconds = sum(r.seconds for r in records)
        results.append(OptimizerResult(kind=kind, val_accuracy=final.val_acc, val_loss=final.val_loss,
                                       seconds=seconds))
        logging.info(f'| {kind}: val acc {final.val_acc:.4f}, val loss {final.val_loss:.4f}, {seconds:.1f}s')
    return results
