import csv
import dataclasses
import math

import numpy as np
import pytest

from basics.base_url_source import BENIGN, MALICIOUS, Dataset, LabeledUrl
from inference.metrics import accuracy, confusion_from_predictions
from modules.nn.mlp import EVAL, forward, predict_labels, zero_model
from modules.optimizers import OptimizerConfig, default_config
from training.url_task import (
    TrainConfig, compare_optimizers, evaluate_arrays, evaluate_on, fit, train
)
from utils.errors import DatasetError, InvalidInputError, NumericError
from utils.training_utils import CURVE_COLUMNS, CurveLogger, MinibatchSampler, write_curve_csv


def separable(rng, n, dim=8):
    """Gaussian points pushed to either side of x[0] = 0 by label."""
    y = rng.integers(0, 2, size=n)
    x = rng.normal(size=(n, dim))
    x[:, 0] = np.abs(x[:, 0]) + 0.5
    x[y == 0, 0] *= -1.
    return x, y


def small_config(**kwargs) -> TrainConfig:
    values = dict(batch_size=10, epochs=5, dropout_ratio=0., seed=3, input_size=8, hidden_size=16)
    values.update(kwargs)
    return TrainConfig(**values)


def test_config_validation():
    with pytest.raises(InvalidInputError):
        TrainConfig(batch_size=0)
    with pytest.raises(InvalidInputError):
        TrainConfig(epochs=0)
    with pytest.raises(InvalidInputError):
        TrainConfig(dropout_ratio=1.)
    config = TrainConfig()
    assert (config.batch_size, config.epochs, config.dropout_ratio, config.optimizer.kind) == (100, 20, 0.75, 'adam')


def test_config_from_hparams_overrides():
    hparams = {'training': {'batch_size': 50, 'epochs': 3}, 'model': {'dropout': 0.5}, 'seed': 9,
               'optimizer': {'kind': 'sgd', 'sgd': {'lr': 0.1}}}
    config = TrainConfig.from_hparams(hparams, epochs=7, batch_size=None)
    assert config.epochs == 7 and config.batch_size == 50
    assert config.dropout_ratio == 0.5 and config.seed == 9
    assert config.optimizer.kind == 'sgd' and config.optimizer.lr == 0.1


def test_minibatch_sampler_covers_every_sample(rng):
    sampler = MinibatchSampler(23, 10, rng)
    assert len(sampler) == 3
    batches = sampler.epoch_batches()
    assert [len(b) for b in batches] == [10, 10, 3]
    assert sorted(np.concatenate(batches).tolist()) == list(range(23))
    assert not np.array_equal(np.concatenate(batches), np.concatenate(sampler.epoch_batches()))


def test_steps_per_epoch(rng):
    x, y = separable(rng, 45)
    _, records = fit(small_config(epochs=2), x, y, x, y)
    assert [r.steps for r in records] == [math.ceil(45 / 10)] * 2
    _, records = fit(small_config(epochs=1, batch_size=100), x, y, x, y)
    assert records[0].steps == 1


def test_training_is_deterministic(rng):
    x, y = separable(rng, 60)
    config = small_config(dropout_ratio=0.5)
    a, records_a = fit(config, x, y, x, y)
    b, records_b = fit(config, x, y, x, y)
    assert all(p.tobytes() == q.tobytes() for p, q in zip(a.parameters(), b.parameters()))
    assert [r.val_loss for r in records_a] == [r.val_loss for r in records_b]
    c, _ = fit(dataclasses.replace(config, seed=4), x, y, x, y)
    assert not np.array_equal(a.l1.weights, c.l1.weights)


@pytest.mark.parametrize('kind', ['adam', 'adadelta', 'sgd'])
def test_training_learns_separable_data(rng, kind):
    x, y = separable(rng, 200)
    x_val, y_val = separable(rng, 100)
    config = small_config(epochs=20, optimizer=default_config(kind), dropout_ratio=0.25)
    model, records = fit(config, x, y, x_val, y_val)
    assert len(records) == 20
    assert records[-1].train_loss < records[0].train_loss
    for r in records:
        assert 0. <= r.train_acc <= 1. and 0. <= r.val_acc <= 1.
        assert r.train_loss >= 0. and r.val_loss >= 0. and r.seconds >= 0.
    if kind == 'adam':
        assert records[-1].val_acc >= 0.95


def test_evaluate_arrays_tie_rule_and_counting():
    model = zero_model(input_size=8, hidden_size=4)
    x = np.zeros((4, 8))
    _, acc = evaluate_arrays(model, x, np.array([0, 1, 0, 1]))
    assert acc == 0.5
    model.l3.bias[:] = [0., 1.]
    loss, acc = evaluate_arrays(model, x, np.array([1, 1, 1, 0]))
    assert acc == 0.75
    assert loss > 0.
    with pytest.raises(DatasetError):
        evaluate_arrays(model, np.zeros((0, 8)), np.zeros(0, dtype=int))


def test_accuracy_agrees_with_metrics(rng):
    x, y = separable(rng, 80)
    model, _ = fit(small_config(epochs=2), x, y, x, y)
    _, acc = evaluate_arrays(model, x, y)
    predicted = predict_labels(forward(model, x, mode=EVAL).logits)
    assert acc == accuracy(confusion_from_predictions(predicted, y))


def test_divergence_is_reported(rng):
    x, y = separable(rng, 40)
    config = small_config(epochs=3, optimizer=OptimizerConfig(kind='sgd', lr=1e300))
    with pytest.raises(NumericError):
        fit(config, x * 1e10, y, x, y)


def url_dataset(n_per_class):
    entries = []
    for i in range(n_per_class):
        entries.append(LabeledUrl(url=f'https://www.news{i}.com/about', label=BENIGN))
        entries.append(LabeledUrl(url=f'http://{i:08x}ab.tk/login/verify/{i * 7919:012x}/index.php?cmd=1',
                                  label=MALICIOUS))
    return Dataset(entries=entries, provenance='hand made')


def test_train_on_url_datasets_and_curve(tmp_path):
    train_set, val_set = url_dataset(30), url_dataset(10)
    config = TrainConfig(batch_size=20, epochs=3, seed=1, hidden_size=32)
    logger = CurveLogger()
    model, records = train(config, train_set, val_set, curve_logger=logger)
    assert logger.rows == records
    loss, acc = evaluate_on(model, val_set)
    assert loss == pytest.approx(records[-1].val_loss)
    assert acc == records[-1].val_acc
    with pytest.raises(DatasetError):
        train(config, Dataset(), val_set)

    path = tmp_path / 'curve.csv'
    write_curve_csv(records, path)
    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    assert rows[0] == CURVE_COLUMNS
    assert [int(r[0]) for r in rows[1:]] == [1, 2, 3]


def test_curve_logger_writes_tensorboard_events(tmp_path, rng):
    x, y = separable(rng, 20)
    logger = CurveLogger(tmp_path / 'logs')
    fit(small_config(epochs=2), x, y, x, y, curve_logger=logger)
    logger.close()
    assert len(logger.rows) == 2
    assert any(p.name.startswith('events.out.tfevents') for p in (tmp_path / 'logs').iterdir())


def test_compare_optimizers(capsys):
    train_set, val_set = url_dataset(20), url_dataset(5)
    config = TrainConfig(batch_size=10, epochs=2, seed=1, hidden_size=16)
    results = compare_optimizers(config, train_set, val_set)
    assert capsys.readouterr().out == ''
    assert [r.kind for r in results] == ['adam', 'adadelta', 'sgd']
    assert all(0. <= r.val_accuracy <= 1. and r.seconds >= 0. for r in results)
