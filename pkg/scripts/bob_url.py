import dataclasses
import functools
import json
import logging
import os
import pathlib
import sys
from typing import List, Optional

import click

root_dir = pathlib.Path(__file__).parent.parent.resolve()
os.environ['PYTHONPATH'] = str(root_dir)
sys.path.insert(0, str(root_dir))

from utils.errors import BobUrlError, HparamsOverrideError, NumericError, SingleClassError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

log_format = '%(asctime)s %(message)s'


def common_options(func):
    @click.option('--config', type=str, default='', metavar='<yaml>', help='Config file (chains configs/base.yaml).')
    @click.option('--hparams', 'hparams_str', type=str, default='', metavar='<k=v,...>',
                  help='Temporary overrides, e.g. training.epochs=5,optimizer.kind=sgd.')
    @click.option('--quiet', is_flag=True, help='Hide progress bars.')
    @functools.wraps(func)
    def wrapper(*args, config, hparams_str, quiet, **kwargs):
        from utils.hparams import set_hparams
        try:
            hparams = set_hparams(config, hparams_str)
        except HparamsOverrideError as e:
            raise click.BadParameter(str(e), param_hint='\'--hparams\'') from None
        return func(*args, hparams=hparams, show_progress=not quiet and sys.stderr.isatty(), **kwargs)

    return wrapper


def build_vectorizer(hparams, show_progress):
    from modules.vectorizers.bag_of_bytes import BagOfBytesVectorizer
    return BagOfBytesVectorizer(num_workers=hparams.get('vectorizer', {}).get('num_workers', 0),
                                show_progress=show_progress)


@click.group(help='Bag-of-bytes URL classifier: vectorize, prepare datasets, train, evaluate and predict.')
def main():
    pass


@main.command(help='Print the 512-dimensional bag-of-bytes vector of a URL.')
@click.argument('url', type=str)
@click.option('--format', 'fmt', type=click.Choice(['lines', 'csv']), default='lines', show_default=True,
              help='One value per line, or one comma-separated row.')
def vectorize(url: str, fmt: str):
    from modules.vectorizers.bag_of_bytes import vectorize as vectorize_url
    values = [repr(v) for v in vectorize_url(url).tolist()]
    if fmt == 'csv':
        click.echo(','.join(values))
    else:
        click.echo('\n'.join(values))


@main.group(help='Prepare labeled URL datasets.')
def dataset():
    pass


def iso_date(ctx, param, value):
    if value is None:
        return None
    from preprocessing.url_sources import parse_timestamp
    try:
        return parse_timestamp(value)
    except ValueError:
        raise click.BadParameter(f'\'{value}\' is not an ISO 8601 date or date/time.') from None


@dataset.command(help='Cleanse, balance and split a PhishTank blacklist and a benign access log.')
@click.option('--blacklist', type=str, required=True, metavar='<csv>', help='PhishTank dump used as the blacklist.')
@click.option('--whitelist-log', type=str, required=True, metavar='<tsv>', help='Access log: epoch<TAB>url.')
@click.option('--cleanse-with', type=str, required=False, metavar='<csv>',
              help='PhishTank dump removed from the whitelist (defaults to the blacklist).')
@click.option('--per-hour', type=int, required=False, metavar='<n>', help='Entries sampled per hour bucket.')
@click.option('--size', type=int, required=False, metavar='<n>', help='Entries per class (defaults to blacklist size).')
@click.option('--seed', type=int, required=True, metavar='<seed>', help='Random seed.')
@click.option('--train-fraction', type=float, required=False, metavar='<ratio>', help='Share of the training split.')
@click.option('--reported-before', type=str, required=False, metavar='<date>', callback=iso_date,
              help='Only blacklist rows submitted before this UTC date/time.')
@click.option('--cleanse-reported-before', type=str, required=False, metavar='<date>', callback=iso_date,
              help='Only cleanse-list rows submitted before this UTC date/time.')
@click.option('--dedup', is_flag=True, help='Drop repeated URLs before sampling.')
@click.option('--out-train', type=str, required=False, metavar='<file>', help='Training split output.')
@click.option('--out-val', type=str, required=False, metavar='<file>', help='Validation split output.')
@click.option('--out-all', type=str, required=False, metavar='<file>',
              help='Write one shuffled, unsplit prediction set instead of a train/validation split.')
@common_options
def prepare(blacklist, whitelist_log, cleanse_with, per_hour, size, seed, train_fraction, reported_before,
            cleanse_reported_before, dedup, out_train, out_val, out_all, hparams, show_progress):
    if out_all is None and (out_train is None or out_val is None):
        raise click.UsageError('Either --out-all or both --out-train and --out-val are required.')
    if out_all is not None and (out_train is not None or out_val is not None):
        raise click.UsageError('--out-all is exclusive to --out-train/--out-val.')
    from preprocessing.url_binarizer import UrlBinarizer
    dataset_hparams = hparams.get('dataset', {})
    binarizer = UrlBinarizer(
        blacklist, whitelist_log, cleanse_with_path=cleanse_with,
        per_hour=per_hour if per_hour is not None else dataset_hparams.get('per_hour', 10000),
        size=size if size is not None else dataset_hparams.get('size'),
        seed=seed, reported_before=reported_before, cleanse_reported_before=cleanse_reported_before, dedup=dedup
    )
    if out_all is not None:
        binarizer.process_prediction_set(out_all)
    else:
        fraction = train_fraction if train_fraction is not None else hparams['training']['train_fraction']
        binarizer.process(out_train, out_val, train_fraction=fraction)


@dataset.command(help='Generate two synthetic URL families (benign and malicious).')
@click.option('--per-class', type=int, required=True, metavar='<n>', help='URLs per class.')
@click.option('--seed', type=int, required=True, metavar='<seed>', help='Random seed.')
@click.option('--out', type=str, required=False, metavar='<file>', help='Labeled dataset output (label<TAB>url).')
@click.option('--sources-dir', type=str, required=False, metavar='<dir>',
              help='Also write a PhishTank-shaped blacklist.csv and an access.log there.')
def synth(per_class: int, seed: int, out: Optional[str], sources_dir: Optional[str]):
    if out is None and sources_dir is None:
        raise click.UsageError('Specify --out and/or --sources-dir.')
    from preprocessing.synthetic_urls import generate_synthetic, write_synthetic_sources
    from preprocessing.url_datasets import save_dataset
    if out is not None:
        save_dataset(generate_synthetic(per_class, seed), out)
        print(f'| synthetic dataset: {2 * per_class} -> {out}')
    if sources_dir is not None:
        black, log = write_synthetic_sources(sources_dir, per_class, seed)
        print(f'| synthetic sources: {black}, {log}')


def optimizer_options(func):
    @click.option('--optimizer', type=click.Choice(['adam', 'adadelta', 'sgd']), required=False,
                  help='Parameter-update rule.')
    @click.option('--lr', type=float, required=False, help='SGD learning rate.')
    @click.option('--alpha', type=float, required=False, help='Adam step size.')
    @click.option('--beta1', type=float, required=False, help='Adam first-moment decay.')
    @click.option('--beta2', type=float, required=False, help='Adam second-moment decay.')
    @click.option('--rho', type=float, required=False, help='AdaDelta decay.')
    @click.option('--eps', type=float, required=False, help='Adam/AdaDelta epsilon.')
    @functools.wraps(func)
    def wrapper(*args, optimizer, lr, alpha, beta1, beta2, rho, eps, **kwargs):
        overrides = dict(lr=lr, alpha=alpha, beta1=beta1, beta2=beta2, rho=rho, eps=eps)
        return func(*args, optimizer_kind=optimizer, optimizer_overrides=overrides, **kwargs)

    return wrapper


def training_options(func):
    for option in reversed([
        click.option('--train', 'train_path', type=str, required=True, metavar='<file>', help='Training split.'),
        click.option('--val', 'val_path', type=str, required=True, metavar='<file>', help='Validation split.'),
        click.option('--epochs', type=int, required=False, help='Number of epochs.'),
        click.option('--batch-size', type=int, required=False, help='Minibatch size.'),
        click.option('--dropout', type=float, required=False, help='Dropout ratio.'),
        click.option('--seed', type=int, required=True, metavar='<seed>', help='Random seed.'),
    ]):
        func = option(func)
    return func


def build_train_config(hparams, seed, epochs, batch_size, dropout, optimizer_kind=None, optimizer_overrides=None):
    from modules.optimizers import config_from_hparams
    from training.url_task import TrainConfig
    optimizer = config_from_hparams(hparams.get('optimizer', {}), kind=optimizer_kind, **(optimizer_overrides or {}))
    return TrainConfig.from_hparams(hparams, seed=seed, epochs=epochs, batch_size=batch_size,
                                    dropout_ratio=dropout, optimizer=optimizer)


@main.command(help='Train the classifier and record the learning curve.')
@training_options
@optimizer_options
@click.option('--out-model', type=str, required=True, metavar='<file>', help='Model output (BOBURL text format).')
@click.option('--curve', type=str, required=False, metavar='<csv>', help='Learning curve output.')
@click.option('--log-dir', type=str, required=False, metavar='<dir>', help='TensorBoard log directory.')
@common_options
def train(train_path, val_path, epochs, batch_size, dropout, seed, optimizer_kind, optimizer_overrides,
          out_model, curve, log_dir, hparams, show_progress):
    from preprocessing.url_datasets import load_dataset
    from training.url_task import train as run_training
    from utils import model_io
    from utils.hparams import dump_hparams
    from utils.training_utils import CurveLogger, write_curve_csv

    config = build_train_config(hparams, seed, epochs, batch_size, dropout, optimizer_kind, optimizer_overrides)
    train_set, val_set = load_dataset(train_path), load_dataset(val_path)
    print(f'| train {len(train_set)}, valid {len(val_set)}, optimizer {config.optimizer.kind}')
    curve_logger = CurveLogger(log_dir)
    try:
        model, records = run_training(config, train_set, val_set, vectorizer=build_vectorizer(hparams, show_progress),
                                      curve_logger=curve_logger, show_progress=show_progress)
    finally:
        curve_logger.close()
    model_io.save(model, out_model)
    dump_hparams(dataclasses.asdict(config), f'{out_model}.config.yaml')
    if curve is not None:
        write_curve_csv(records, curve)
    final = records[-1]
    print(f'| final: val_loss={final.val_loss:.6f} val_acc={final.val_acc:.6f} '
          f'training_seconds={sum(r.seconds for r in records):.1f} -> {out_model}')


@main.command(help='Train once per optimizer and tabulate the final validation accuracy and training time.')
@training_options
@click.option('--optimizers', 'kinds', type=str, default='adam,adadelta,sgd', show_default=True,
              help='Comma-separated optimizer kinds.')
@click.option('--out', type=str, required=False, metavar='<csv>', help='Comparison table output.')
@common_options
def compare(train_path, val_path, epochs, batch_size, dropout, seed, kinds, out, hparams, show_progress):
    import csv
    from modules.optimizers import default_config
    from preprocessing.url_datasets import load_dataset
    from training.url_task import compare_optimizers
    from utils import atomic_write

    kind_list = [k.strip() for k in kinds.split(',') if k.strip()]
    for k in kind_list:
        default_config(k)
    config = build_train_config(hparams, seed, epochs, batch_size, dropout)
    results = compare_optimizers(config, load_dataset(train_path), load_dataset(val_path), kinds=kind_list,
                                 vectorizer=build_vectorizer(hparams, show_progress), show_progress=show_progress)
    if out is not None:
        with atomic_write(out, newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(['optimizer', 'val_acc', 'val_loss', 'seconds'])
            for r in results:
                writer.writerow([r.kind, repr(r.val_accuracy), repr(r.val_loss), f'{r.seconds:.3f}'])
    for r in results:
        click.echo(f'optimizer={r.kind} val_acc={r.val_accuracy!r} val_loss={r.val_loss!r} seconds={r.seconds:.3f}')


def model_options(func):
    for option in reversed([
        click.option('--model', 'model_path', type=str, required=True, metavar='<file>', help='Trained model file.'),
        click.option('--allow-any-dims', is_flag=True,
                     help='Accept models whose layer sizes differ from 512-256-256-2.'),
    ]):
        func = option(func)
    return func


def load_classifier(model_path, allow_any_dims, hparams, show_progress, threshold=None):
    from inference.url_classifier import UrlClassifier
    if threshold is None:
        threshold = hparams.get('metrics', {}).get('threshold', 0.5)
    return UrlClassifier.from_file(model_path, allow_any_dims=allow_any_dims, threshold=threshold,
                                   vectorizer=build_vectorizer(hparams, show_progress))


@main.command(help='Score a labeled dataset: confusion matrix, accuracy, precision, recall, F-measure and AUC.')
@model_options
@click.option('--data', type=str, required=True, metavar='<file>', help='Labeled dataset (label<TAB>url).')
@click.option('--report', type=str, required=False, metavar='<json>', help='Metrics report output.')
@click.option('--roc', 'roc_path', type=str, required=False, metavar='<csv>', help='ROC curve output (fpr,tpr).')
@click.option('--threshold', type=float, required=False, help='Decision threshold on p_malicious.')
@common_options
def evaluate(model_path, allow_any_dims, data, report, roc_path, threshold, hparams, show_progress):
    from inference import metrics
    from preprocessing.url_datasets import load_dataset
    from utils import atomic_write

    classifier = load_classifier(model_path, allow_any_dims, hparams, show_progress, threshold)
    scores = classifier.score_dataset(load_dataset(data))
    cm = metrics.confusion(scores, threshold=classifier.threshold)
    try:
        curve = metrics.roc(scores)
    except SingleClassError as e:
        if roc_path is not None:
            raise
        logging.warning(f'| {e} AUC is omitted from the report.')
        curve = None
    report_content = metrics.report_dict(cm, curve)
    if report is not None:
        with atomic_write(report) as f:
            f.write(json.dumps(report_content, indent=2, sort_keys=True) + '\n')
    if roc_path is not None:
        metrics.write_roc_csv(curve, roc_path)
    keys = ('accuracy', 'precision', 'recall', 'f_measure', 'auc')
    click.echo(' '.join(f'{k}={report_content[k]!r}' for k in keys if k in report_content))


@main.command(help='Write the ROC curve of a model on a labeled dataset and print its AUC.')
@model_options
@click.option('--data', type=str, required=True, metavar='<file>', help='Labeled dataset (label<TAB>url).')
@click.option('--out', type=str, required=True, metavar='<csv>', help='ROC curve output (fpr,tpr).')
@common_options
def roc(model_path, allow_any_dims, data, out, hparams, show_progress):
    from inference import metrics
    from preprocessing.url_datasets import load_dataset

    classifier = load_classifier(model_path, allow_any_dims, hparams, show_progress)
    curve = metrics.roc(classifier.score_dataset(load_dataset(data)))
    metrics.write_roc_csv(curve, out)
    click.echo(f'auc={curve.auc!r}')


@main.command(help='Classify URLs as benign or malicious.')
@model_options
@click.option('--url', type=str, required=False, metavar='<url>', help='URL to classify.')
@click.option('--stdin', 'from_stdin', is_flag=True, help='Classify one URL per line read from standard input.')
@click.option('--threshold', type=float, required=False, help='Decision threshold on p_malicious.')
@common_options
def predict(model_path, allow_any_dims, url, from_stdin, threshold, hparams, show_progress):
    if (url is None) == (not from_stdin):
        raise click.UsageError('Specify exactly one of --url and --stdin.')
    classifier = load_classifier(model_path, allow_any_dims, hparams, show_progress, threshold)
    if url is not None:
        _, p_malicious = classifier.predict(url)
        click.echo(f'p_malicious={p_malicious!r} verdict={classifier.verdict(p_malicious)}')
        return
    stream = click.get_text_stream('stdin', errors='surrogateescape')
    for line in stream:
        line = line.strip()
        if line == '':
            continue
        _, p_malicious = classifier.predict(line)
        click.echo(f'p_malicious={p_malicious!r} verdict={classifier.verdict(p_malicious)}\t{line}')


def run(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format=log_format, datefmt='%m/%d %I:%M:%S %p')
    try:
        result = main.main(args=argv, prog_name='bob_url', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo('Aborted!', err=True)
        return EXIT_USAGE
    except NumericError as e:
        logging.error(f'| numeric error: {e}')
        return EXIT_NUMERIC
    except (BobUrlError, click.ClickException, OSError) as e:
        logging.error(f'| error: {e}')
        return EXIT_DATA
    return result if isinstance(result, int) else EXIT_OK


if __name__ == '__main__':
    sys.exit(run())
