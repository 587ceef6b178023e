import numpy as np
import pytest

from basics.base_url_source import BENIGN, MALICIOUS, Dataset, LabeledUrl
from preprocessing.url_datasets import (
    balance_sample, cleanse, dedup_by_url, hour_bucket, load_dataset, merge_shuffle_split, save_dataset, train_count
)
from preprocessing.url_sources import load_access_log, load_phishtank_csv, load_url_list
from utils.errors import DatasetError, DatasetSchemaError, InvalidInputError, SamplingError

T0 = 1493078400


def urls_dataset(urls, label=BENIGN):
    return Dataset(entries=[LabeledUrl(url=u, label=label) for u in urls], provenance='test')


def access_log(counts_per_hour, start=T0):
    entries = []
    for hour, count in enumerate(counts_per_hour):
        for i in range(count):
            entries.append(LabeledUrl(url=f'http://h{hour}.example/{i}', label=BENIGN,
                                      timestamp=start + hour * 3600 + i % 3600))
    return Dataset(entries=entries, provenance='log')


def test_labeled_url_validation():
    with pytest.raises(InvalidInputError):
        LabeledUrl(url='', label=BENIGN)
    with pytest.raises(InvalidInputError):
        LabeledUrl(url='http://a/', label=2)


def test_load_phishtank_csv(tmp_path):
    path = tmp_path / 'phish.csv'
    path.write_text(
        'phish_id,url,submission_time\n'
        '1,http://a.example/login,2017-04-01T10:00:00+00:00\n'
        '2,"http://b.example/x?a=1,b=2",2017-04-02T10:00:00+00:00\n'
        '3,http://c.example/,2017-05-01T10:00:00+00:00\n'
        '4,,2017-04-03T10:00:00+00:00\n',
        encoding='utf-8'
    )
    d = load_phishtank_csv(path)
    assert d.urls == ['http://a.example/login', 'http://b.example/x?a=1,b=2', 'http://c.example/']
    assert d.labels == [MALICIOUS] * 3
    assert d.skipped == 1

    early = load_phishtank_csv(path, reported_before='2017-04-25')
    assert early.urls == ['http://a.example/login', 'http://b.example/x?a=1,b=2']


def test_load_phishtank_csv_needs_url_column(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('phish_id,target\n1,x\n', encoding='utf-8')
    with pytest.raises(DatasetSchemaError):
        load_phishtank_csv(path)


def test_load_url_list(tmp_path):
    path = tmp_path / 'list.txt'
    path.write_text('# comment\nhttp://a.example/\n\nhttp://b.example/\n', encoding='utf-8')
    d = load_url_list(path, MALICIOUS)
    assert d.urls == ['http://a.example/', 'http://b.example/']
    assert d.labels == [MALICIOUS, MALICIOUS]
    empty = tmp_path / 'empty.txt'
    empty.write_text('', encoding='utf-8')
    assert len(load_url_list(empty, BENIGN)) == 0


def test_load_access_log(tmp_path):
    path = tmp_path / 'access.log'
    lines = [f'{T0 + h * 3600}\thttp://a.example/{h}' for h in range(24)] + ['nourl']
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    d = load_access_log(path)
    assert len(d) == 24
    assert d.skipped == 1
    assert d.entries[0].timestamp == T0
    assert d.entries[0].label == BENIGN
    assert len({hour_bucket(e.timestamp) for e in d}) == 24


def test_load_access_log_keeps_undecodable_bytes(tmp_path):
    path = tmp_path / 'access.log'
    path.write_bytes(f'{T0}\thttp://a.example/'.encode() + b'\xff\n')
    d = load_access_log(path)
    assert d.urls[0].encode('utf-8', errors='surrogateescape') == b'http://a.example/\xff'


def test_cleanse():
    white = urls_dataset(['A', 'B', 'C'])
    assert cleanse(white, urls_dataset(['B'], MALICIOUS)).urls == ['A', 'C']
    assert cleanse(white, urls_dataset(['X'], MALICIOUS)).urls == ['A', 'B', 'C']
    assert cleanse(white, urls_dataset(['C', 'B', 'A', 'D'], MALICIOUS)).urls == []


def test_dedup_by_url():
    assert dedup_by_url(urls_dataset(['A', 'A', 'B'])).urls == ['A', 'B']
    assert dedup_by_url(urls_dataset(['A', 'B'])).urls == ['A', 'B']
    assert len(dedup_by_url(urls_dataset([]))) == 0


def test_balance_sample_caps_every_hour():
    log = access_log([30, 5, 12, 0, 40])
    d = balance_sample(log, per_hour=10, target_size=None, seed=1)
    per_hour = {}
    for e in d:
        per_hour[hour_bucket(e.timestamp)] = per_hour.get(hour_bucket(e.timestamp), 0) + 1
    assert max(per_hour.values()) <= 10
    assert len(d) == 10 + 5 + 10 + 10


def test_balance_sample_target_and_determinism():
    log = access_log([100] * 24)
    a = balance_sample(log, per_hour=50, target_size=700, seed=3)
    b = balance_sample(log, per_hour=50, target_size=700, seed=3)
    c = balance_sample(log, per_hour=50, target_size=700, seed=4)
    assert len(a) == 700
    assert a.urls == b.urls
    assert a.urls != c.urls
    assert len(set(a.urls)) == 700


def test_balance_sample_exhaustive_returns_whole_log():
    log = access_log([3, 4, 5])
    d = balance_sample(log, per_hour=100, target_size=len(log), seed=0)
    assert sorted(d.urls) == sorted(log.urls)


def test_balance_sample_errors():
    log = access_log([5, 5])
    with pytest.raises(SamplingError):
        balance_sample(log, per_hour=2, target_size=5, seed=0)
    with pytest.raises(SamplingError):
        balance_sample(urls_dataset(['A']), per_hour=2, target_size=None, seed=0)


def test_train_count():
    assert train_count(53444, 0.8) == 42755
    assert train_count(10, 0.5) == 5
    assert train_count(100, 0.29) == 29


def test_merge_shuffle_split():
    black = urls_dataset([f'b{i}' for i in range(26722)], MALICIOUS)
    white = urls_dataset([f'w{i}' for i in range(26722)])
    train, val = merge_shuffle_split(black, white, 0.8, seed=9)
    assert (len(train), len(val)) == (42755, 10689)
    assert sorted(train.urls + val.urls) == sorted(black.urls + white.urls)
    assert not set(train.urls) & set(val.urls)
    again, _ = merge_shuffle_split(black, white, 0.8, seed=9)
    assert again.urls == train.urls


def test_merge_shuffle_split_errors():
    with pytest.raises(DatasetError):
        merge_shuffle_split(urls_dataset([]), urls_dataset([]), 0.8, seed=0)
    with pytest.raises(InvalidInputError):
        merge_shuffle_split(urls_dataset(['A']), urls_dataset(['B']), 1., seed=0)


def test_save_and_load_dataset(tmp_path):
    d = Dataset(entries=[LabeledUrl('http://a.example/', BENIGN), LabeledUrl('http://b.example/\udcff', MALICIOUS)],
                provenance='hand made')
    path = tmp_path / 'sub' / 'set.tsv'
    save_dataset(d, path)
    assert path.read_bytes().splitlines()[0] == b'# hand made'
    loaded = load_dataset(path)
    assert loaded.urls == d.urls
    assert loaded.labels == d.labels
    assert loaded.provenance == 'hand made'
    assert list(tmp_path.joinpath('sub').iterdir()) == [path]


def test_load_dataset_reports_bad_line(tmp_path):
    path = tmp_path / 'bad.tsv'
    path.write_text('0\thttp://a.example/\n7\thttp://b.example/\n', encoding='utf-8')
    with pytest.raises(DatasetError, match='line 2'):
        load_dataset(path)


def test_labels_are_balanced_after_synthetic_generation():
    from preprocessing.synthetic_urls import generate_synthetic
    d = generate_synthetic(50, seed=1)
    assert d.label_counts() == {BENIGN: 50, MALICIOUS: 50}
    assert generate_synthetic(50, seed=1).urls == d.urls
    assert np.all(np.array(d.labels[:50]) == BENIGN)


def test_phishtank_url_with_line_break_is_skipped(tmp_path):
    path = tmp_path / 'phish.csv'
    path.write_bytes(
        b'phish_id,url\n'
        b'1,"http://a.example/x\ny"\n'
        b'2,"http://b.example/p\r\nq"\n'
        b'3,"http://c.example/tab\there"\n'
        b'4,http://d.example/\n'
    )
    d = load_phishtank_csv(path)
    assert d.urls == ['http://c.example/tab\there', 'http://d.example/']
    assert d.skipped == 2

    save_dataset(d, tmp_path / 'black.tsv')
    loaded = load_dataset(tmp_path / 'black.tsv')
    assert loaded.urls == d.urls
    assert loaded.labels == [MALICIOUS, MALICIOUS]


def test_save_dataset_refuses_line_breaks(tmp_path):
    d = Dataset(entries=[LabeledUrl('http://a.example/x\ny', MALICIOUS)])
    with pytest.raises(DatasetError, match='line break'):
        save_dataset(d, tmp_path / 'set.tsv')
    assert not (tmp_path / 'set.tsv').exists()


def test_reported_before_must_be_a_date(tmp_path):
    path = tmp_path / 'phish.csv'
    path.write_text('phish_id,url\n1,http://a.example/\n', encoding='utf-8')
    with pytest.raises(InvalidInputError, match='yesterday'):
        load_phishtank_csv(path, reported_before='yesterday')
