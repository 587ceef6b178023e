import logging
import os
import pathlib

import yaml

from utils.errors import HparamsOverrideError, InvalidInputError

root_dir = pathlib.Path(__file__).parent.parent.resolve()
DEFAULT_CONFIG = root_dir / 'configs' / 'base.yaml'

hparams = {}


def override_config(old_config: dict, new_config: dict):
    for k, v in new_config.items():
        if isinstance(v, dict) and isinstance(old_config.get(k), dict):
            override_config(old_config[k], new_config[k])
        else:
            old_config[k] = v


def _coerce(old_value, new_value: str):
    parsed = yaml.safe_load(new_value)
    if old_value is None or isinstance(old_value, bool) or parsed is None:
        return parsed
    if isinstance(old_value, float) and isinstance(parsed, int):
        return float(parsed)
    if isinstance(old_value, str):
        return new_value
    return type(old_value)(parsed)


def apply_hparams_str(config: dict, hparams_str: str):
    """
    Apply temporary overrides such as ``training.epochs=5,optimizer.kind=sgd``.
    Dotted keys walk into nested sections; values are coerced to the type they replace.
    """
    for new_hparam in hparams_str.split(','):
        if new_hparam.strip() == '':
            continue
        if '=' not in new_hparam:
            raise HparamsOverrideError(f'Override \'{new_hparam.strip()}\' is not of the form key=value.')
        k, v = new_hparam.split('=', maxsplit=1)
        *parents, leaf = k.strip().split('.')
        if '' in parents or leaf == '':
            raise HparamsOverrideError(f'Override key \'{k.strip()}\' has an empty section name.')
        node = config
        for p in parents:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise HparamsOverrideError(f'Override key \'{k.strip()}\' walks into a non-section value.')
        try:
            node[leaf] = _coerce(node.get(leaf), v.strip())
        except (ValueError, TypeError, yaml.YAMLError) as e:
            raise HparamsOverrideError(f'Cannot apply override \'{new_hparam.strip()}\': {e}') from None


def load_config(config_fn, loaded_config=None, config_chains=None):
    """
    Load a config file depth first: every file in ``base_config`` is loaded and merged
    before the keys of the file itself.
    """
    if loaded_config is None:
        loaded_config = set()
    if config_chains is None:
        config_chains = []
    config_fn = str(config_fn)
    with open(config_fn, encoding='utf-8') as f:
        try:
            hparams_ = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise InvalidInputError(f'{config_fn}: not a valid yaml config: {e}') from None
    if not isinstance(hparams_, dict):
        raise InvalidInputError(f'{config_fn}: a config file must hold a mapping of sections.')
    loaded_config.add(config_fn)
    if 'base_config' in hparams_:
        ret_hparams = {}
        if not isinstance(hparams_['base_config'], list):
            hparams_['base_config'] = [hparams_['base_config']]
        for c in hparams_['base_config']:
            if c.startswith('.'):
                c = os.path.normpath(f'{os.path.dirname(config_fn)}/{c}')
            elif not os.path.isabs(c) and not os.path.exists(c):
                c = str(root_dir / c)
            if c not in loaded_config:
                override_config(ret_hparams, load_config(c, loaded_config, config_chains))
        override_config(ret_hparams, hparams_)
    else:
        ret_hparams = hparams_
    config_chains.append(config_fn)
    return ret_hparams


def set_hparams(config='', hparams_str='', print_hparams=False):
    """
        Load hparams from multiple sources:
        1. config chain (i.e. first load base_config, then load config);
           without a config the bundled configs/base.yaml is used;
        2. load from argument --hparams or hparams_str, as temporary modification.
    """
    config_chains = []
    hparams_ = load_config(config or DEFAULT_CONFIG, config_chains=config_chains)
    hparams_.pop('base_config', None)
    apply_hparams_str(hparams_, hparams_str)

    threads = os.getenv('BOB_URL_THREADS')
    if threads is not None and threads.strip() != '':
        try:
            num_workers = int(threads)
        except ValueError:
            raise InvalidInputError(f'BOB_URL_THREADS must be an integer, got \'{threads}\'.') from None
        if num_workers < 0:
            raise InvalidInputError(f'BOB_URL_THREADS must be non-negative, got {num_workers}.')
        hparams_.setdefault('vectorizer', {})['num_workers'] = num_workers

    hparams.clear()
    hparams.update(hparams_)

    if print_hparams:
        logging.info(f'| Hparams chains: {config_chains}')
        for k, v in sorted(hparams_.items()):
            logging.info(f'| \033[0;33m{k}\033[0m: {v}')

    return hparams_


def dump_hparams(hparams_: dict, path):
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(hparams_, f, allow_unicode=True, sort_keys=True)
