import contextlib
import os
import pathlib
import tempfile


@contextlib.contextmanager
def atomic_write(path, encoding='utf-8', newline='\n'):
    """
    Open a temporary file next to *path* for writing and move it over *path* once the
    block finishes without error, so readers never observe a partially written file.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=path.parent)
    try:
        with os.fdopen(fd, 'w', encoding=encoding, errors='surrogateescape', newline=newline) as f:
            yield f
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_name)
        raise


def open_text(path, newline=None):
    """Read text with undecodable bytes kept as surrogate escapes (URLs are raw bytes)."""
    return open(path, 'r', encoding='utf-8', errors='surrogateescape', newline=newline)
