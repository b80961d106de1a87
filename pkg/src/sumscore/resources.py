"""Resource directory convention and stopword list setup.

Resources live under ``$SUMSCORE_HOME`` (default ``~/.sumscore``), one
subdirectory per metric. Each installed file is accompanied by a
``<name>.sha256`` file recording the checksum it was installed with.
"""

from __future__ import annotations

import hashlib
import logging
import os
import urllib.parse
import urllib.request
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Optional, Union

from sumscore.errors import DataError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_STOPWORDS_SHA256 = "897ece33842ba404c3ea9344dca39b99ea127254f1df91127e3f68f6967cac67"
STOPWORDS_FILENAME = "stopwords.txt"


def resource_dir() -> Path:
    root = os.environ.get("SUMSCORE_HOME")
    return Path(root) if root else Path.home() / ".sumscore"


def packaged_stopwords_path() -> Path:
    return Path(str(importlib_resources.files("sumscore") / "data" / STOPWORDS_FILENAME))


def installed_stopwords_path() -> Path:
    return resource_dir() / "rouge" / STOPWORDS_FILENAME


def resolve_stopword_path(explicit: Optional[Union[str, Path]] = None) -> Path:
    """Explicit path, else the installed resource, else the packaged default."""
    if explicit is not None:
        path = Path(explicit)
        if not path.is_file():
            raise UsageError(f"stopword list {str(path)!r} does not exist")
        return path
    installed = installed_stopwords_path()
    if installed.is_file():
        return installed
    return packaged_stopwords_path()


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_source(source: str, timeout: float) -> bytes:
    scheme = urllib.parse.urlparse(source).scheme
    if scheme in ("http", "https", "file"):
        with urllib.request.urlopen(source, timeout=timeout) as response:
            return response.read()
    return Path(source).read_bytes()


def install_stopwords(
    source: Optional[str] = None,
    sha256: Optional[str] = None,
    *,
    timeout: float = 60.0,
) -> Path:
    """Fetch a stopword list into the resource directory, verifying its checksum.

    With no ``source`` the packaged default list is installed. ``source`` may be
    an http(s)/file URL or a local path.
    """
    if source is None:
        data = packaged_stopwords_path().read_bytes()
        sha256 = sha256 or DEFAULT_STOPWORDS_SHA256
    else:
        try:
            data = _read_source(source, timeout)
        except OSError as e:  # includes URLError
            raise UsageError(f"cannot read stopword list from {source!r}: {e}") from None
    digest = sha256_bytes(data)
    if sha256 is not None and digest != sha256.lower():
        raise DataError(f"checksum mismatch for stopword list: expected {sha256}, got {digest}")
    try:
        data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DataError(f"stopword list is not valid UTF-8: {e}") from None

    dest = installed_stopwords_path()
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_bytes(data)
    dest.with_name(dest.name + ".sha256").write_text(digest + "\n", encoding="utf-8")
    logger.info("installed stopword list to %s (sha256 %s)", dest, digest)
    return dest
