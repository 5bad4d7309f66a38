# engine/output.py
import logging
import os
from pathlib import Path
from typing import Union

logger = logging.getLogger(__name__)

PARTIAL_SUFFIX = ".partial"


def write_text_atomic(path: Union[str, Path], text: str) -> Path:
    """
    Write text next to path as <path>.partial, then rename over path.

    A failed write leaves no partial file behind and the error names the path.
    """
    target = Path(path)
    partial = target.with_name(target.name + PARTIAL_SUFFIX)
    try:
        if target.parent and not target.parent.exists():
            target.parent.mkdir(parents=True, exist_ok=True)
        with open(partial, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(partial, target)
    except OSError as exc:
        discard_partial(target)
        raise OSError(f"cannot write {target}: {exc.strerror or exc}") from exc
    logger.debug("[OUTPUT] wrote %s (%d bytes)", target, len(text))
    return target


def discard_partial(path: Union[str, Path]) -> None:
    partial = Path(path).with_name(Path(path).name + PARTIAL_SUFFIX)
    try:
        partial.unlink()
    except FileNotFoundError:
        pass
