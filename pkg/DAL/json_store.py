# DAL/json_store.py
# JsonStore: the single point of access for JSON documents (files, stdin, inline text).
# - Inline documents are recognised by a leading "{" or "[".
# - "-" reads standard input / writes standard output.
# - Every read returns the sha256 digest of the raw text so reports can name their inputs.
from typing import Any, Optional, Tuple
import hashlib
import json
import logging
import os
import sys
import threading

logger = logging.getLogger(__name__)


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class JsonStore:
    def __init__(self, config: Optional[dict] = None):
        self.config = config or {}
        self.encoding = self.config.get("encoding", "utf-8")
        self.indent = self.config.get("indent", 2)
        self._lock = threading.RLock()

    def read_text(self, source: str) -> Tuple[str, str]:
        """Return (text, origin) for a path, "-" or an inline document."""
        with self._lock:
            stripped = source.lstrip()
            if stripped.startswith("{") or stripped.startswith("["):
                return source, "inline"
            if source == "-":
                return sys.stdin.read(), "stdin"
            path = os.path.abspath(source)
            try:
                with open(path, "r", encoding=self.encoding) as fh:
                    return fh.read(), path
            except OSError:
                logger.exception("could not read %s", path)
                raise

    def read(self, source: str) -> Tuple[Any, str]:
        """Parsed JSON plus the digest of its text."""
        text, origin = self.read_text(source)
        try:
            obj = json.loads(text)
        except json.JSONDecodeError:
            logger.exception("invalid JSON in %s", origin)
            raise
        logger.debug("loaded %s (%d bytes)", origin, len(text))
        return obj, digest(text)

    def dumps(self, obj: Any) -> str:
        return json.dumps(obj, indent=self.indent, sort_keys=False)

    def write(self, target: Optional[str], obj: Any) -> None:
        text = self.dumps(obj)
        with self._lock:
            if not target or target == "-":
                sys.stdout.write(text + "\n")
                sys.stdout.flush()
                return
            path = os.path.abspath(target)
            try:
                with open(path, "w", encoding=self.encoding) as fh:
                    fh.write(text + "\n")
                logger.info("wrote %s", path)
            except OSError:
                logger.exception("could not write %s", path)
                raise
