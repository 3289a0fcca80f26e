# DAL/space_dao.py
# SpaceDAO - load and save finite spaces and range sets through the JsonStore.
from typing import Any, Dict, Optional, Tuple
import logging

from DAL import codec
from DAL.json_store import digest
from SERVICE.space_service import FiniteUltrametricSpace
from SERVICE.values_service import RangeSet

logger = logging.getLogger(__name__)


class SpaceDAO:
    def __init__(self, store):
        self.store = store

    def load_range_set(self, source: Optional[str]) -> Tuple[Optional[RangeSet], Optional[str]]:
        if not source:
            return None, None
        obj, sha = self.store.read(source)
        return codec.range_set_from_json(obj), sha

    def load_space(self, source: str, range_set: Optional[RangeSet] = None,
                   check: bool = True) -> Tuple[FiniteUltrametricSpace, str]:
        """
        JSON space document, or a CSV matrix when the path ends in .csv.
        With check=False the matrix is only shape-checked so callers can validate it themselves.
        """
        if source.lower().endswith(".csv"):
            text, _ = self.store.read_text(source)
            return codec.space_from_csv(text, range_set, check), digest(text)
        obj, sha = self.store.read(source)
        return codec.space_from_json(obj, range_set, check), sha

    def load_raw(self, source: str) -> Tuple[Dict[str, Any], str]:
        return self.store.read(source)

    def save_space(self, target: Optional[str], space: FiniteUltrametricSpace, extra: Optional[dict] = None) -> None:
        payload = codec.space_to_json(space)
        if extra:
            payload.update(extra)
        self.store.write(target, payload)
