# DAL/problem_dao.py
# ProblemDAO - interpolation problems, telescope specs and sequence specs.
from typing import Optional, Tuple
import logging

from DAL import codec
from SERVICE.extend_service import InterpolationProblem
from SERVICE.telescope_service import SequenceSpace, TelescopeSpace
from SERVICE.values_service import RangeSet

logger = logging.getLogger(__name__)


class ProblemDAO:
    def __init__(self, store):
        self.store = store

    def load_problem(self, source: str, range_set: Optional[RangeSet] = None) -> Tuple[InterpolationProblem, str]:
        """{"ambient": <space>, "family": [{"subset": [...], "matrix": [[...]]}, ...]}"""
        obj, sha = self.store.read(source)
        ambient = codec.space_from_json(obj["ambient"], range_set)
        family = codec.family_from_json(obj.get("family", []), ambient.range_set)
        logger.debug("problem with %d points and %d family members", len(ambient), len(family))
        return InterpolationProblem.of(ambient, family), sha

    def load_telescope(self, source: str, range_set: Optional[RangeSet] = None) -> Tuple[TelescopeSpace, str]:
        obj, sha = self.store.read(source)
        return codec.telescope_from_json(obj, range_set), sha

    def load_sequence(self, source: str, range_set: Optional[RangeSet] = None) -> Tuple[SequenceSpace, str]:
        obj, sha = self.store.read(source)
        return codec.sequence_from_json(obj, range_set), sha
