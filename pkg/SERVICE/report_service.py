# SERVICE/report_service.py
# ReportService: runs one CLI command against the domain services and fills a Report.
import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional

from config import APP_META, RUN_CONFIG
from DAL import codec
from SERVICE import (
    amalgam_service, embed_service, extend_service, generic_service, space_service, telescope_service,
)
from SERVICE.errors import UltrametricError
from SERVICE.space_service import FiniteUltrametricSpace, UltrametricPair
from SERVICE.values_service import as_value

logger = logging.getLogger(__name__)

V = codec.value_to_json


@dataclass
class Report:
    command: str
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, Any] = field(default_factory=dict)
    verdicts: List[Dict[str, Any]] = field(default_factory=list)
    exact_values: Dict[str, str] = field(default_factory=dict)
    pdf_space: Optional[FiniteUltrametricSpace] = None

    def verdict(self, name: str, passed: bool, witness: Optional[dict] = None) -> bool:
        if not passed:
            logger.warning("verdict %s failed: %s", name, witness)
        self.verdicts.append({"name": name, "passed": bool(passed), "witness": witness or {}})
        return passed

    def value(self, name: str, v) -> None:
        self.exact_values[name] = V(v)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts)

    def to_json(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "app": dict(APP_META),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "verdicts": self.verdicts,
            "exact_values": self.exact_values,
        }


def _grid(c_values, alpha_values) -> List[generic_service.DoublingCheck]:
    cs = c_values or RUN_CONFIG["default_c_grid"]
    alphas = alpha_values or RUN_CONFIG["default_alpha_grid"]
    return [generic_service.DoublingCheck(as_value(c), as_value(a)) for c in cs for a in alphas]


def _pairs_witness(space: FiniteUltrametricSpace, ref: FiniteUltrametricSpace) -> Optional[List[str]]:
    """First pair of `ref` on which `space` differs."""
    return next(([a, b] for a, b in ref.label_pairs() if space.d(a, b) != ref.d(a, b)), None)


class ReportService:
    def __init__(self, space_dao, problem_dao, store):
        self.space_dao = space_dao
        self.problem_dao = problem_dao
        self.store = store

    # ---------------- loading helpers ----------------
    def _range_set(self, args, report: Report):
        S, sha = self.space_dao.load_range_set(getattr(args, "range_set", None))
        if sha:
            report.inputs["range_set"] = sha
        return S

    def _space(self, source: str, args, report: Report, key: str, check: bool = True) -> FiniteUltrametricSpace:
        space, sha = self.space_dao.load_space(source, self._range_set(args, report), check)
        report.inputs[key] = sha
        return space

    def _emit_space(self, report: Report, space: FiniteUltrametricSpace, key: str = "space") -> None:
        report.outputs[key] = codec.space_to_json(space)
        report.pdf_space = space
        try:
            space_service.revalidate(space)
            report.verdict("valid", True)
        except UltrametricError as err:
            report.verdict("valid", False, {"error": err.name, **err.witness})

    # ---------------- core ----------------
    def validate(self, args, report: Report) -> None:
        space = self._space(args.space, args, report, "space", check=False)
        try:
            checked = space_service.revalidate(space)
        except UltrametricError as err:
            if err.name == "MalformedMatrix":
                raise
            report.verdict(err.name, False, err.witness)
            return
        report.verdict("valid", True)
        report.verdict("isosceles", space_service.isosceles_witness(checked) is None)
        report.outputs["space"] = codec.space_to_json(checked)
        report.outputs["realized_values"] = [V(v) for v in space_service.realized_values(checked)]
        report.value("diameter", space_service.diameter(checked))
        report.pdf_space = checked

    def dlps(self, args, report: Report) -> None:
        S = self._range_set(args, report)
        if S is None:
            raise KeyError("dlps needs --range-set")
        self._emit_space(report, space_service.dlps_space(S))

    def truncate(self, args, report: Report) -> None:
        space = self._space(args.space, args, report, "space")
        eps = as_value(args.eps)
        out = space_service.truncate(space, eps)
        report.value("eps", eps)
        self._emit_space(report, out)
        report.verdict("bounded_by_eps", space_service.diameter(out) <= eps)

    def product(self, args, report: Report) -> None:
        X = self._space(args.space, args, report, "X")
        Y = self._space(args.other, args, report, "Y")
        self._emit_space(report, space_service.sup_product(X, Y))

    def _pair(self, args, report: Report) -> UltrametricPair:
        d = self._space(args.space, args, report, "d")
        e = self._space(args.other, args, report, "e")
        return UltrametricPair.of(d, e)

    def ud(self, args, report: Report) -> None:
        pair = self._pair(args, report)
        value = space_service.ud_distance(pair)
        scan = space_service.ud_distance_scan(pair)
        report.value("ud", value)
        report.value("ud_scan", scan)
        report.verdict("ud_matches_scan", value == scan, {"ud": V(value), "scan": V(scan)})

    def dmax(self, args, report: Report) -> None:
        pair = self._pair(args, report)
        report.value("d_distance", space_service.d_distance(pair))
        report.value("ud", space_service.ud_distance(pair))

    # ---------------- amalgams ----------------
    def _emit_amalgam(self, report: Report, result: amalgam_service.AmalgamResult) -> None:
        self._emit_space(report, result.space)
        report.outputs["embeddings"] = result.embeddings
        if result.copy_map:
            report.outputs["copy_map"] = result.copy_map

    def amalgam(self, args, report: Report) -> None:
        X = self._space(args.space, args, report, "X")
        Y = self._space(args.other, args, report, "Y")
        r = as_value(args.r)
        result = amalgam_service.amalgam_disjoint(X, Y, r)
        self._emit_amalgam(report, result)
        h = result.space
        report.verdict("restricts_to_X", _pairs_witness(h, X) is None)
        report.verdict("restricts_to_Y", _pairs_witness(h, Y) is None)
        report.verdict("separated", all(h.d(x, y) >= r for x in X.points for y in Y.points))

    def glue(self, args, report: Report) -> None:
        X = self._space(args.space, args, report, "X")
        Y = self._space(args.other, args, report, "Y")
        result = amalgam_service.glue_over_intersection(X, Y, as_value(args.s))
        self._emit_amalgam(report, result)
        report.verdict("restricts_to_X", _pairs_witness(result.space, X) is None)
        report.verdict("restricts_to_Y", _pairs_witness(result.space, Y) is None)

    def copy_amalgam(self, args, report: Report) -> None:
        d = self._space(args.space, args, report, "d")
        e = self._space(args.other, args, report, "e")
        r = as_value(args.r)
        result = amalgam_service.copy_amalgam(d, e, r)
        self._emit_amalgam(report, result)
        h, tau = result.space, result.copy_map
        report.verdict("copy_distance", all(h.d(x, tau[x]) == r for x in d.points))
        report.verdict("copy_carries_e", all(h.d(tau[a], tau[b]) == e.d(a, b) for a, b in e.label_pairs()))

    def key_amalgam(self, args, report: Report) -> None:
        problem = self._problem(args, report)
        eta = as_value(args.eta) if args.eta else problem.ambient.range_set.round_up(problem.local_gap())
        result = amalgam_service.key_amalgam(problem.ambient, problem.family, eta)
        report.value("eta", eta)
        self._emit_amalgam(report, result)
        tau = result.copy_map
        report.verdict("copy_distance", all(result.space.d(a, t) == eta for a, t in tau.items()))

    # ---------------- embedding ----------------
    def embed(self, args, report: Report) -> None:
        space = self._space(args.space, args, report, "space")
        cert = embed_service.embed_finite(space)
        report.outputs["base"] = cert.base
        report.outputs["images"] = {p: codec.vector_to_json(f) for p, f in cert.images.items()}
        report.value("critical_value", cert.critical_value)
        report.outputs["independence_rank"] = cert.independence_rank
        broken = embed_service.isometry_defects(cert)
        report.verdict("isometry", not broken, {"pairs": [list(p) for p in broken]} if broken else {})
        bad = embed_service.support_condition(cert)
        report.verdict("support_condition", not bad, {"pairs": [list(p) for p in bad]} if bad else {})
        report.pdf_space = cert.extended

    def independence(self, args, report: Report) -> None:
        space = self._space(args.space, args, report, "space")
        cert = embed_service.embed_finite(space)
        ok, c = embed_service.independence_check(cert)
        report.value("critical_value", c)
        report.verdict("independent", ok, {"rank": cert.independence_rank})
        bound = RUN_CONFIG["coeff_bound"]
        if len(space) <= 3:
            sample = embed_service.submodule_svalued_exhaustive(cert, min(bound, 2))
            report.outputs["mode"] = "exhaustive"
        else:
            rng = random.Random(args.seed)
            sample = embed_service.submodule_svalued_sample(cert, RUN_CONFIG["submodule_trials"], bound, rng)
            report.outputs["mode"] = "sampled"
        report.outputs["trials"] = sample.trials
        report.outputs["norms"] = {V(k): n for k, n in sorted(sample.norms.items())}
        report.verdict("submodule_in_range_set", sample.holds,
                       {"violations": [[list(c), V(v)] for c, v in sample.violations]})

    # ---------------- interpolation ----------------
    def _problem(self, args, report: Report) -> extend_service.InterpolationProblem:
        problem, sha = self.problem_dao.load_problem(args.problem, self._range_set(args, report))
        report.inputs["problem"] = sha
        return problem

    def interpolate(self, args, report: Report) -> None:
        problem = self._problem(args, report)
        result = extend_service.interpolate(problem)
        report.outputs["space"] = codec.space_to_json(result.m)
        report.outputs["trace"] = result.trace
        report.pdf_space = result.m
        if result.eta is not None:
            report.value("eta", result.eta)
            report.value("ratio", result.ratio)
        report.value("lower", result.lower)
        report.value("upper", result.upper)
        report.value("ud", result.achieved)
        report.value("C", problem.ambient.range_set.quasi_completeness)
        for name, ok, witness in result.verdicts:
            report.verdict(name, ok, witness)
        if getattr(args, "minimal", False):
            best = extend_service.minimal_extension_ud(problem)
            report.value("minimal_ud", best)
            report.value("gap", result.achieved - best)

    def extend(self, args, report: Report) -> None:
        problem = self._problem(args, report)
        if len(problem.family) != 1:
            raise KeyError("extend needs a problem with exactly one family member")
        subset, e = problem.family[0]
        m = extend_service.extend_from_subset(problem.ambient, subset, e)
        self._emit_space(report, m)
        report.verdict("restricts_to_e", _pairs_witness(m, e) is None)

    # ---------------- telescopes ----------------
    def _telescope(self, args, report: Report):
        t, sha = self.problem_dao.load_telescope(args.spec, self._range_set(args, report))
        report.inputs["telescope"] = sha
        return t

    def telescope(self, args, report: Report) -> None:
        t = self._telescope(args, report)
        blocks = []
        for i in range(1, args.blocks + 1):
            blocks.append({"block": i, "size": len(t.block_labels(i)), "radius": V(t.radius(i))})
        report.outputs["blocks"] = blocks
        report.outputs["offset"] = t.offset
        report.value("diameter", t.diameter())
        self._emit_space(report, telescope_service.finite_prefix(t, args.blocks), "prefix")

    def prefix(self, args, report: Report) -> None:
        t = self._telescope(args, report)
        self._emit_space(report, telescope_service.finite_prefix(t, args.k))

    def demo_niemytzki(self, args, report: Report) -> None:
        if args.spec:
            sp, sha = self.problem_dao.load_sequence(args.spec, self._range_set(args, report))
            report.inputs["sequence"] = sha
        else:
            rule = (telescope_service.RadiusRule.harmonic() if args.radii == "harmonic"
                    else telescope_service.RadiusRule.geometric(Fraction(1, 2)))
            sp = telescope_service.SequenceSpace(rule)
        tol = as_value(args.tol)
        cert = telescope_service.cauchy_no_limit_witness(sp, tol)
        report.value("tol", tol)
        report.outputs["index"] = cert.index
        report.value("tail_diameter", cert.tail_diameter)
        report.outputs["infima"] = [[k, V(v)] for k, v in cert.infima]
        report.verdict("cauchy", cert.cauchy, {"index": cert.index})
        report.verdict("no_limit_point", cert.no_limit)

    # ---------------- genericity ----------------
    def doubling(self, args, report: Report) -> None:
        space = self._space(args.space, args, report, "space")
        q = generic_service.DoublingCheck(as_value(args.C), as_value(args.alpha))
        verdict = generic_service.doubling_check(space, q, exhaustive=True if args.exhaustive else None)
        report.outputs["exhaustive"] = verdict.exhaustive
        report.outputs["witness"] = list(verdict.witness) if verdict.witness else None
        for k, v in verdict.values.items():
            report.value(k, v)
        report.outputs["holds"] = verdict.holds

    def witness(self, args, report: Report) -> None:
        obj, sha = self.space_dao.load_raw(args.target)
        report.inputs["target"] = sha
        S = self._range_set(args, report)
        target = codec.space_from_json(obj, S) if "points" in obj else codec.telescope_from_json(obj, S)
        grid = _grid(args.C, args.alpha)
        found = generic_service.anti_doubling_witness(target, grid)
        report.outputs["witnesses"] = [{"C": V(q.C), "alpha": V(q.alpha), "witness": list(w), "size": len(w)}
                                       for q, w in found.items()]
        report.verdict("witnesses_reverify",
                       all(generic_service.verify_witness(target, w, q) for q, w in found.items()))

    def approx(self, args, report: Report) -> None:
        space = self._space(args.space, args, report, "space")
        T, sha = self.space_dao.load_range_set(args.target_range)
        report.inputs["target_range"] = sha
        eps = as_value(args.eps)
        e = generic_service.t_approx(space, T, eps)
        report.value("eps", eps)
        self._emit_space(report, e)
        gap = space_service.d_distance(UltrametricPair(space, e))
        report.value("sup_difference", gap)
        report.verdict("within_eps", gap < eps)

    def perturb(self, args, report: Report) -> None:
        t = self._telescope(args, report)
        eps = as_value(args.eps)
        result = generic_service.genericity_perturb(t, eps, _grid(args.C, args.alpha))
        report.value("eps", eps)
        report.outputs["start_block"] = result.start_block
        report.outputs["prefixes"] = [{"k": k, "ud": V(ud), "valid": ok} for k, ud, ok in result.prefixes]
        report.outputs["witnesses"] = [{"C": V(q.C), "alpha": V(q.alpha), "size": len(w)}
                                       for q, w in result.witnesses.items()]
        report.verdict("prefixes_valid", all(ok for _, _, ok in result.prefixes))
        report.verdict("ud_within_eps", all(ud <= eps for _, ud, _ in result.prefixes))

    # ---------------- export ----------------
    def export_to_pdf(self, filename: str, report: Report) -> None:
        if report.pdf_space is None:
            logger.warning("command %s produced no matrix to export", report.command)
            return
        try:
            from pdf_export import export_matrix_pdf
            space = report.pdf_space
            export_matrix_pdf(filename, list(space.points), [[V(v) for v in row] for row in space.dist],
                              {"title": f"{APP_META['name']}: {report.command}",
                               "range_set": str(codec.range_set_to_json(space.range_set)),
                               "notes": [f"{k} = {v}" for k, v in report.exact_values.items()]})
        except Exception:
            logger.exception("export_to_pdf failed")
            raise
