"""Scenario elaboration, check execution, and reports.

The runner turns a parsed scenario into engine objects, executes each
check, and collects one record per check.  A record carries the engine
verdict (pass, fail, undecided, error), the declared expectation, and
whether the two agree; a scenario passes when every check agrees with
its declaration.  Undecided and error verdicts only count as agreement
under `expect report`.

Reports are pure functions of (scenario text, seed, samples, tol): all
randomness is hash-derived per check, evidence carries no timing, and
JSON output is key-sorted, so two runs with the same inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import dsl
from .charts import Chart, ChartMap, DForm, Metric, VectorField, function_form
from .errors import ElaborationError, NsxError
from .locus import (
    DEFAULT_MARGIN,
    CoordLocus,
    EmptyLocus,
    ImageLocus,
    LocusSampler,
    PointsLocus,
    Region,
    UnionLocus,
    derive_seed,
    lattice_envs,
    off_locus_envs,
    random_env,
    verify_dividing_set,
    verify_fixed_points,
    verify_positive,
    verify_rank_drop_locus,
    verify_vanishing_locus,
)
from .pointcheck import (
    contact_test,
    gradient_rank_at,
    near_symplectic_at,
    rank_at,
    stabilizing_constant_search,
)
from .props import run_property_battery
from .symexpr import (
    DEFAULT_REGISTRY,
    PI,
    Equal,
    NotEqual,
    cos_of,
    exp_of,
    rat,
    semantically_equal,
    sin_of,
    sym,
)
from .sympl import graph_straightening

__all__ = [
    "RunConfig",
    "CheckRecord",
    "ScenarioReport",
    "SuiteReport",
    "run_scenario_text",
    "run_suite",
    "report_json",
    "report_text",
    "DEFAULT_SEED",
]

DEFAULT_SEED = 0xC0FFEE
REPORT_VERSION = "1"


@dataclass(frozen=True)
class RunConfig:
    seed: int = DEFAULT_SEED
    samples: int | None = None
    tol: float = 1e-9

    def region_count(self, declared):
        if self.samples is None:
            return declared
        return min(declared, max(8, self.samples**3))

    def grid_n(self, declared):
        if self.samples is not None:
            return self.samples
        return declared if declared else 64


@dataclass
class CheckRecord:
    index: int
    kind: str
    verdict: str  # pass fail undecided error
    expect: str
    ok: bool
    anchor: str
    detail: str
    evidence: dict


@dataclass
class ScenarioReport:
    sid: str
    anchor: str
    status: str  # pass fail
    checks: list


@dataclass
class SuiteReport:
    seed: int
    scenarios: list

    @property
    def passed(self):
        return all(s.status == "pass" for s in self.scenarios)


# ---------------------------------------------------------------------------
# Elaboration


class Scope:
    def __init__(self, config):
        self.config = config
        self.charts = {}
        self.chart_order = []
        self.params = set()
        self.opaques = set()
        self.consts = {}
        self.forms = {}
        self.vfields = {}
        self.maps = {}
        self.metrics = {}
        self.regions = {}
        self.loci = {}
        self.registry = DEFAULT_REGISTRY

    def declare(self, kind, name, value):
        for space in (
            self.charts,
            self.consts,
            self.forms,
            self.vfields,
            self.maps,
            self.metrics,
            self.regions,
            self.loci,
        ):
            if name in space:
                raise ElaborationError(f"{name!r} is already defined")
        if name in self.params or name in self.opaques:
            raise ElaborationError(f"{name!r} is already defined")
        getattr(self, kind)[name] = value

    def chart(self, name):
        if name not in self.charts:
            raise ElaborationError(f"unknown chart {name!r}")
        return self.charts[name]

    def named(self, space, name, what):
        table = getattr(self, space)
        if name not in table:
            raise ElaborationError(f"unknown {what} {name!r}")
        return table[name]


def _scalar_of(value, what="a scalar"):
    if isinstance(value, DForm) and value.degree == 0:
        return value.coefficient(())
    raise ElaborationError(f"expected {what} (a degree-0 form)")


def _value(scope, chart, node):
    """Elaborate an expression AST against a chart.

    Scalars are degree-0 forms throughout; the result is a DForm or a
    VectorField and binary operators dispatch on the operand kinds.
    """
    if isinstance(node, dsl.Num):
        return function_form(chart, rat(node.value))
    if isinstance(node, dsl.Pi):
        return function_form(chart, PI)
    if isinstance(node, dsl.Ref):
        name = node.name
        if name in chart.coords:
            return function_form(chart, sym(name))
        if name in scope.consts:
            return function_form(chart, scope.consts[name])
        if name in scope.params:
            return function_form(chart, sym(name))
        if name in scope.forms:
            form = scope.forms[name]
            if form.chart != chart:
                raise ElaborationError(
                    f"form {name!r} lives on chart {form.chart.name}, not {chart.name}"
                )
            return form
        if name in scope.vfields:
            vf = scope.vfields[name]
            if vf.chart != chart:
                raise ElaborationError(
                    f"field {name!r} lives on chart {vf.chart.name}, not {chart.name}"
                )
            return vf
        raise ElaborationError(f"unknown name {name!r}")
    if isinstance(node, dsl.Call):
        name = node.name
        if name in ("exp", "sin", "cos"):
            arg = _scalar_of(_value(scope, chart, node.arg), f"the argument of {name}")
            fn = {"exp": exp_of, "sin": sin_of, "cos": cos_of}[name]
            return function_form(chart, fn(arg))
        if name in scope.opaques:
            arg = _scalar_of(_value(scope, chart, node.arg), f"the argument of {name}")
            for c in chart.coords:
                if arg == sym(c):
                    from .symexpr import opaque_fn

                    return function_form(chart, opaque_fn(name, c))
            raise ElaborationError(
                f"opaque {name!r} takes a bare coordinate argument"
            )
        if name.startswith("i_") and name[2:] in scope.vfields:
            vf = scope.vfields[name[2:]]
            arg = _value(scope, chart, node.arg)
            if not isinstance(arg, DForm):
                raise ElaborationError("interior product needs a form")
            return arg.interior(vf)
        raise ElaborationError(f"unknown function {name!r}")
    if isinstance(node, dsl.D):
        arg = _value(scope, chart, node.arg)
        if not isinstance(arg, DForm):
            raise ElaborationError("d applies to forms")
        return arg.d()
    if isinstance(node, dsl.Basis):
        if node.coord not in chart.coords:
            raise ElaborationError(f"unknown coordinate {node.coord!r}")
        return VectorField.build(chart, [(node.coord, rat(1))])
    if isinstance(node, dsl.Pullback):
        cmap = scope.named("maps", node.map_name, "map")
        if cmap.source != chart:
            raise ElaborationError(
                f"pullback through {node.map_name!r} lands on {cmap.source.name}, not {chart.name}"
            )
        inner = _value(scope, cmap.target, node.arg)
        if not isinstance(inner, DForm):
            raise ElaborationError("pullback applies to forms")
        return cmap.pullback(inner)
    if isinstance(node, dsl.Star):
        metric = scope.named("metrics", node.metric_name, "metric")
        if metric.chart != chart:
            raise ElaborationError(
                f"metric {node.metric_name!r} lives on {metric.chart.name}, not {chart.name}"
            )
        inner = _value(scope, chart, node.arg)
        if not isinstance(inner, DForm):
            raise ElaborationError("star applies to forms")
        return metric.star(inner)
    if isinstance(node, dsl.Neg):
        return -_value(scope, chart, node.arg)
    if isinstance(node, dsl.Bin):
        return _bin_value(scope, chart, node)
    raise ElaborationError(f"unsupported expression node {type(node).__name__}")


def _bin_value(scope, chart, node):
    op = node.op
    if op == "^":
        base = _value(scope, chart, node.left)
        k = node.right.value
        if isinstance(base, DForm) and base.degree == 0:
            return function_form(chart, base.coefficient(()) ** k)
        if isinstance(base, DForm):
            if k < 0:
                raise ElaborationError("negative powers need a scalar base")
            return base.wedge_power(k)
        raise ElaborationError("powers apply to forms")
    left = _value(scope, chart, node.left)
    right = _value(scope, chart, node.right)
    if op in ("+", "-"):
        if isinstance(left, DForm) != isinstance(right, DForm):
            raise ElaborationError(f"cannot mix forms and fields under {op!r}")
        try:
            return left + right if op == "+" else left - right
        except NsxError:
            raise
        except TypeError:
            raise ElaborationError(f"incompatible operands for {op!r}")
    if op == "/":
        divisor = _scalar_of(right, "a scalar divisor")
        recip = rat(1) / divisor
        return left * recip
    # wedge-class operator
    if isinstance(left, DForm) and isinstance(right, DForm):
        return left.wedge(right)
    if isinstance(left, DForm) and left.degree == 0 and isinstance(right, VectorField):
        return right * left.coefficient(())
    if isinstance(right, DForm) and right.degree == 0 and isinstance(left, VectorField):
        return left * right.coefficient(())
    raise ElaborationError("cannot multiply two vector fields")


def _infer_value(scope, node):
    """Elaborate against each declared chart until one accepts."""
    first_error = None
    for name in scope.chart_order:
        try:
            return _value(scope, scope.charts[name], node)
        except NsxError as e:
            if first_error is None:
                first_error = e
    if first_error is not None:
        raise first_error
    raise ElaborationError("no charts are declared")


def _subs_value(value, mapping):
    if not mapping:
        return value
    if isinstance(value, DForm):
        return DForm.build(
            value.chart,
            value.degree,
            [(k, e.subs(mapping)) for k, e in value.comps.items()],
        )
    return VectorField(value.chart, {i: e.subs(mapping) for i, e in value.comps.items()})


def _where_mapping(where):
    return {name: rat(v) for name, v in where}


def elaborate_scope(scenario, config):
    scope = Scope(config)
    for stmt in scenario.statements:
        if isinstance(stmt, dsl.ChartStmt):
            chart = Chart(stmt.name, stmt.coords)
            scope.declare("charts", stmt.name, chart)
            scope.chart_order.append(stmt.name)
        elif isinstance(stmt, dsl.ParamStmt):
            scope.params |= set(stmt.names)
        elif isinstance(stmt, dsl.OpaqueStmt):
            scope.opaques |= set(stmt.names)
        elif isinstance(stmt, dsl.ConstStmt):
            expr = _scalar_of(_infer_value(scope, stmt.expr), "a constant")
            scope.declare("consts", stmt.name, expr)
        elif isinstance(stmt, dsl.FormStmt):
            chart = scope.chart(stmt.chart)
            value = _value(scope, chart, stmt.expr)
            if isinstance(value, VectorField):
                raise ElaborationError(f"{stmt.name!r} elaborates to a field, not a form")
            scope.declare("forms", stmt.name, value)
        elif isinstance(stmt, dsl.VFieldStmt):
            chart = scope.chart(stmt.chart)
            value = _value(scope, chart, stmt.expr)
            if not isinstance(value, VectorField):
                raise ElaborationError(f"{stmt.name!r} elaborates to a form, not a field")
            scope.declare("vfields", stmt.name, value)
        elif isinstance(stmt, dsl.MapStmt):
            source = scope.chart(stmt.source)
            target = scope.chart(stmt.target)
            comps = tuple(
                _scalar_of(_value(scope, source, c), "a map component")
                for c in stmt.comps
            )
            scope.declare("maps", stmt.name, ChartMap(stmt.name, source, target, comps))
        elif isinstance(stmt, dsl.MetricStmt):
            chart = scope.chart(stmt.chart)
            metric = (
                Metric.euclidean(chart)
                if not stmt.diag
                else Metric.diagonal(chart, stmt.diag)
            )
            scope.declare("metrics", stmt.name, metric)
        elif isinstance(stmt, dsl.RegionStmt):
            chart = scope.chart(stmt.chart)
            count = config.region_count(stmt.random_count)
            scope.declare(
                "regions",
                stmt.name,
                Region(chart, stmt.intervals, stmt.lattice, count),
            )
        elif isinstance(stmt, dsl.LocusStmt):
            scope.declare("loci", stmt.name, _elaborate_locus(scope, stmt))
        elif isinstance(stmt, dsl.CheckStmt):
            pass
        else:
            raise ElaborationError(f"unsupported statement {type(stmt).__name__}")
    return scope


def _elaborate_locus(scope, stmt):
    chart = scope.chart(stmt.chart)
    if stmt.flavour == "empty":
        return EmptyLocus(chart)
    if stmt.flavour == "coords":
        return CoordLocus(chart, tuple(stmt.payload))
    if stmt.flavour == "points":
        pts = []
        for values in stmt.payload:
            if len(values) != chart.dim:
                raise ElaborationError(
                    f"point has {len(values)} coordinates, chart {chart.name} has {chart.dim}"
                )
            pts.append(tuple(zip(chart.coords, values)))
        return PointsLocus(chart, tuple(pts))
    if stmt.flavour == "image":
        map_name, region_name = stmt.payload
        region = scope.named("regions", region_name, "region")
        cmap = None if map_name == "id" else scope.named("maps", map_name, "map")
        locus = ImageLocus(cmap, region)
        if locus.chart != chart:
            raise ElaborationError("image locus lands on a different chart")
        return locus
    if stmt.flavour == "union":
        parts = tuple(scope.named("loci", n, "locus") for n in stmt.payload)
        return UnionLocus(parts)
    raise ElaborationError(f"unknown locus flavour {stmt.flavour!r}")


# ---------------------------------------------------------------------------
# Check execution


class _Ctx:
    def __init__(self, scope, stmt, sid, index, config):
        self.scope = scope
        self.stmt = stmt
        self.sid = sid
        self.index = index
        self.config = config
        self.seed = derive_seed(config.seed, sid, index)
        self.tol = config.tol
        self.where = _where_mapping(stmt.where)
        self.registry = scope.registry

    def form(self, node, degree=None, what="a form"):
        value = _subs_value(_infer_value(self.scope, node), self.where)
        if not isinstance(value, DForm):
            raise ElaborationError(f"expected {what}")
        if degree is not None and value.degree != degree:
            raise ElaborationError(
                f"expected {what} of degree {degree}, got degree {value.degree}"
            )
        return value

    def scalar(self, node, what="a scalar"):
        return self.form(node, degree=0, what=what).coefficient(())

    def vfield(self, name):
        return _subs_value(self.scope.named("vfields", name, "field"), self.where)

    def point_env(self, pairs, chart):
        env = dict(pairs)
        missing = set(chart.coords) - set(env)
        extra = set(env) - set(chart.coords)
        if missing or extra:
            raise ElaborationError(
                f"point must assign exactly the coordinates of {chart.name}"
            )
        return env

    def locus(self, name):
        return self.scope.named("loci", name, "locus")

    def region(self, name):
        return self.scope.named("regions", name, "region")

    def via(self, name):
        return None if name is None else self.scope.named("maps", name, "map")

    def margin(self, value):
        return DEFAULT_MARGIN if value is None else value


def _locus_report_result(report):
    if report.undecided:
        verdict = "undecided"
    else:
        verdict = "pass" if report.passed else "fail"
    evidence = {
        "on_count": report.on_count,
        "off_count": report.off_count,
        "on_failures": report.on_failures,
        "off_failures": report.off_failures,
        "counterexamples": report.counterexamples,
        "notes": report.notes,
    }
    detail = (
        f"({report.on_count - report.on_failures}/{report.on_count} on-locus, "
        f"{report.off_count - report.off_failures}/{report.off_count} off-locus)"
    )
    return verdict, evidence, detail


def _compare_forms(left, right, ctx, evidence):
    if left.chart != right.chart:
        raise ElaborationError("cannot compare forms on different charts")
    if left.degree != right.degree:
        evidence["status"] = "degree mismatch"
        evidence["degrees"] = [left.degree, right.degree]
        return "fail", f"(degree {left.degree} vs {right.degree})"
    keys = sorted(set(left.comps) | set(right.comps))
    evidence["coefficients"] = len(keys)
    undecided = 0
    for key in keys:
        a = left.coefficient(key)
        b = right.coefficient(key)
        outcome = semantically_equal(
            a, b, seed=ctx.seed, tol=ctx.tol, registry=ctx.registry
        )
        if isinstance(outcome, NotEqual):
            evidence["status"] = "not equal"
            evidence["differs_at"] = list(key)
            if outcome.witness is not None:
                evidence["witness"] = dict(outcome.witness)
                evidence["values"] = list(outcome.values)
            return "fail", f"(differs at {list(key)})"
        if not isinstance(outcome, Equal):
            undecided += 1
    if undecided:
        evidence["status"] = "undecided"
        evidence["undecided_coefficients"] = undecided
        return "undecided", f"({undecided} coefficients undecided)"
    evidence["status"] = "equal"
    return "pass", "(equal)"


def _run_closed(ctx, p):
    form = ctx.form(p["form"])
    residual = form.d()
    n = len(residual.comps)
    evidence = {"degree": form.degree, "residual_terms": n}
    if n:
        worst = sorted(residual.comps)[0]
        evidence["first_residual"] = {"indices": list(worst), "value": str(residual.comps[worst])}
    return ("pass" if n == 0 else "fail"), evidence, "(exact)" if n == 0 else f"({n} residual terms)"


def _run_equal(ctx, p):
    left = ctx.form(p["left"])
    right = ctx.form(p["right"])
    evidence = {}
    verdict, detail = _compare_forms(left, right, ctx, evidence)
    return verdict, evidence, detail


def _run_pullback_eq(ctx, p):
    cmap = ctx.scope.named("maps", p["map"], "map")
    upstairs = _subs_value(_value(ctx.scope, cmap.target, p["form"]), ctx.where)
    if not isinstance(upstairs, DForm):
        raise ElaborationError("pullback_eq needs a form on the target chart")
    expected = _subs_value(_value(ctx.scope, cmap.source, p["expected"]), ctx.where)
    if not isinstance(expected, DForm):
        raise ElaborationError("pullback_eq needs a form on the source chart")
    computed = cmap.pullback(upstairs)
    evidence = {"map": cmap.name}
    verdict, detail = _compare_forms(computed, expected, ctx, evidence)
    return verdict, evidence, detail


def _sample_envs(ctx, p):
    locus = ctx.locus(p["locus"])
    region = ctx.region(p["region"])
    sampler = LocusSampler(locus, region, ctx.seed)
    cap = p.get("points")
    if p["mode"] == "on":
        envs = sampler.on_envs
        return envs[:cap] if cap else envs
    count = cap if cap else 8
    envs, exhausted = off_locus_envs(sampler, ctx.margin(p.get("margin")), count, ctx.seed)
    if exhausted:
        raise ElaborationError("not enough off-locus samples in the region")
    return envs


def _run_rank_at(ctx, p):
    form = ctx.form(p["form"])
    expected = p["rank"]
    if p["mode"] == "at":
        envs = [ctx.point_env(p["point"], form.chart)]
    else:
        envs = _sample_envs(ctx, p)
    failures = []
    undecided = 0
    got = None
    for env in envs:
        v = rank_at(form, env, registry=ctx.registry)
        got = v.rank
        if v.undecided:
            undecided += 1
        elif v.rank != expected:
            failures.append({"point": {c: str(x) for c, x in env.items()}, "rank": v.rank})
    evidence = {
        "expected": expected,
        "points": len(envs),
        "mismatches": len(failures),
        "undecided": undecided,
    }
    if failures:
        evidence["first_mismatch"] = failures[0]
    if undecided:
        return "undecided", evidence, f"({undecided} of {len(envs)} points undecided)"
    if failures:
        return "fail", evidence, f"(rank {failures[0]['rank']}, expected {expected})"
    detail = f"(rank {expected}" + (f" at {len(envs)} points)" if len(envs) > 1 else ")")
    return "pass", evidence, detail


def _run_gradient_rank_at(ctx, p):
    form = ctx.form(p["form"])
    env = ctx.point_env(p["point"], form.chart)
    v = gradient_rank_at(form, env, registry=ctx.registry)
    evidence = {"expected": p["rank"], "rank": v.rank, "exact": v.exact}
    if v.undecided:
        return "undecided", evidence, "(rank undecided)"
    if v.rank != p["rank"]:
        return "fail", evidence, f"(rank {v.rank}, expected {p['rank']})"
    return "pass", evidence, f"(rank {v.rank})"


def _run_nearsympl_at(ctx, p):
    form = ctx.form(p["form"])
    if p["mode"] == "at":
        envs = [ctx.point_env(p["point"], form.chart)]
    else:
        envs = _sample_envs(ctx, p)
    failures = []
    q_signs = set()
    consistent = True
    for env in envs:
        v = near_symplectic_at(form, env, registry=ctx.registry)
        if v.passed:
            q_signs.add(v.q_sign)
            if v.grad_kernel_consistent is False:
                consistent = False
        else:
            failures.append(
                {"point": {c: str(x) for c, x in env.items()}, "reason": v.reason}
            )
    evidence = {
        "points": len(envs),
        "failures": len(failures),
        "q_signs": sorted(s for s in q_signs if s),
        "grad_kernel_consistent": consistent,
    }
    if failures:
        evidence["first_failure"] = failures[0]
        return "fail", evidence, f"({failures[0]['reason']})"
    return "pass", evidence, f"({len(envs)} points)"


def _run_contact(ctx, p):
    form = ctx.form(p["form"], degree=1, what="a 1-form")
    maps = [ctx.scope.named("maps", m, "map") for m in p["maps"]]
    parametrizations = maps if maps else [None]
    grid = ctx.config.grid_n(p["grid"])
    aux = p["aux"] if p["aux"] else 8
    verdict = contact_test(
        form,
        parametrizations,
        grid_n=grid,
        aux_count=aux,
        seed=ctx.seed,
        tol=ctx.tol,
        registry=ctx.registry,
    )
    charts_ev = []
    symbolic = []
    pos = neg = zero = 0
    for rep in verdict.charts:
        entry = {
            "label": rep.label,
            "mode": rep.mode,
            "sign": rep.sign,
            "samples": rep.samples,
            "positive": rep.n_pos,
            "negative": rep.n_neg,
            "zero": rep.n_zero,
            "jacobian_drops": rep.jacobian_drops,
        }
        if rep.symbolic_value is not None:
            entry["symbolic_value"] = rep.symbolic_value
            symbolic.append(rep.symbolic_value)
        if rep.min_abs is not None:
            entry["min_abs"] = rep.min_abs
        if rep.worst_point is not None:
            entry["worst_point"] = rep.worst_point
        pos += rep.n_pos
        neg += rep.n_neg
        zero += rep.n_zero
        charts_ev.append(entry)
    evidence = {
        "reason": verdict.reason,
        "orientation_reversed": verdict.orientation_reversed,
        "charts": charts_ev,
    }
    if symbolic and all(r.mode == "symbolic" for r in verdict.charts):
        detail = f"(symbolic: {symbolic[0]})"
    elif verdict.passed:
        detail = f"({pos + neg} samples, one sign)"
    else:
        detail = f"({verdict.reason}; +{pos} -{neg} 0:{zero})"
    return ("pass" if verdict.passed else "fail"), evidence, detail


def _run_vanishing_locus(ctx, p):
    form = ctx.form(p["form"])
    off_form = ctx.form(p["off_form"]) if p["off_form"] is not None else None
    report = verify_vanishing_locus(
        form,
        ctx.locus(p["locus"]),
        ctx.region(p["region"]),
        off_form=off_form,
        off_mode=p["off_mode"],
        via=ctx.via(p.get("via")),
        margin=ctx.margin(p.get("margin")),
        tol=ctx.tol,
        seed=ctx.seed,
        registry=ctx.registry,
    )
    return _locus_report_result(report)


def _run_rank_drop_locus(ctx, p):
    cmap = ctx.scope.named("maps", p["map"], "map")
    report = verify_rank_drop_locus(
        cmap,
        ctx.locus(p["locus"]),
        ctx.region(p["region"]),
        regular_rank=p["regular"],
        singular_rank=p["singular"],
        margin=ctx.margin(p.get("margin")),
        seed=ctx.seed,
    )
    return _locus_report_result(report)


def _run_fixed_points(ctx, p):
    report = verify_fixed_points(
        ctx.vfield(p["field"]),
        ctx.locus(p["locus"]),
        ctx.region(p["region"]),
        via=ctx.via(p.get("via")),
        margin=ctx.margin(p.get("margin")),
        tol=ctx.tol,
        seed=ctx.seed,
        registry=ctx.registry,
    )
    return _locus_report_result(report)


def _run_dividing_set(ctx, p):
    alpha = ctx.form(p["alpha"], degree=1, what="a 1-form")
    scalar = ctx.scalar(p["scalar"], what="the declared pairing")
    report = verify_dividing_set(
        alpha,
        ctx.vfield(p["field"]),
        scalar,
        ctx.locus(p["locus"]),
        ctx.region(p["region"]),
        via=ctx.via(p.get("via")),
        margin=ctx.margin(p.get("margin")),
        tol=ctx.tol,
        seed=ctx.seed,
        registry=ctx.registry,
    )
    return _locus_report_result(report)


def _run_bracket_table(ctx, p):
    dim = p["dim"]
    ys = Chart(f"bt{dim}", tuple(f"y{i}" for i in range(1, dim + 1)))
    scratch = Scope(ctx.config)
    scratch.charts["__bt"] = ys
    scratch.chart_order.append("__bt")
    scratch.params = ctx.scope.params
    scratch.consts = ctx.scope.consts
    h = _scalar_of(_value(scratch, ys, p["h"]), "the graph function").subs(ctx.where)
    result = graph_straightening(h, dim)
    offending = [
        {"pair": [a, b], "got": str(got), "expected": str(expected)}
        for a, b, got, expected in result.offending
    ]
    evidence = {
        "dim": dim,
        "offending": offending,
        "q1_vanishes_on_graph": result.q1_vanishes_on_graph,
        "pullback_is_standard": result.pullback_is_standard,
        "reindexing_identical": result.reindexing_identical,
        "notes": result.notes,
    }
    ok = result.passed and result.q1_vanishes_on_graph and result.pullback_is_standard
    if ok:
        return "pass", evidence, "(canonical table)"
    if offending:
        first = offending[0]
        return "fail", evidence, f"({len(offending)} offending, e.g. {{{first['pair'][0]},{first['pair'][1]}}} = {first['got']})"
    return "fail", evidence, "(graph checks failed)"


def _run_stabilize(ctx, p):
    eta = ctx.form(p["eta"], degree=2, what="a 2-form")
    base = ctx.form(p["base"], degree=2, what="a 2-form")
    region = ctx.region(p["region"])
    import random as _random

    rng = _random.Random(derive_seed(ctx.seed, "stabilize"))
    envs = lattice_envs(region)
    envs += [random_env(region, rng) for _ in range(region.random_count)]
    k_max = p["k_max"] if p["k_max"] else 1 << 16
    result = stabilizing_constant_search(eta, base, envs, k_max=k_max, registry=ctx.registry)
    evidence = {
        "found": result.found,
        "constant": str(result.constant) if result.constant is not None else None,
        "attempts": len(result.tried),
        "samples": len(envs),
    }
    if result.witness is not None:
        evidence["witness"] = {c: str(v) for c, v in result.witness.items()}
    if result.found:
        return "pass", evidence, f"(K = {result.constant})"
    return "fail", evidence, f"(no constant up to {k_max})"


def _run_property(ctx, p):
    passed, evidence = run_property_battery(
        p["name"], p["samples"], p["dims"], derive_seed(ctx.seed, "prop", p["name"])
    )
    evidence["name"] = p["name"]
    if "checked" in evidence:
        detail = f"({evidence['checked']} basis forms, {evidence['failures']} failures)"
    else:
        detail = f"({evidence['samples']} samples, {evidence['failures']} failures)"
    return ("pass" if passed else "fail"), evidence, detail


def _run_positive(ctx, p):
    form = ctx.form(p["form"])
    report = verify_positive(
        form,
        ctx.region(p["region"]),
        tol=ctx.tol,
        seed=ctx.seed,
        registry=ctx.registry,
    )
    evidence = {
        "samples": report.on_count,
        "failures": report.on_failures,
        "counterexamples": report.counterexamples,
    }
    verdict = "pass" if report.passed else "fail"
    return verdict, evidence, f"({report.on_count} samples)"


_RUNNERS = {
    "closed": _run_closed,
    "equal": _run_equal,
    "rank_at": _run_rank_at,
    "nearsympl_at": _run_nearsympl_at,
    "gradient_rank_at": _run_gradient_rank_at,
    "contact": _run_contact,
    "vanishing_locus": _run_vanishing_locus,
    "rank_drop_locus": _run_rank_drop_locus,
    "fixed_points": _run_fixed_points,
    "dividing_set": _run_dividing_set,
    "pullback_eq": _run_pullback_eq,
    "bracket_table": _run_bracket_table,
    "stabilize": _run_stabilize,
    "property": _run_property,
    "positive": _run_positive,
}


def run_check(scope, stmt, sid, index, config):
    ctx = _Ctx(scope, stmt, sid, index, config)
    try:
        verdict, evidence, detail = _RUNNERS[stmt.kind](ctx, stmt.payload)
    except NsxError as e:
        verdict, evidence, detail = "error", {"error": str(e)}, "(error)"
    ok = stmt.expect == "report" or verdict == stmt.expect
    return CheckRecord(
        index=index,
        kind=stmt.kind,
        verdict=verdict,
        expect=stmt.expect,
        ok=ok,
        anchor=stmt.note,
        detail=detail,
        evidence=evidence,
    )


def run_scenario_text(text, sid, anchor, config=None):
    config = config or RunConfig()
    scenario = dsl.parse_scenario(text)
    try:
        scope = elaborate_scope(scenario, config)
    except NsxError as e:
        record = CheckRecord(
            index=0,
            kind="elaboration",
            verdict="error",
            expect="pass",
            ok=False,
            anchor="",
            detail="(error)",
            evidence={"error": str(e)},
        )
        return ScenarioReport(sid=sid, anchor=anchor, status="fail", checks=[record])
    checks = [
        run_check(scope, stmt, sid, i, config)
        for i, stmt in enumerate(scenario.checks())
    ]
    status = "pass" if checks and all(c.ok for c in checks) else "fail"
    if not checks:
        status = "pass"
    return ScenarioReport(sid=sid, anchor=anchor, status=status, checks=checks)


def run_suite(only=None, config=None):
    from .scenarios import SUITE

    config = config or RunConfig()
    wanted = None if only is None else set(only)
    reports = []
    for sid, anchor, text in SUITE:
        if wanted is not None and sid not in wanted:
            continue
        reports.append(run_scenario_text(text, sid, anchor, config))
    return SuiteReport(seed=config.seed, scenarios=reports)


# ---------------------------------------------------------------------------
# Serialization


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


def suite_dict(suite):
    return {
        "version": REPORT_VERSION,
        "seed": suite.seed,
        "scenarios": [
            {
                "id": s.sid,
                "anchor": s.anchor,
                "status": s.status,
                "checks": [
                    {
                        "index": c.index,
                        "kind": c.kind,
                        "verdict": c.verdict,
                        "expect": c.expect,
                        "ok": c.ok,
                        "anchor": c.anchor,
                        "detail": c.detail,
                        "evidence": _jsonable(c.evidence),
                    }
                    for c in s.checks
                ],
            }
            for s in suite.scenarios
        ],
    }


def report_json(suite):
    return json.dumps(suite_dict(suite), sort_keys=True, indent=2) + "\n"


def report_text(suite):
    lines = []
    for s in suite.scenarios:
        for c in s.checks:
            mark = "" if c.ok else " [unexpected]"
            declared = " [declared fail]" if c.expect == "fail" and c.ok else ""
            lines.append(
                f"{s.sid}.{c.index} {c.kind} {c.verdict.upper()} {c.detail}{declared}{mark}"
            )
        agreed = sum(1 for c in s.checks if c.ok)
        lines.append(f"{s.sid}: {s.status} ({agreed}/{len(s.checks)} checks as declared)")
    n_pass = sum(1 for s in suite.scenarios if s.status == "pass")
    lines.append(f"suite: {'pass' if suite.passed else 'fail'} ({n_pass}/{len(suite.scenarios)} scenarios)")
    return "\n".join(lines) + "\n"
