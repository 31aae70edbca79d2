"""
Scenario execution.

Tasks run in order against the scenario's model; a task that raises a
CycleCharError is reported with status "error" and the run continues.

Usage:
    from cyclechar.runner import run, set_default

    set_default(kernel="exact", tol=1e-9)
    report = run("cyclechar/scenarios/fredholm_rank_one.json")
    print(report.render_text())
"""

from dataclasses import asdict, dataclass, field, is_dataclass
from fractions import Fraction
from itertools import islice, product
import json
import time
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

from . import cyclic
from .cycles import (GeneralizedChain, character, character_exponential, connection_variation_chain,
                     verify_theorem_comp, verify_theorem_one)
from .cyclic import BBCochain, is_bb_cocycle, residual_report
from .equivariant import (crossed_cycle, crossed_sample, flow_cycle, gv_cobordism, scalar_algebra, scalar_crossed,
                          verify_gv_direct, verify_gv_relations, verify_prop_flow_equality)
from .errors import AmbiguityError, ConventionError, CycleCharError
from .fredholm import (FredholmModule, OperatorHomotopy, ch_even, ch_odd, commuting_pairing, cross_check_transgression,
                       float_module, fredholm_index, homotopy_chain, index_pairing, omega_cycle, sf_pairing,
                       transgression, unitary_spectral_flow, verify_theorem_coin, verify_transgression,
                       winding_reference)
from .logger import logger
from .progress import ProgressPrinter
from .scalars import Kernel, get_kernel
from .scenario import ModelBuilder, Scenario, TaskSpec, load

REPORT_VERSION = 1

_DEFAULT_KERNEL = "exact"
_DEFAULT_TOL = 1e-9
_DEFAULT_PAIRING_TOL = 1e-6
_DEFAULT_BUDGET = 10 ** 6
_DEFAULT_SAMPLES = 200
_DEFAULT_THREADS = 1
_DEFAULT_SEED = 0


def set_default(
    kernel: Optional[str] = None,
    tol: Optional[float] = None,
    pairing_tol: Optional[float] = None,
    budget: Optional[int] = None,
    samples: Optional[int] = None,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
) -> None:
    """Set default values for run() parameters."""
    global _DEFAULT_KERNEL, _DEFAULT_TOL, _DEFAULT_PAIRING_TOL, _DEFAULT_BUDGET, _DEFAULT_SAMPLES
    global _DEFAULT_THREADS, _DEFAULT_SEED
    if kernel is not None:
        get_kernel(kernel)
        _DEFAULT_KERNEL = kernel
    if tol is not None:
        _DEFAULT_TOL = float(tol)
    if pairing_tol is not None:
        _DEFAULT_PAIRING_TOL = float(pairing_tol)
    if budget is not None:
        _DEFAULT_BUDGET = int(budget)
    if samples is not None:
        _DEFAULT_SAMPLES = int(samples)
    if threads is not None:
        _DEFAULT_THREADS = max(1, int(threads))
    if seed is not None:
        _DEFAULT_SEED = int(seed)
    cyclic.configure(budget=budget, samples=samples, threads=threads)


# results


@dataclass
class TaskResult:
    name: str
    kind: str
    status: str               # pass | fail | error
    values: Dict[str, Any] = field(default_factory=dict)
    checks: List[Dict[str, Any]] = field(default_factory=list)
    tol: float = 0.0
    message: str = ""
    elapsed_ms: int = 0

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        out = {"name": self.name, "kind": self.kind, "status": self.status, "values": self.values,
               "checks": self.checks, "tol": self.tol, "message": self.message}
        if timing:
            out["elapsed_ms"] = self.elapsed_ms
        return out


@dataclass
class Report:
    scenario: str
    options: Dict[str, Any]
    conventions: Dict[str, Any]
    tasks: List[TaskResult] = field(default_factory=list)
    version: int = REPORT_VERSION

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tasks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def counts(self) -> Dict[str, int]:
        out = {"pass": 0, "fail": 0, "error": 0}
        for t in self.tasks:
            out[t.status] = out.get(t.status, 0) + 1
        return out

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        return {"version": self.version, "scenario": self.scenario, "passed": self.passed,
                "counts": self.counts(), "options": self.options, "conventions": self.conventions,
                "tasks": [t.to_dict(timing) for t in self.tasks]}

    def render_text(self) -> str:
        """Text rendering; every number is printed from the same dict as the JSON report."""
        def dump(x: Any) -> str:
            return json.dumps(x, ensure_ascii=False, sort_keys=True)

        data = self.to_dict()
        lines = [f"scenario: {data['scenario']} (report v{data['version']})",
                 " ".join(f"{k}={dump(v)}" for k, v in sorted(data["options"].items()))]
        for t in data["tasks"]:
            lines.append(f"[{t['status'].upper()}] {t['name']} ({t['kind']}) tol={dump(t['tol'])}")
            if t["message"]:
                lines.append(f"  message: {t['message']}")
            for key, value in sorted(t["values"].items()):
                lines.append(f"  {key}: {dump(value)}")
            for c in t["checks"]:
                label = c.get("label") or c.get("name") or "check"
                rest = {k: v for k, v in c.items() if k not in ("label", "name")}
                lines.append(f"  check {label}: {dump(rest)}")
        counts = data["counts"]
        lines.append(f"summary: {len(data['tasks'])} tasks, {counts['pass']} passed, {counts['fail']} failed, "
                     f"{counts['error']} errors")
        lines.append("conventions:")
        for key, value in sorted(data["conventions"].items()):
            lines.append(f"  {key}: {value}")
        return "\n".join(lines) + "\n"


def conventions() -> Dict[str, Any]:
    out = dict(cyclic.conventions())
    out.update({
        "character": "Ch^k = (-1)^j/(j+k)! sum int rho(a0) theta^i0 nabla rho(a1) .. theta^ik, j = (n-k)/2",
        "even_trace_constant": "m! Tr(gamma .)",
        "odd_trace_constant": "sqrt(2i) Gamma(m+3/2) Tr(.)",
        "sqrt_2i_branch": "principal, 1+i",
        "interval_orientation": ("int t^p dt (x) alpha = s^(p+1)/(p+1) int alpha; graded adds (-1)^|alpha|;"
                                 " boundary C(s) (+) C(0)"),
        "crossed_product": "(a'U_g')(aU_g) = a' a^g' U_gg', (g.w)(y) = w(g^-1 y)",
        "spectral_flow": "negative to positive crossings count +1, path F (x) 1 -> u*(F (x) 1)u",
    })
    return out


def to_value(K: Kernel, x: Any) -> Any:
    """A scalar as a JSON value: exact scalars as strings, floats as numbers or [re, im]."""
    if K.exact and not isinstance(x, (float, complex)):
        return K.format(x)
    z = complex(K.to_complex(x))
    return z.real if z.imag == 0 else [z.real, z.imag]


def _check(report: Any) -> Dict[str, Any]:
    if hasattr(report, "to_dict"):
        out = report.to_dict()
    elif is_dataclass(report):
        out = asdict(report)
    else:
        out = dict(report)
    if "passed" not in out and hasattr(report, "passed"):
        out["passed"] = bool(report.passed)
    return out


# task context


@dataclass
class RunContext:
    scenario: Scenario
    builder: ModelBuilder
    kernel: Kernel
    tol: float
    pairing_tol: float
    seed: int

    @property
    def kind(self) -> str:
        return self.scenario.model["kind"]

    def identity_tol(self, spec: TaskSpec) -> float:
        if spec.tol is not None:
            return spec.tol
        return 0.0 if self.kernel.exact else self.tol

    def quadrature_tol(self, spec: TaskSpec) -> float:
        return spec.tol if spec.tol is not None else self.pairing_tol

    def module(self) -> FredholmModule:
        return self.builder.module()

    def torus_cycle(self) -> GeneralizedChain:
        bundle = self.builder.bundle()
        crossed = scalar_crossed(bundle.action, self.kernel)
        algebra = scalar_algebra(crossed, crossed_sample(crossed, self.builder.max_freq()))
        return crossed_cycle(bundle, algebra)

    def cycle(self, m: int) -> GeneralizedChain:
        if self.kind.startswith("fredholm"):
            M = self.module()
            return omega_cycle(M if M.even else float_module(M), m)
        if self.kind == "matrix-form":
            return self.builder.matrix_cycle()
        if self.kind == "torus":
            return self.torus_cycle()
        data = self.builder.flow_data()
        return flow_cycle(data, 1, data.sample(self.builder.max_freq()))

    def character(self, m: int) -> BBCochain:
        if self.kind.startswith("fredholm"):
            M = self.module()
            return ch_even(M, m) if M.even else ch_odd(float_module(M), m)
        return character(self.cycle(m))


Outcome = Tuple[Dict[str, Any], List[Dict[str, Any]]]

WINDOW_NOTE = ("total flow of the finite model is 0; window flow counts the sign changes "
               "of the retained low modes, a surrogate for the infinite-dimensional flow of 1")


def _m(spec: TaskSpec) -> int:
    return int(spec.params.get("m", 1))


def _task_compute_character(ctx: RunContext, spec: TaskSpec) -> Outcome:
    m = _m(spec)
    alpha = spec.params.get("alpha")
    if alpha is not None and Fraction(alpha) != 1:
        phi = character_exponential(ctx.cycle(m), alpha)
    else:
        phi = ctx.character(m)
    K = phi.algebra.kernel
    limit = int(spec.params.get("limit", 8))
    components = {}
    for k in phi.ks():
        c = phi.component(k)
        rows = []
        for idx in islice(product(range(phi.algebra.size), repeat=k + 1), limit):
            rows.append({"args": list(idx), "value": to_value(K, c.on_basis(idx))})
        components[str(k)] = rows
    return {"degree": phi.degree, "components": components}, []


def _task_verify_cocycle(ctx: RunContext, spec: TaskSpec) -> Outcome:
    phi = ctx.character(_m(spec))
    return {"degree": phi.degree}, [_check(is_bb_cocycle(phi, ctx.identity_tol(spec), seed=ctx.seed))]


def _task_theorem_one(ctx: RunContext, spec: TaskSpec) -> Outcome:
    tol = ctx.identity_tol(spec)
    if ctx.kind == "matrix-form":
        C = ctx.builder.matrix_cycle()
        chains = [connection_variation_chain(C, eta) for eta in ctx.builder.variations(C)]
    elif ctx.kind == "torus":
        bundle = ctx.builder.bundle()
        alt = ctx.builder.alternate_connection(bundle)
        if alt is None:
            raise ConventionError("verify-theorem-1 on a torus model needs model.alternate_connection")
        C = ctx.torus_cycle()
        chains = [connection_variation_chain(C, C.omega.elem(alt - bundle.connection))]
    else:
        h = ctx.builder.homotopy()
        if h is None:
            raise ConventionError("verify-theorem-1 on a Fredholm model needs model.homotopy")
        chains = [homotopy_chain(ctx.module(), h, _m(spec))]
        tol = spec.tol if spec.tol is not None else ctx.tol
    checks = [_check(verify_theorem_one(c, tol, seed=ctx.seed)) for c in chains]
    return {"chains": len(chains), "degree": chains[0].degree}, checks


def _task_index_pairing(ctx: RunContext, spec: TaskSpec) -> Outcome:
    M = ctx.module()
    K = M.kernel
    m = _m(spec)
    tol = ctx.quadrature_tol(spec)
    rows = []
    checks = []
    for i, e in enumerate(ctx.builder.classes()):
        value = index_pairing(M, e, m)
        result = fredholm_index(M, e, ctx.tol)
        if K.exact:
            deviation = 0.0 if K.is_zero(value - K.scalar(result.index)) else K.magnitude(value - result.index)
            ok = deviation == 0.0
        else:
            deviation = abs(complex(value) - result.index)
            ok = deviation <= tol
        row = {"class": i, "N": e.N, "pairing": to_value(K, value), "index": result.to_dict()}
        checks.append({"label": f"pairing = index (class {i})", "passed": ok, "deviation": deviation})
        if spec.params.get("connes"):
            c = commuting_pairing(M, e, m)
            row["commuting_pairing"] = [c.real, c.imag]
            checks.append({"label": f"Connes homotopy endpoint (class {i})",
                           "passed": abs(c - result.index) <= tol, "deviation": abs(c - result.index)})
        rows.append(row)
    return {"pairings": rows}, checks


def _task_spectral_flow(ctx: RunContext, spec: TaskSpec) -> Outcome:
    m = _m(spec)
    tol = ctx.quadrature_tol(spec)
    if ctx.scenario.model.get("reference") == "winding":
        rep = winding_reference(ctx.builder.module().dim // 2, m, ctx.tol)
        deviation = abs(rep.pairing - rep.total_flow)
        values = rep.to_dict()
        values["note"] = WINDOW_NOTE
        return {"winding": values}, [
            {"label": "pairing = total flow", "passed": deviation <= tol, "deviation": deviation},
            {"label": "window flow", "passed": rep.window_flow == 1, "value": rep.window_flow,
             "note": WINDOW_NOTE},
        ]
    M = float_module(ctx.module())
    rows = []
    checks = []
    for i, u in enumerate(ctx.builder.classes()):
        value = sf_pairing(M, u, m)
        flow = unitary_spectral_flow(M, u, ctx.tol)
        deviation = abs(value - flow.value)
        rows.append({"class": i, "pairing": [value.real, value.imag], "flow": flow.to_dict()})
        checks.append({"label": f"pairing = spectral flow (class {i})", "passed": deviation <= tol,
                       "deviation": deviation})
    return {"flows": rows}, checks


def _task_transgression(ctx: RunContext, spec: TaskSpec) -> Outcome:
    h = ctx.builder.homotopy()
    if h is None:
        raise ConventionError("the transgression task needs model.homotopy")
    M = ctx.module()
    m = _m(spec)
    tol = ctx.quadrature_tol(spec)
    constant = OperatorHomotopy([h.at(0.0)], h.gamma)
    checks = [
        _check(verify_transgression(M, h, m, tol, seed=ctx.seed)),
        _check(cross_check_transgression(M, h, m, tol, seed=ctx.seed)),
        _check(residual_report(transgression(M, constant, m), tol, "constant path", seed=ctx.seed)),
    ]
    return {"order": h.order}, checks


def _task_gv_suite(ctx: RunContext, spec: TaskSpec) -> Outcome:
    data = ctx.builder.flow_data()
    algebra = data.sample(ctx.builder.max_freq())
    tol = ctx.identity_tol(spec)
    mu = data.check_mu()
    checks = [{"label": "mu identities", "passed": max(mu.values()) <= tol, **mu}]
    for verify in (verify_gv_relations, verify_gv_direct, verify_prop_flow_equality):
        checks.append(_check(verify(data, algebra, tol, seed=ctx.seed)))
    checks.append(_check(verify_theorem_one(gv_cobordism(data, 1, algebra), tol, seed=ctx.seed)))
    return {"n": data.n, "group": data.group.describe(), "sample_size": algebra.size}, checks


def _task_theorem_comp(ctx: RunContext, spec: TaskSpec) -> Outcome:
    C = ctx.cycle(0)
    return {"degree": C.degree}, [_check(verify_theorem_comp(C, ctx.identity_tol(spec), seed=ctx.seed))]


def _task_theorem_coin(ctx: RunContext, spec: TaskSpec) -> Outcome:
    M = ctx.module()
    report = verify_theorem_coin(M, _m(spec), ctx.builder.classes(), ctx.quadrature_tol(spec), seed=ctx.seed)
    return {"scale": report.scale}, [_check(report)]


_TASKS: Dict[str, Callable[[RunContext, TaskSpec], Outcome]] = {
    "compute-character": _task_compute_character,
    "verify-theorem-1": _task_theorem_one,
    "verify-cocycle": _task_verify_cocycle,
    "index-pairing": _task_index_pairing,
    "spectral-flow": _task_spectral_flow,
    "transgression": _task_transgression,
    "gv-suite": _task_gv_suite,
    "theorem-comp": _task_theorem_comp,
    "theorem-coin": _task_theorem_coin,
}


def _get_task(kind: str) -> Callable[[RunContext, TaskSpec], Outcome]:
    task = _TASKS.get(kind)
    if task is None:
        logger.error("unknown task: %s", kind)
        raise ValueError(f"unknown task: {kind}")
    return task


def _execute(name: str, kind: str, tol: float, call: Callable[[], Outcome]) -> TaskResult:
    logger.info("task start: name=%s kind=%s", name, kind)
    start = time.monotonic()
    try:
        values, checks = call()
        status = "pass" if all(c.get("passed", True) for c in checks) else "fail"
        result = TaskResult(name, kind, status, values, checks, tol)
    except AmbiguityError as e:
        logger.warning("task %s ambiguous: %s", name, e)
        result = TaskResult(name, kind, "error", {"diagnostic": e.diagnostic}, [], tol, str(e))
    except CycleCharError as e:
        logger.warning("task %s failed: %s", name, e)
        result = TaskResult(name, kind, "error", {}, [], tol, str(e))
    result.elapsed_ms = int((time.monotonic() - start) * 1000)
    logger.info("task end: name=%s status=%s elapsed_ms=%d", name, result.status, result.elapsed_ms)
    return result


def run_task(ctx: RunContext, spec: TaskSpec) -> TaskResult:
    task = _get_task(spec.kind)
    tol = spec.tol if spec.tol is not None else ctx.tol
    return _execute(spec.name, spec.kind, tol, lambda: task(ctx, spec))


def run(
    scenario: Union[str, Scenario],
    kernel: Optional[str] = None,
    tol: Optional[float] = None,
    pairing_tol: Optional[float] = None,
    budget: Optional[int] = None,
    samples: Optional[int] = None,
    threads: Optional[int] = None,
    seed: Optional[int] = None,
    progress: Optional[ProgressPrinter] = None,
) -> Report:
    """Execute every task of a scenario; arguments override the scenario options, which override defaults."""
    if not isinstance(scenario, Scenario):
        scenario = load(scenario)
    opts = scenario.options

    def pick(arg: Any, option: Any, default: Any) -> Any:
        if arg is not None:
            return arg
        return option if option is not None else default

    kernel = pick(kernel, opts.kernel, _DEFAULT_KERNEL)
    tol = float(pick(tol, opts.tol, _DEFAULT_TOL))
    pairing_tol = float(pick(pairing_tol, opts.pairing_tol, _DEFAULT_PAIRING_TOL))
    budget = int(pick(budget, opts.budget, _DEFAULT_BUDGET))
    samples = int(pick(samples, opts.samples, _DEFAULT_SAMPLES))
    threads = int(pick(threads, opts.threads, _DEFAULT_THREADS))
    seed = int(pick(seed, opts.seed, _DEFAULT_SEED))
    model_kernel = kernel
    if scenario.model["kind"] == "fredholm-odd" and kernel == "exact":
        logger.debug("odd module %s runs on the float kernel", scenario.name)
        model_kernel = "float"
    K = get_kernel(model_kernel)
    cyclic.configure(budget=budget, samples=samples, threads=threads)
    ctx = RunContext(scenario, ModelBuilder(scenario, K, seed=seed), K, tol, pairing_tol, seed)
    options = {"kernel": kernel, "tol": tol, "pairing_tol": pairing_tol, "budget": budget, "samples": samples,
               "threads": threads, "seed": seed}
    logger.info("run start: scenario=%s model=%s tasks=%d kernel=%s", scenario.name, ctx.kind,
                len(scenario.tasks), kernel)
    report = Report(scenario.name, options, conventions())
    total = len(scenario.tasks)
    for i, spec in enumerate(scenario.tasks, 1):
        if progress is not None:
            progress.start(f"{scenario.name}/{spec.name}", i, total)
        result = run_task(ctx, spec)
        if progress is not None:
            progress.done(result.status)
        report.tasks.append(result)
    logger.info("run end: scenario=%s passed=%s", scenario.name, report.passed)
    return report
