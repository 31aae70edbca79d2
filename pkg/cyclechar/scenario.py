"""
Scenario files.

A scenario is a JSON document with a version field, a model section and a
task list. Every number may be an int, a decimal or a rational string
("3/7"); complex entries are strings such as "1/2-3i" or "2i". Unknown fields
are rejected with the offending field and its line.

    {
      "version": 1,
      "name": "rank-one",
      "options": {"kernel": "exact", "tol": "1e-9"},
      "model": {"kind": "fredholm-even", "algebra": {"kind": "scalars"},
                "F": [[0, 0, 1], [0, 0, 0], [1, 0, 0]],
                "gamma": [[1, 0, 0], [0, 1, 0], [0, 0, -1]],
                "idempotents": [{"N": 1, "matrix": [[1]]}]},
      "tasks": [{"kind": "index-pairing", "m": 1}]
    }
"""

from dataclasses import dataclass, field
from fractions import Fraction
import json
from pathlib import Path
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cycles import GeneralizedChain, matrix_form_cycle
from .cyclic import KClass, matrix_algebra, represented
from .equivariant import AffineMap, AffineTorusAction, EquivariantBundle, VolumeFlowData
from .errors import CycleCharError, ScenarioError
from .extensions import AbelianGroup
from .fredholm import FredholmModule, OperatorHomotopy, even_module, odd_module, rank_one_module, winding_module
from .graded import GradedElement, MatrixForms, TorusForms
from .logger import logger
from .scalars import Kernel, get_kernel
from .utils import parse_rational

SCHEMA_VERSION = 1

MODEL_KINDS = ("fredholm-even", "fredholm-odd", "matrix-form", "torus", "gv")
TASK_KINDS = ("compute-character", "verify-theorem-1", "verify-cocycle", "index-pairing", "spectral-flow",
              "transgression", "gv-suite", "theorem-comp", "theorem-coin")

_TOP_KEYS = {"version", "name", "description", "options", "model", "tasks"}
_OPTION_KEYS = {"kernel", "tol", "pairing_tol", "budget", "samples", "threads", "seed"}
_MODEL_KEYS = {
    "fredholm-even": {"kind", "reference", "algebra", "F", "gamma", "idempotents", "homotopy"},
    "fredholm-odd": {"kind", "reference", "modes", "algebra", "F", "unitaries", "homotopy"},
    "matrix-form": {"kind", "d", "N", "connection", "variations", "random_variations"},
    "torus": {"kind", "d", "N", "group", "generators", "connection", "alternate_connection", "bundle_maps",
              "max_freq"},
    "gv": {"kind", "d", "group", "generators", "p", "max_freq"},
}
_TASK_KEYS = {
    "compute-character": {"m", "alpha", "limit"},
    "verify-theorem-1": {"m"},
    "verify-cocycle": {"m"},
    "index-pairing": {"m", "connes"},
    "spectral-flow": {"m"},
    "transgression": {"m"},
    "gv-suite": set(),
    "theorem-comp": set(),
    "theorem-coin": {"m"},
}
_TASK_MODELS = {
    "compute-character": set(MODEL_KINDS),
    "verify-theorem-1": {"fredholm-even", "fredholm-odd", "matrix-form", "torus"},
    "verify-cocycle": set(MODEL_KINDS),
    "index-pairing": {"fredholm-even"},
    "spectral-flow": {"fredholm-odd"},
    "transgression": {"fredholm-even", "fredholm-odd"},
    "gv-suite": {"gv"},
    "theorem-comp": {"matrix-form", "torus"},
    "theorem-coin": {"fredholm-even"},
}


@dataclass
class Options:
    kernel: Optional[str] = None
    tol: Optional[float] = None
    pairing_tol: Optional[float] = None
    budget: Optional[int] = None
    samples: Optional[int] = None
    threads: Optional[int] = None
    seed: Optional[int] = None


@dataclass
class TaskSpec:
    kind: str
    name: str
    params: Dict[str, Any] = field(default_factory=dict)
    tol: Optional[float] = None


@dataclass
class Scenario:
    version: int
    name: str
    model: Dict[str, Any]
    tasks: List[TaskSpec] = field(default_factory=list)
    options: Options = field(default_factory=Options)
    description: str = ""
    path: Optional[str] = None


# parsing


def _line_of(text: str, key: str) -> Optional[int]:
    if not text:
        return None
    idx = text.find(f'"{key}"')
    if idx < 0:
        return None
    return text.count("\n", 0, idx) + 1


class _Reader:
    """Field-path aware accessors over the decoded document."""

    def __init__(self, text: str):
        self.text = text

    def fail(self, message: str, path: str) -> ScenarioError:
        key = re.sub(r"\[\d+\]", "", path.rsplit(".", 1)[-1])
        line = _line_of(self.text, key)
        logger.error("scenario error at %s (line %s): %s", path, line, message)
        return ScenarioError(message, path, line)

    def obj(self, value: Any, path: str, allowed: Sequence[str]) -> Dict[str, Any]:
        if not isinstance(value, dict):
            raise self.fail("expected an object", path)
        unknown = sorted(set(value) - set(allowed))
        if unknown:
            raise self.fail(f"unknown field {unknown[0]!r}", f"{path}.{unknown[0]}" if path else unknown[0])
        return value

    def integer(self, value: Any, path: str, minimum: Optional[int] = None) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.fail(f"expected an integer, got {value!r}", path)
        if minimum is not None and value < minimum:
            raise self.fail(f"must be >= {minimum}, got {value}", path)
        return value

    def number(self, value: Any, path: str) -> Fraction:
        try:
            return parse_rational(value)
        except (ValueError, ZeroDivisionError) as e:
            raise self.fail(str(e), path) from None

    def scalar(self, value: Any, path: str) -> Union[Fraction, Tuple[Fraction, Fraction]]:
        if isinstance(value, str) and value.strip().endswith(("i", "j")):
            try:
                return parse_complex(value)
            except (ValueError, ZeroDivisionError) as e:
                raise self.fail(str(e), path) from None
        return self.number(value, path)

    def matrix(self, value: Any, path: str, size: Optional[int] = None) -> List[List[Any]]:
        if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
            raise self.fail("expected a non-empty list of rows", path)
        n = len(value)
        if any(len(r) != n for r in value):
            raise self.fail("matrix must be square", path)
        if size is not None and n != size:
            raise self.fail(f"expected a {size}x{size} matrix, got {n}x{n}", path)
        return [[self.scalar(x, f"{path}[{i}][{j}]") for j, x in enumerate(r)] for i, r in enumerate(value)]

    def int_list(self, value: Any, path: str, length: Optional[int] = None) -> List[int]:
        if not isinstance(value, list):
            raise self.fail("expected a list of integers", path)
        if length is not None and len(value) != length:
            raise self.fail(f"expected {length} entries, got {len(value)}", path)
        return [self.integer(v, f"{path}[{i}]") for i, v in enumerate(value)]


def parse_complex(text: str) -> Tuple[Fraction, Fraction]:
    """'a+bi', 'bi', '-i' -> (a, b) with rational parts."""
    s = text.strip().replace(" ", "")[:-1]
    cut = 0
    for i in range(len(s) - 1, 0, -1):
        if s[i] in "+-" and s[i - 1] not in "eE":
            cut = i
            break
    re_part, im_part = (s[:cut], s[cut:]) if cut else ("0", s)
    if im_part in ("", "+"):
        im_part = "1"
    elif im_part == "-":
        im_part = "-1"
    return Fraction(re_part), Fraction(im_part)


def _tolerance(reader: _Reader, value: Any, path: str) -> float:
    tol = float(reader.number(value, path))
    if tol < 0:
        raise reader.fail("tolerance must be non-negative", path)
    return tol


def _options(reader: _Reader, raw: Any) -> Options:
    raw = reader.obj(raw, "options", _OPTION_KEYS)
    out = Options()
    if "kernel" in raw:
        if raw["kernel"] not in ("exact", "float"):
            raise reader.fail(f"kernel must be 'exact' or 'float', got {raw['kernel']!r}", "options.kernel")
        out.kernel = raw["kernel"]
    for key in ("tol", "pairing_tol"):
        if key in raw:
            setattr(out, key, _tolerance(reader, raw[key], f"options.{key}"))
    for key, minimum in (("budget", 1), ("samples", 1), ("threads", 1), ("seed", 0)):
        if key in raw:
            setattr(out, key, reader.integer(raw[key], f"options.{key}", minimum))
    return out


def _check_terms(reader: _Reader, terms: Any, path: str, keys: Sequence[str]) -> None:
    if not isinstance(terms, list):
        raise reader.fail("expected a list of terms", path)
    for i, t in enumerate(terms):
        reader.obj(t, f"{path}[{i}]", keys)


def _model(reader: _Reader, raw: Any) -> Dict[str, Any]:
    if not isinstance(raw, dict):
        raise reader.fail("expected an object", "model")
    kind = raw.get("kind")
    if kind not in MODEL_KINDS:
        raise reader.fail(f"model kind must be one of {', '.join(MODEL_KINDS)}, got {kind!r}", "model.kind")
    raw = reader.obj(raw, "model", _MODEL_KEYS[kind])
    if kind.startswith("fredholm"):
        reference = raw.get("reference")
        allowed = ("rank-one",) if kind == "fredholm-even" else ("winding",)
        if reference is not None and reference not in allowed:
            raise reader.fail(f"unknown reference model {reference!r}", "model.reference")
        if reference is None:
            for key in ("F",) + (("gamma",) if kind == "fredholm-even" else ()):
                if key not in raw:
                    raise reader.fail(f"missing field {key!r}", f"model.{key}")
    elif kind == "matrix-form":
        for key in ("d", "N"):
            if key not in raw:
                raise reader.fail(f"missing field {key!r}", f"model.{key}")
            reader.integer(raw[key], f"model.{key}", 0 if key == "d" else 1)
        if "connection" in raw:
            _check_terms(reader, raw["connection"], "model.connection", ("index", "matrix"))
        for i, v in enumerate(raw.get("variations", [])):
            _check_terms(reader, v, f"model.variations[{i}]", ("index", "matrix"))
        if "random_variations" in raw:
            reader.integer(raw["random_variations"], "model.random_variations", 0)
    else:
        for key in ("d", "group", "generators"):
            if key not in raw:
                raise reader.fail(f"missing field {key!r}", f"model.{key}")
        reader.integer(raw["d"], "model.d", 1)
        reader.int_list(raw["group"], "model.group")
        if not isinstance(raw["generators"], list):
            raise reader.fail("expected a list of affine maps", "model.generators")
        for i, g in enumerate(raw["generators"]):
            reader.obj(g, f"model.generators[{i}]", ("A", "b"))
        if kind == "torus":
            for key in ("connection", "alternate_connection"):
                if key in raw:
                    _check_terms(reader, raw[key], f"model.{key}", ("freq", "index", "matrix", "coeff"))
        elif "p" in raw:
            _check_terms(reader, raw["p"], "model.p", ("freq", "coeff"))
    return raw


def _tasks(reader: _Reader, raw: Any, model_kind: str) -> List[TaskSpec]:
    if not isinstance(raw, list):
        raise reader.fail("expected a list of tasks", "tasks")
    out = []
    for i, t in enumerate(raw):
        path = f"tasks[{i}]"
        if not isinstance(t, dict):
            raise reader.fail("expected an object", path)
        kind = t.get("kind")
        if kind not in TASK_KINDS:
            raise reader.fail(f"unknown task kind {kind!r}", f"{path}.kind")
        t = reader.obj(t, path, {"kind", "name", "tol"} | _TASK_KEYS[kind])
        if model_kind not in _TASK_MODELS[kind]:
            raise reader.fail(f"task {kind} does not apply to a {model_kind} model", f"{path}.kind")
        params = {k: v for k, v in t.items() if k not in ("kind", "name", "tol")}
        if "m" in params:
            reader.integer(params["m"], f"{path}.m", 0)
        if "limit" in params:
            reader.integer(params["limit"], f"{path}.limit", 1)
        if "alpha" in params:
            alpha = reader.number(params["alpha"], f"{path}.alpha")
            if alpha == 0:
                raise reader.fail("alpha must be nonzero", f"{path}.alpha")
            params["alpha"] = alpha
        if "connes" in params and not isinstance(params["connes"], bool):
            raise reader.fail("expected true or false", f"{path}.connes")
        tol = _tolerance(reader, t["tol"], f"{path}.tol") if "tol" in t else None
        out.append(TaskSpec(kind, str(t.get("name") or f"{kind}#{i}"), params, tol))
    return out


def loads(text: str, path: Optional[str] = None) -> Scenario:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        logger.error("scenario %s is not valid JSON: %s", path or "<string>", e)
        raise ScenarioError(f"invalid JSON: {e.msg}", None, e.lineno) from None
    reader = _Reader(text)
    raw = reader.obj(raw, "", _TOP_KEYS)
    if "version" not in raw:
        raise reader.fail("missing field 'version'", "version")
    version = reader.integer(raw["version"], "version")
    if version != SCHEMA_VERSION:
        raise reader.fail(f"unsupported scenario version {version}", "version")
    if "model" not in raw:
        raise reader.fail("missing field 'model'", "model")
    model = _model(reader, raw["model"])
    options = _options(reader, raw.get("options", {}))
    tasks = _tasks(reader, raw.get("tasks", []), model["kind"])
    scenario = Scenario(version, str(raw.get("name") or Path(path or "scenario").stem), model, tasks, options,
                        str(raw.get("description", "")), path)
    # surface value errors (shapes, idempotency, group relations) at load time
    try:
        ModelBuilder(scenario, options.kernel or "exact", text).check()
    except ScenarioError:
        raise
    except CycleCharError as e:
        logger.error("scenario %s: model does not build: %s", scenario.name, e)
        raise ScenarioError(str(e), "model", _line_of(text, "model")) from None
    logger.debug("scenario loaded: name=%s model=%s tasks=%d", scenario.name, model["kind"], len(tasks))
    return scenario


def load(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error("cannot read scenario %s: %s", path, e)
        raise ScenarioError(f"cannot read scenario: {e.strerror}", None, None) from None
    return loads(text, str(path))


def bundled(name: str) -> Path:
    """Path of a scenario shipped with the package."""
    path = Path(__file__).parent / "scenarios" / f"{name}.json"
    if not path.exists():
        raise ScenarioError(f"no bundled scenario named {name!r}", None, None)
    return path


# model construction


class ModelBuilder:
    """Builds the objects of a scenario's model over one scalar kernel."""

    def __init__(self, scenario: Scenario, kernel: Union[str, Kernel] = "exact", text: str = "",
                 seed: Optional[int] = None):
        self.scenario = scenario
        self.raw = scenario.model
        self.kind = self.raw["kind"]
        self.K = get_kernel(kernel)
        self.seed = seed if seed is not None else (scenario.options.seed or 0)
        self._reader = _Reader(text)
        self._module: Optional[FredholmModule] = None
        self._classes: Optional[List[KClass]] = None

    def matrix(self, rows: Any, path: str, size: Optional[int] = None) -> np.ndarray:
        entries = self._reader.matrix(rows, path, size)
        n = len(entries)
        out = np.empty((n, n), dtype=self.K.dtype)
        for i in range(n):
            for j in range(n):
                out[i, j] = self.K.scalar(entries[i][j])
        return out

    # Fredholm modules

    def _represented(self, dim: int):
        spec = self._reader.obj(self.raw.get("algebra", {"kind": "scalars"}), "model.algebra", ("kind", "size"))
        kind = spec.get("kind", "scalars")
        if kind == "scalars":
            r = 1
        elif kind == "matrix":
            r = self._reader.integer(spec.get("size"), "model.algebra.size", 1)
        else:
            raise self._reader.fail(f"unknown algebra kind {kind!r}", "model.algebra.kind")
        if dim % r:
            raise self._reader.fail(f"M_{r} cannot act on a space of dimension {dim}", "model.algebra.size")
        A = matrix_algebra(r, self.K)
        I = self.K.identity(dim // r)
        return represented(A, [self.K.kron(R, I) for R in A.representation], f"M_{r}")

    def module(self) -> FredholmModule:
        if self._module is not None:
            return self._module
        reference = self.raw.get("reference")
        if reference == "rank-one":
            M = rank_one_module(self.K)
        elif reference == "winding":
            M, u = winding_module(self._reader.integer(self.raw.get("modes", 4), "model.modes", 1))
            self._classes = [u]
        else:
            F = self.matrix(self.raw["F"], "model.F")
            A = self._represented(F.shape[0])
            if self.kind == "fredholm-even":
                M = even_module(A, F, self.matrix(self.raw["gamma"], "model.gamma", F.shape[0]),
                                self.scenario.name)
            else:
                M = odd_module(A, F, self.scenario.name)
        self._module = M
        return M

    def classes(self) -> List[KClass]:
        """Idempotents of an even model, unitaries of an odd one."""
        M = self.module()
        if self._classes is not None:
            return self._classes
        key, kind = ("idempotents", "idempotent") if M.even else ("unitaries", "unitary")
        items = self.raw.get(key)
        if items is None:
            self._classes = [KClass.idempotent(M.algebra, [[M.algebra.unit()]])] if M.even else []
            return self._classes
        if not isinstance(items, list):
            raise self._reader.fail("expected a list", f"model.{key}")
        r = int(round(M.algebra.dim ** 0.5))
        out = []
        for i, item in enumerate(items):
            path = f"model.{key}[{i}]"
            item = self._reader.obj(item, path, ("N", "matrix"))
            N = self._reader.integer(item.get("N", 1), f"{path}.N", 1)
            out.append(KClass.from_blocks(M.algebra, self.matrix(item.get("matrix"), f"{path}.matrix", N * r), kind))
        self._classes = out
        return out

    def homotopy(self) -> Optional[OperatorHomotopy]:
        coeffs = self.raw.get("homotopy")
        if coeffs is None:
            return None
        M = self.module()
        if not isinstance(coeffs, list) or not coeffs:
            raise self._reader.fail("expected a list of coefficient matrices", "model.homotopy")
        mats = [self.K.to_numpy(self.matrix(C, f"model.homotopy[{p}]", M.dim)) for p, C in enumerate(coeffs)]
        gamma = None if M.gamma is None else self.K.to_numpy(M.gamma)
        return OperatorHomotopy(mats, gamma)

    # form models

    def _forms_element(self, forms: TorusForms, terms: Sequence[Dict[str, Any]], path: str) -> GradedElement:
        out = forms.zero()
        for i, t in enumerate(terms):
            p = f"{path}[{i}]"
            freq = self._reader.int_list(t.get("freq", [0] * forms.d), f"{p}.freq", forms.d)
            index = self._reader.int_list(t.get("index", []), f"{p}.index")
            if "matrix" in t:
                coeff = self.matrix(t["matrix"], f"{p}.matrix", forms.N)
            else:
                coeff = self.K.scalar(self._reader.scalar(t.get("coeff", 1), f"{p}.coeff"))
            out = out + forms.term(freq, index, coeff)
        return out

    def matrix_cycle(self) -> GeneralizedChain:
        d, N = self.raw["d"], self.raw["N"]
        forms = MatrixForms(d, N, self.K)
        connection = None
        if "connection" in self.raw:
            connection = self._forms_element(forms, self.raw["connection"], "model.connection")
        return matrix_form_cycle(d, N, connection, self.K, np.random.default_rng(self.seed))

    def variations(self, C: GeneralizedChain) -> List[GradedElement]:
        """eta's for the connection-variation chains: the listed ones, then seeded random ones."""
        forms = C.omega
        out = [self._forms_element(forms, v, f"model.variations[{i}]")
               for i, v in enumerate(self.raw.get("variations", []))]
        rng = np.random.default_rng(self.seed + 1)
        for _ in range(self.raw.get("random_variations", 0 if out else 1)):
            out.append(forms.random_element(rng, 1))
        return out

    def action(self) -> AffineTorusAction:
        d = self.raw["d"]
        group = AbelianGroup(self.raw["group"])
        maps = []
        for i, g in enumerate(self.raw["generators"]):
            A = g.get("A", np.eye(d, dtype=int).tolist())
            if not isinstance(A, list) or len(A) != d:
                raise self._reader.fail(f"expected a {d}x{d} integer matrix", f"model.generators[{i}].A")
            A = [self._reader.int_list(row, f"model.generators[{i}].A", d) for row in A]
            b = [self._reader.number(v, f"model.generators[{i}].b") for v in g.get("b", [0] * d)]
            maps.append(AffineMap.make(A, b))
        return AffineTorusAction(d, group, maps)

    def bundle(self) -> EquivariantBundle:
        action = self.action()
        N = self._reader.integer(self.raw.get("N", 1), "model.N", 1)
        forms = TorusForms(action.d, N, self.K)
        connection = self._forms_element(forms, self.raw.get("connection", []), "model.connection")
        maps = None
        if "bundle_maps" in self.raw:
            if not isinstance(self.raw["bundle_maps"], list):
                raise self._reader.fail("expected a list of matrices", "model.bundle_maps")
            maps = [self.matrix(U, f"model.bundle_maps[{i}]", N) for i, U in enumerate(self.raw["bundle_maps"])]
        return EquivariantBundle(action, connection, maps, self.scenario.name)

    def alternate_connection(self, bundle: EquivariantBundle) -> Optional[GradedElement]:
        if "alternate_connection" not in self.raw:
            return None
        return self._forms_element(bundle.forms, self.raw["alternate_connection"], "model.alternate_connection")

    def max_freq(self) -> int:
        return self._reader.integer(self.raw.get("max_freq", 1), "model.max_freq", 0)

    def flow_data(self) -> VolumeFlowData:
        action = self.action()
        p: Dict[Tuple[int, ...], Any] = {}
        for i, t in enumerate(self.raw.get("p", [])):
            freq = tuple(self._reader.int_list(t.get("freq"), f"model.p[{i}].freq", action.d))
            p[freq] = self.K.scalar(self._reader.scalar(t.get("coeff", 1), f"model.p[{i}].coeff"))
        return VolumeFlowData(action, p, self.K, self.scenario.name)

    def check(self) -> None:
        if self.kind.startswith("fredholm"):
            self.module()
            self.classes()
            self.homotopy()
        elif self.kind == "matrix-form":
            self.variations(self.matrix_cycle())
        elif self.kind == "torus":
            self.alternate_connection(self.bundle())
        else:
            self.flow_data()
