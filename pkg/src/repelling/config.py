"""Flat ``key = value`` run configuration with dotted section keys.

Example::

    # two points on the unit circle
    manifold.periods = [1.0]
    kernel.t = 0.05
    N = 2
    seed = 7

Values are Python literals (numbers, strings, lists); ``true``/``false`` are
accepted for booleans.  Unknown keys are rejected with the key and line.
"""
import ast
from dataclasses import dataclass, field, asdict
import math

from .errors import ConfigError, DomainError
from .kernels import KernelPair
from .manifolds import TorusModel, bolza
from .optimize import OptimizeParams

_OPT_FIELDS = ("max_iters", "grad_tol", "armijo_c", "backtrack_factor",
               "initial_step", "restarts", "min_step")

KNOWN_KEYS = {
    "manifold.periods", "manifold.name", "manifold.max_elements",
    "kernel.family", "kernel.t",
    "N", "seed", "deterministic", "output.dir",
    "tolerances.eps_geo", "tolerances.eps_spec",
    "pretrace.samples",
    "diagnostics.samples", "diagnostics.modes",
    "sweep.N",
    "group_audit.radius",
} | {f"optimize.{k}" for k in _OPT_FIELDS}

REQUIRED_KEYS = ("kernel.t",)


@dataclass
class RunConfig:
    manifold: dict
    kernel: dict
    N: object = None
    seed: int = 0
    deterministic: bool = True
    eps_geo: float = 1e-12
    eps_spec: float = 1e-12
    optimize: dict = field(default_factory=dict)
    pretrace_samples: int = 20
    diagnostics_samples: int = 2000
    diagnostics_modes: int = 10
    sweep_N: list = field(default_factory=list)
    group_audit_radius: float = 8.0
    output_dir: object = None

    def build_manifold(self):
        if "periods" in self.manifold:
            return TorusModel(tuple(self.manifold["periods"]))
        kw = {}
        if "max_elements" in self.manifold:
            kw["max_elements"] = self.manifold["max_elements"]
        return bolza(**kw)

    def build_kernel(self, dim):
        return KernelPair(t=self.kernel["t"], dim=dim, family=self.kernel.get("family", "heat"))

    def optimize_params(self):
        return OptimizeParams(seed=self.seed, eps=self.eps_geo, **self.optimize)

    def require_N(self):
        if self.N is None:
            raise ConfigError("missing required key 'N'", key="N")
        return self.N

    def echo(self):
        """Every parameter, defaults filled in (output path excluded)."""
        out = asdict(self)
        out.pop("output_dir")
        out["optimize"] = self.optimize_params().to_dict()
        return out


def _literal(text, key, lineno):
    low = text.strip()
    if low in ("true", "false"):
        return low == "true"
    try:
        return ast.literal_eval(low)
    except (ValueError, SyntaxError):
        raise ConfigError(f"line {lineno}: cannot parse value for '{key}': {text.strip()!r}",
                          key=key, line=lineno) from None


def parse_text(text):
    """Parse config text into a :class:`RunConfig`."""
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {body!r}", line=lineno)
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'", key=key, line=lineno)
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'", key=key, line=lineno)
        raw[key] = _literal(value, key, lineno)
        lines[key] = lineno
    return _validate(raw, lines)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse_text(fh.read())


def _fail(key, lines, msg):
    line = lines.get(key)
    where = f"line {line}: " if line else ""
    raise ConfigError(f"{where}{key}: {msg}", key=key, line=line)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _pos_int(raw, lines, key, default, minimum=1):
    v = raw.get(key, default)
    if v is None:
        return None
    if not _is_int(v) or v < minimum:
        _fail(key, lines, f"must be an integer >= {minimum}")
    return v


def _pos_real(raw, lines, key, default):
    v = raw.get(key, default)
    if not _is_real(v) or v <= 0:
        _fail(key, lines, "must be a positive finite number")
    return float(v)


def _validate(raw, lines):
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required key '{key}'", key=key)

    if ("manifold.periods" in raw) == ("manifold.name" in raw):
        raise ConfigError("exactly one of 'manifold.periods' or 'manifold.name' is required",
                          key="manifold.periods")
    manifold = {}
    if "manifold.periods" in raw:
        p = raw["manifold.periods"]
        if _is_real(p):
            p = [p]
        if not isinstance(p, (list, tuple)) or not p or not all(_is_real(v) and v > 0 for v in p):
            _fail("manifold.periods", lines, "must be a nonempty list of positive numbers")
        manifold["periods"] = [float(v) for v in p]
    else:
        if raw["manifold.name"] != "bolza":
            _fail("manifold.name", lines, f"unknown manifold {raw['manifold.name']!r} (expected 'bolza')")
        manifold["name"] = "bolza"
    if "manifold.max_elements" in raw:
        manifold["max_elements"] = _pos_int(raw, lines, "manifold.max_elements", None)

    family = raw.get("kernel.family", "heat")
    if family != "heat":
        _fail("kernel.family", lines, f"unsupported family {family!r}")
    kernel = {"family": family, "t": _pos_real(raw, lines, "kernel.t", None)}

    seed = raw.get("seed", 0)
    if not _is_int(seed) or not 0 <= seed < 2 ** 64:
        _fail("seed", lines, "must be an unsigned 64-bit integer")
    det = raw.get("deterministic", True)
    if not isinstance(det, bool):
        _fail("deterministic", lines, "must be true or false")

    opt = {}
    for name in _OPT_FIELDS:
        key = f"optimize.{name}"
        if key in raw:
            v = raw[key]
            if name in ("max_iters", "restarts"):
                if not _is_int(v):
                    _fail(key, lines, "must be an integer")
            elif not _is_real(v):
                _fail(key, lines, "must be a finite number")
            opt[name] = v
    try:
        OptimizeParams(seed=seed, **opt)
    except DomainError as exc:
        bad = next((f"optimize.{n}" for n in _OPT_FIELDS if n in str(exc)), "optimize")
        _fail(bad, lines, str(exc))

    sweep = raw.get("sweep.N", [])
    if not isinstance(sweep, (list, tuple)) or not all(_is_int(v) and v >= 1 for v in sweep):
        _fail("sweep.N", lines, "must be a list of positive integers")

    out_dir = raw.get("output.dir")
    if out_dir is not None and not isinstance(out_dir, str):
        _fail("output.dir", lines, "must be a string")

    return RunConfig(
        manifold=manifold,
        kernel=kernel,
        N=_pos_int(raw, lines, "N", None),
        seed=seed,
        deterministic=det,
        eps_geo=_pos_real(raw, lines, "tolerances.eps_geo", 1e-12),
        eps_spec=_pos_real(raw, lines, "tolerances.eps_spec", 1e-12),
        optimize=opt,
        pretrace_samples=_pos_int(raw, lines, "pretrace.samples", 20),
        diagnostics_samples=_pos_int(raw, lines, "diagnostics.samples", 2000, minimum=100),
        diagnostics_modes=_pos_int(raw, lines, "diagnostics.modes", 10),
        sweep_N=list(sweep),
        group_audit_radius=_pos_real(raw, lines, "group_audit.radius", 8.0),
        output_dir=out_dir,
    )
