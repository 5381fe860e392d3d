"""Experiment configuration files.

Grammar (one statement per line)::

    # or ; starts a comment line
    [section]            keys below are read as ``section.key``
    key = value          dotted keys (``field.kind = stripe``) work anywhere

Lists are whitespace or comma separated; phase points are separated by
``;`` (``phases.points = 0; 1; 2``).  Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cell import PhaseSet
from .errors import HomoglabError, ParameterError
from .fields import AnisotropyProfile, FieldModel
from .stats import HeightRule

KINDS = ("cell", "sweep", "fluct", "oracle-check", "planelike-gap")


class ConfigError(HomoglabError):
    """Malformed or invalid config; carries a 1-based line and column."""

    def __init__(self, message: str, path: str = "<config>", line: int = 0, col: int = 0):
        super().__init__(f"{path}:{line}:{col}: {message}")
        self.line = line
        self.col = col


def _floats(text: str) -> list[float]:
    return [float(v) for v in re.split(r"[\s,]+", text.strip()) if v]


def _ints(text: str) -> list[int]:
    return [int(v) for v in re.split(r"[\s,]+", text.strip()) if v]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _rules(text: str) -> list[HeightRule]:
    return [HeightRule.parse(tok) for tok in re.split(r"[\s,]+", text.strip()) if tok]


# key -> (parser, default)
SCHEMA = {
    "experiment.kind": (str, "cell"),
    "field.kind": (str, "constant"),
    "field.value": (float, 1.0),
    "field.lo": (float, 1.0),
    "field.hi": (float, 2.0),
    "field.lambda": (float, 1.0),
    "field.radius": (float, 0.25),
    "field.background": (float, 1.0),
    "field.inclusion": (float, 2.0),
    "field.c": (float, 2.0),
    "field.anisotropy": (str, "isotropic"),
    "geometry.d": (int, 2),
    "geometry.nu": (_floats, None),
    "geometry.t": (_floats, [8.0]),
    "geometry.ell": (float, None),
    "geometry.height_rule": (_rules, None),
    "geometry.h": (float, 0.5),
    "geometry.stencil": (str, "axis"),
    "phases.points": (str, "0; 1"),
    "phases.a": (int, 0),
    "phases.b": (int, 1),
    "stats.n": (int, 100),
    "stats.seed": (int, 0),
    "stats.p_max": (int, 3),
    "stats.c_sweep": (_floats, [1, 2, 5, 10, 20, 50, 100]),
    "oracle.ell0": (_ints, [2, 4]),
    "oracle.s": (_floats, [1.5, 1.3, 1.1]),
    "oracle.exceedance_seeds": (int, 100000),
    "gap.ell_fixed": (float, 4.0),
    "output.dir": (str, "out"),
    "output.walltime": (_bool, False),
}


@dataclass
class Config:
    values: dict
    path: str = "<config>"
    source: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def kind(self) -> str:
        return self.values["experiment.kind"]

    @property
    def d(self) -> int:
        return self.values["geometry.d"]

    @property
    def nu(self) -> tuple[float, ...]:
        return self.values["geometry.nu"]

    def model(self) -> FieldModel:
        v = self.values
        return FieldModel(
            kind="poisson" if v["field.kind"] in ("poisson", "poisson-inclusions") else v["field.kind"],
            d=v["geometry.d"],
            c=v["field.c"],
            value=v["field.value"],
            lo=v["field.lo"],
            hi=v["field.hi"],
            intensity=v["field.lambda"],
            radius=v["field.radius"],
            background=v["field.background"],
            inclusion=v["field.inclusion"],
            anisotropy=AnisotropyProfile(v["field.anisotropy"]),
        )

    def phases(self) -> PhaseSet:
        pts = [_floats(p) for p in self.values["phases.points"].split(";") if p.strip()]
        return PhaseSet(np.array(pts))

    def rules(self) -> list[HeightRule]:
        return self.values["geometry.height_rule"]

    def canonical(self, prefixes: tuple[str, ...] = ("",)) -> str:
        """Stable text of the resolved values whose keys start with a prefix."""
        lines = []
        for key in sorted(self.values):
            if key.startswith("output.") or not key.startswith(prefixes):
                continue
            val = self.values[key]
            if isinstance(val, list):
                val = " ".join(str(x) for x in val)
            elif isinstance(val, tuple):
                val = " ".join(repr(float(x)) for x in val)
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{key}={val}")
        return "\n".join(lines) + "\n"

    def digest(self, prefixes: tuple[str, ...] = ("",)) -> str:
        return hashlib.sha256(self.canonical(prefixes).encode()).hexdigest()


def parse_text(text: str, path: str = "<config>") -> Config:
    raw: dict[str, tuple[str, int, int]] = {}
    section = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        col = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            m = re.fullmatch(r"\[\s*([A-Za-z_][\w.-]*)\s*\]", stripped)
            if not m:
                raise ConfigError("malformed section header", path, lineno, col)
            section = m.group(1)
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", path, lineno, col)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not re.fullmatch(r"[A-Za-z_][\w.-]*", key):
            raise ConfigError(f"invalid key {key!r}", path, lineno, col)
        full = f"{section}.{key}" if section and f"{section}.{key}" in SCHEMA else key
        if full not in SCHEMA:
            raise ConfigError(f"unknown key {full!r}", path, lineno, col)
        if full in raw:
            raise ConfigError(f"duplicate key {full!r}", path, lineno, col)
        vcol = line.index("=") + 2 + (len(value) - len(value.lstrip()))
        raw[full] = (value.strip(), lineno, vcol)

    values = {}
    for key, (parser, default) in SCHEMA.items():
        if key in raw:
            text_v, lineno, vcol = raw[key]
            try:
                values[key] = parser(text_v)
            except (ValueError, ParameterError) as exc:
                raise ConfigError(f"bad value for {key}: {exc}", path, lineno, vcol) from None
        else:
            values[key] = default
    cfg = Config(values, path, {k: (ln, c) for k, (_, ln, c) in raw.items()})
    _validate(cfg)
    return cfg


def _where(cfg: Config, key: str) -> tuple[int, int]:
    return cfg.source.get(key, (0, 0))


def _validate(cfg: Config) -> None:
    v = cfg.values

    def fail(key, msg):
        raise ConfigError(msg, cfg.path, *_where(cfg, key))

    if v["experiment.kind"] not in KINDS:
        fail("experiment.kind", f"experiment.kind must be one of {', '.join(KINDS)}")
    d = v["geometry.d"]
    if d not in (2, 3):
        fail("geometry.d", "geometry.d must be 2 or 3")
    nu = v["geometry.nu"] if v["geometry.nu"] is not None else [0.0] * (d - 1) + [1.0]
    nu = np.asarray(nu, dtype=np.float64)
    if nu.size != d or not np.linalg.norm(nu) > 0:
        fail("geometry.nu", f"geometry.nu must be a nonzero {d}-vector")
    v["geometry.nu"] = tuple(float(x) for x in nu / np.linalg.norm(nu))
    h = v["geometry.h"]
    if not h > 0:
        fail("geometry.h", "geometry.h must be positive")

    def aligned(x):
        n = round(x / h)
        return n >= 1 and abs(n * h - x) <= 1e-9 * max(1.0, x)

    for t in v["geometry.t"]:
        if not aligned(t):
            fail("geometry.t", f"t = {t:g} is not a multiple of h = {h:g}")
    if v["geometry.ell"] is not None:
        ell = v["geometry.ell"]
        if not aligned(ell) or any(ell > t for t in v["geometry.t"]):
            fail("geometry.ell", "geometry.ell must be a multiple of h and at most every t")
    if v["geometry.height_rule"] is None:
        v["geometry.height_rule"] = [HeightRule("full")]
    if v["stats.n"] < 2 and cfg.kind in ("sweep", "fluct"):
        fail("stats.n", "stats.n must be at least 2")
    if any(e < 1 for e in v["oracle.ell0"]):
        fail("oracle.ell0", "oracle.ell0 entries must be >= 1")
    try:
        cfg.model().validate()
    except ParameterError as exc:
        fail("field.kind", str(exc))
    try:
        ph = cfg.phases()
    except (ParameterError, ValueError) as exc:
        fail("phases.points", str(exc))
    if not (0 <= v["phases.a"] < len(ph) and 0 <= v["phases.b"] < len(ph)) or v["phases.a"] == v["phases.b"]:
        fail("phases.a", "phases.a and phases.b must be distinct phase indices")
    if cfg.kind == "oracle-check" and v["field.kind"] != "stripe":
        fail("field.kind", "oracle-check needs field.kind = stripe")
    if math.isnan(v["field.c"]):
        fail("field.c", "field.c is NaN")


def load(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path), 0, 0) from None
    return parse_text(text, str(path))
