import math, os
from dataclasses import dataclass, replace

from gapstress.elasticity import LameMaterial
from gapstress.geometry import InclusionShape, ShapeKind, make_gap_geometry
from gapstress.quadrature import CELL_SPEC, PATH_SPEC, QuadratureSpec


class ConfigError(ValueError):
    """Raised for unreadable, malformed or inconsistent run configurations."""


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{text!r} is not finite")
    return value


def _bool(text):
    match text.strip().lower():
        case "1" | "true" | "yes" | "on":
            return True
        case "0" | "false" | "no" | "off":
            return False
        case _:
            raise ValueError(f"{text!r} is not a boolean")


def _eps_list(text):
    return [_float(part) for part in text.split(",") if part.strip()]


KEYS = {
    "lambda": _float,
    "mu": _float,
    "shape": lambda text: ShapeKind(text.strip().lower()),
    "r0": _float,
    "A": _float,
    "B": _float,
    "L2": _float,
    "eps_list": _eps_list,
    "rel_tol_cell": _float,
    "rel_tol_path": _float,
    "abs_tol": _float,
    "base_order": int,
    "max_depth": int,
    "max_panels": int,
    "strict": _bool,
    "workers": int,
    "seed": int,
    "energy_tol": _float,
    "out": str.strip,
}


@dataclass(frozen=True)
class RunConfig:
    """
    Represents one run: material, inclusion shape, cell height, gap widths and tolerances.

    Attributes:
        eps_list (tuple): Gap widths, distinct and sorted descending.
        out (str | None): CSV output path; None prints to stdout.
        workers (int): Processes used by sweeps.
        seed (int): Seed of the random diagnostic points.
        energy_tol (float): Allowed deviation of the normalised energy identity at eps = 1e-4;
            larger gaps get energy_tol·√(eps/1e-4).
    """
    material: LameMaterial
    shape: InclusionShape
    L2: float
    eps_list: tuple = ()
    cell_spec: QuadratureSpec = CELL_SPEC
    path_spec: QuadratureSpec = PATH_SPEC
    out: str | None = None
    workers: int = 1
    seed: int = 0
    energy_tol: float = 0.05

    def __post_init__(self):
        if any(not eps > 0 for eps in self.eps_list):
            raise ConfigError(f"Gap widths must be positive, got {list(self.eps_list)}")
        if list(self.eps_list) != sorted(set(self.eps_list), reverse=True):
            object.__setattr__(self, "eps_list", tuple(sorted(set(self.eps_list), reverse=True)))
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        if not self.energy_tol > 0:
            raise ConfigError(f"energy_tol must be positive, got {self.energy_tol}")
        if not self.L2 > self.shape.half_height:
            raise ConfigError(f"L2={self.L2} must exceed the inclusion half height {self.shape.half_height}")

    def geometry(self, eps):
        return make_gap_geometry(self.shape, eps, self.L2)

    def with_overrides(self, eps=None, out=None):
        """Returns a copy where --eps replaces the gap widths and --out the output path."""
        changes = {}
        if eps is not None:
            changes["eps_list"] = tuple(eps) if isinstance(eps, (list, tuple)) else (float(eps),)
        if out is not None:
            changes["out"] = out
        return replace(self, **changes) if changes else self

    def first_eps(self):
        if not self.eps_list:
            raise ConfigError("No gap width given: set eps_list or pass --eps")
        return self.eps_list[0]


def parse_config(text, source="<string>"):
    """
    Parses a flat ``key = value`` configuration; ``#`` starts a comment.

    Raises:
        ConfigError: On syntax errors, unknown or repeated keys, bad values or missing keys.
    """
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{number}: key {key!r} given twice")
        try:
            values[key] = KEYS[key](value)
        except ValueError as e:
            raise ConfigError(f"{source}:{number}: bad value for {key!r}: {e}") from e

    for key in ("lambda", "mu", "L2"):
        if key not in values:
            raise ConfigError(f"{source}: missing required key {key!r}")
    try:
        material = LameMaterial(values["lambda"], values["mu"])
        match values.get("shape", ShapeKind.DISK):
            case ShapeKind.DISK:
                if "r0" not in values:
                    raise ConfigError(f"{source}: a disk needs 'r0'")
                shape = InclusionShape.disk(values["r0"])
            case ShapeKind.ELLIPSE:
                if "A" not in values or "B" not in values:
                    raise ConfigError(f"{source}: an ellipse needs 'A' and 'B'")
                shape = InclusionShape.ellipse(values["A"], values["B"])
        cell_spec = replace(CELL_SPEC, **_spec_overrides(values, "rel_tol_cell"))
        path_spec = replace(PATH_SPEC, **_spec_overrides(values, "rel_tol_path"))
        return RunConfig(
            material=material,
            shape=shape,
            L2=values["L2"],
            eps_list=tuple(values.get("eps_list", ())),
            cell_spec=cell_spec,
            path_spec=path_spec,
            out=values.get("out") or None,
            workers=values.get("workers", 1),
            seed=values.get("seed", 0),
            energy_tol=values.get("energy_tol", 0.05),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"{source}: {e}") from e


def _spec_overrides(values, rel_key):
    overrides = {name: values[name] for name in ("abs_tol", "base_order", "max_depth", "max_panels", "strict") if name in values}
    if rel_key in values:
        overrides["rel_tol"] = values[rel_key]
    return overrides


def load_config(path):
    """
    Reads and parses a configuration file.

    Raises:
        ConfigError: If the file cannot be read or does not parse.
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Config file {path!r} does not exist")
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Config file {path!r} could not be read: {e}") from e
    return parse_config(text, source=path)
