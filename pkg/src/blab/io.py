"""JSON-compatible (de)serialization of weights, measures and sequences.

Complex numbers are two-element lists ``[re, im]``. A weight document is
``{"terms": [{"kind": ..., ...}, ...]}`` with kinds ``radial_poly``,
``log_atom``, ``log_potential``, ``const`` and ``log_one_plus_sq``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .weights import (
    CircleMeasure,
    Const,
    GridDensity,
    InverseSquareDensity,
    LogAtom,
    LogOnePlusSq,
    LogPotential,
    PlanarMeasure,
    RadialPoly,
    RadialPowerDensity,
    WeightExpr,
    WeightSequence,
)


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ConfigError(f"expected [re, im], got {v!r}")


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _num(d, key, default=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing numeric field {key!r} in {d!r}")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"field {key!r} must be a number, got {v!r}")
    return float(v)


# ---------------------------------------------------------------------------
# measures


def measure_to_json(mu: PlanarMeasure) -> dict:
    out = {
        "atoms": [[a, complex_to_json(c)] for a, c in mu.atoms],
        "support_radius": mu.support_radius,
    }
    dens = []
    for comp in mu.components:
        if isinstance(comp, RadialPowerDensity):
            dens.append({"kind": "radial_power", "coeff": comp.coeff, "exponent": comp.exponent,
                         "radius": comp.radius})
        elif isinstance(comp, InverseSquareDensity):
            dens.append({"kind": "inverse_square", "coeff": comp.coeff, "radius": comp.radius})
        elif isinstance(comp, CircleMeasure):
            dens.append({"kind": "circle", "mass": comp.mass, "rho": comp.rho})
        elif isinstance(comp, GridDensity):
            out["density_grid"] = {"radius": comp.radius, "n_r": comp.n_r, "n_theta": comp.n_theta,
                                   "values": comp.values.tolist()}
    if dens:
        out["densities"] = dens
    return out


def measure_from_json(d) -> PlanarMeasure:
    if not isinstance(d, dict):
        raise ConfigError(f"measure must be an object, got {d!r}")
    try:
        atoms = tuple((float(a), complex_from_json(c)) for a, c in d.get("atoms", []))
        comps = []
        for c in d.get("densities", []):
            kind = c.get("kind")
            if kind == "radial_power":
                comps.append(RadialPowerDensity(_num(c, "coeff"), _num(c, "exponent"), _num(c, "radius")))
            elif kind == "inverse_square":
                comps.append(InverseSquareDensity(_num(c, "coeff"), _num(c, "radius")))
            elif kind == "circle":
                comps.append(CircleMeasure(_num(c, "mass"), _num(c, "rho")))
            else:
                raise ConfigError(f"unknown density kind {kind!r}")
        g = d.get("density_grid")
        if g is not None:
            comps.append(GridDensity.from_values(g["values"], _num(g, "radius"), int(g["n_r"]),
                                                 int(g["n_theta"])))
        return PlanarMeasure(atoms, tuple(comps), _num(d, "support_radius"))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid measure: {exc}") from exc


# ---------------------------------------------------------------------------
# weights


def term_to_json(t) -> dict:
    if isinstance(t, RadialPoly):
        return {"kind": "radial_poly", "coeff": t.coeff, "power": t.power}
    if isinstance(t, LogAtom):
        return {"kind": "log_atom", "mass": t.mass, "center": complex_to_json(t.center)}
    if isinstance(t, LogPotential):
        d = {"kind": "log_potential", "radius": t.radius, "measure": measure_to_json(t.measure)}
        if t.sign != 1.0:
            d["sign"] = t.sign
        return d
    if isinstance(t, Const):
        return {"kind": "const", "value": t.value}
    if isinstance(t, LogOnePlusSq):
        return {"kind": "log_one_plus_sq", "coeff": t.coeff}
    raise TypeError(f"unknown term {t!r}")


def term_from_json(d):
    if not isinstance(d, dict) or "kind" not in d:
        raise ConfigError(f"term must be an object with a 'kind', got {d!r}")
    kind = d["kind"]
    try:
        if kind == "radial_poly":
            power = d.get("power", 1)
            if not isinstance(power, int) or isinstance(power, bool):
                raise ConfigError("radial_poly power must be an integer")
            return RadialPoly(_num(d, "coeff"), power)
        if kind == "log_atom":
            return LogAtom(_num(d, "mass"), complex_from_json(d.get("center", [0, 0])))
        if kind == "log_potential":
            return LogPotential(measure_from_json(d.get("measure")), _num(d, "radius"),
                                _num(d, "sign", 1.0))
        if kind == "const":
            return Const(_num(d, "value"))
        if kind == "log_one_plus_sq":
            return LogOnePlusSq(_num(d, "coeff"))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} term: {exc}") from exc
    raise ConfigError(f"unknown term kind {kind!r}")


def weight_to_json(w: WeightExpr) -> dict:
    return {"terms": [term_to_json(t) for t in w.terms]}


def weight_from_json(d, base_dir: Path | None = None) -> WeightExpr:
    if isinstance(d, str):
        d = load_json(Path(base_dir or ".") / d)
    if not isinstance(d, dict) or not isinstance(d.get("terms"), list):
        raise ConfigError("weight must be an object with a 'terms' array")
    return WeightExpr(tuple(term_from_json(t) for t in d["terms"]))


def sequence_from_json(d, base_dir: Path | None = None, seed: int = 0) -> WeightSequence:
    """``{"kind": "scaled" | "shifted" | "constant", "limit": <weight>}``."""
    if not isinstance(d, dict):
        raise ConfigError("sequence must be an object")
    limit = weight_from_json(d.get("limit"), base_dir)
    kind = d.get("kind")
    makers = {"scaled": WeightSequence.scaled, "shifted": WeightSequence.shifted,
              "constant": WeightSequence.constant}
    if kind not in makers:
        raise ConfigError(f"unknown sequence kind {kind!r}")
    return makers[kind](limit, seed=seed)


def load_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc


def dumps(obj) -> str:
    """Deterministic JSON text; numpy scalars and arrays are converted."""

    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        if isinstance(o, complex):
            return [o.real, o.imag]
        raise TypeError(f"not serializable: {type(o)}")

    return json.dumps(obj, indent=2, sort_keys=True, default=default, allow_nan=True)
