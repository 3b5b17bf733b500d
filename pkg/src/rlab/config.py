"""Config-file parsing for the CLI.

Plain ``key = value`` text with sections [curve], [measure], [family]
and [sweep], read through configparser.  Example::

    [curve]
    kind = moment(2)

    [family]
    kind = knapp
    t0 = 0.2

    [sweep]
    lams = 64, 128, 256
    qs = 3, 4
    ps = inf
    seed = 0
"""

from __future__ import annotations

import ast
import configparser
import math
import os
import re

from .curves import Curve, moment_curve, monomial_curve, poly_curve
from .errors import ConfigError
from .harness import BumpFamily, KnappFamily, RandomFamily, SweepConfig
from .measures import (
    hyperplane_measure,
    singular_alpha_measure,
    sphere_measure,
)

_CALL = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$", re.S)


def parse_curve(text: str) -> Curve:
    """Curve grammar: moment(d) | monomial(a1,a2,...) | poly([[...],...])."""
    m = _CALL.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse curve {text!r}")
    head, body = m.group(1), m.group(2)
    try:
        if head == "moment":
            return moment_curve(int(body))
        if head == "monomial":
            orders = [int(v) for v in body.split(",") if v.strip()]
            return monomial_curve(orders)
        if head == "poly":
            table = ast.literal_eval(body)
            return poly_curve(table)
    except (ValueError, SyntaxError, TypeError) as exc:
        raise ConfigError(f"bad curve {text!r}: {exc}") from exc
    raise ConfigError(f"unknown curve kind {head!r}")


def _floats(text: str) -> tuple:
    vals = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip()
        if not tok:
            continue
        vals.append(float("inf") if tok in ("inf", "oo") else float(tok))
    return tuple(vals)


def parse_family(section) -> object:
    kind = section.get("kind", "bump").strip()
    if kind == "bump":
        x0 = section.get("x0")
        return BumpFamily(
            x0=None if x0 is None else tuple(_floats(x0)),
            eps0=section.getfloat("eps0", 1.0))
    if kind == "knapp":
        rho = section.get("rho")
        return KnappFamily(t0=section.getfloat("t0", 0.2),
                           rho=None if rho is None else float(rho))
    if kind == "random":
        return RandomFamily(delta=section.getfloat("delta", 0.25),
                            n_samples=section.getint("n_samples", 64))
    raise ConfigError(f"unknown family kind {kind!r}")


def parse_measure(section, d: int):
    kind = section.get("kind", "sphere").strip()
    if kind == "sphere":
        return sphere_measure(d, section.getint("resolution", 0))
    if kind == "hyperplane":
        normal = _floats(section.get("normal", ""))
        if len(normal) != d:
            raise ConfigError("hyperplane normal must have d entries")
        return hyperplane_measure(normal, d,
                                  extent=section.getfloat("extent", 1.0),
                                  resolution=section.getint("resolution",
                                                            256))
    if kind == "singular":
        return singular_alpha_measure(d, section.getfloat("alpha", 1.5),
                                      section.getint("resolution", 64))
    raise ConfigError(f"unknown measure kind {kind!r}")


def load_config(path: str) -> configparser.ConfigParser:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parser


def sweep_config_from_file(path: str, overrides: dict | None = None
                           ) -> SweepConfig:
    """Assemble a SweepConfig from a config file plus CLI overrides."""
    parser = load_config(path)
    overrides = overrides or {}
    if "curve" not in parser:
        raise ConfigError("config needs a [curve] section")
    curve = parse_curve(parser["curve"].get("kind", ""))
    family = (parse_family(parser["family"]) if "family" in parser
              else BumpFamily())
    sweep = parser["sweep"] if "sweep" in parser else {}

    def pick(key, fallback):
        if overrides.get(key) is not None:
            return overrides[key]
        return fallback

    if isinstance(sweep, dict):
        lams_text, qs_text, ps_text = "", "", ""
        seed, strict, out, threads = 0, False, None, 1
    else:
        lams_text = sweep.get("lams", "")
        qs_text = sweep.get("qs", "")
        ps_text = sweep.get("ps", "inf")
        seed = sweep.getint("seed", 0)
        strict = sweep.getboolean("strict", False)
        out = sweep.get("out", None)
        threads = sweep.getint("threads", 1)
    lams = _floats(lams_text)
    qs = _floats(qs_text)
    ps = _floats(ps_text) or (math.inf,)
    if not lams or not qs:
        raise ConfigError("[sweep] must set lams and qs")
    return SweepConfig(curve=curve, family=family, lams=lams, qs=qs, ps=ps,
                       seed=int(pick("seed", seed)),
                       strict=bool(pick("strict", strict)),
                       out=pick("out", out),
                       threads=int(pick("threads", threads)))
