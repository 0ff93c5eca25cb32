"""Scenario configuration: INI files with sections, bundled defaults and
command-line overrides.

Every scenario ships a complete default file in ``flatneuro/scenarios``.
A user file and ``section.key=value`` overrides are layered on top of it;
keys that the scenario does not know are rejected so typos fail early.
"""
from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import sigmoids as sg
from .errors import ConfigurationError
from .integrate import IntegratorConfig, Method
from .trajectory import Family, RefTrajectory, random_sinusoid_sum

SCENARIOS = {
    "wc-weak": "weakly coupled population: exact first-order tracking, optional switching",
    "wc-full": "excitatory/inhibitory pair: per-population tracking of two references",
    "wc-asym": "asymmetric pair: second-order error dynamics through one input",
    "jansen-rit": "three-population model: open-loop inversion and integral reconstruction",
    "arm": "two-link arm: end-effector tracking along the tanh path",
    "if-leaky": "leaky integrate-and-fire membrane under constant input",
    "if-izhikevich": "two-variable quadratic membrane model under constant input",
    "kernel-fourier": "kernel catalog: closed-form vs quadrature Fourier transforms",
    "kernel-pde": "exponential-kernel field: PDE residual under grid refinement",
}

# sections a scenario accepts although its default file leaves them out
OPTIONAL = {
    "wc-weak": {"switching": {"t_sw", "width"}},
}


def default_text(scenario: str) -> str:
    if scenario not in SCENARIOS:
        raise ConfigurationError(
            f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    return resources.files("flatneuro").joinpath(f"scenarios/{scenario}.ini").read_text()


def _parser():
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keep key case
    return cp


def _sections(text: str) -> dict:
    cp = _parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from None
    return {s: dict(cp[s]) for s in cp.sections()}


@dataclass
class ScenarioConfig:
    """Resolved configuration of one run: ``sections[section][key] -> str``."""

    scenario: str
    sections: dict = field(default_factory=dict)

    # -- access -----------------------------------------------------------
    def raw(self, section, key, default=None):
        try:
            return self.sections[section][key]
        except KeyError:
            if default is not None:
                return default
            raise ConfigurationError(f"missing key [{section}] {key}") from None

    def has(self, section, key=None):
        if key is None:
            return section in self.sections
        return key in self.sections.get(section, {})

    def get_float(self, section, key, default=None):
        v = self.raw(section, key, None if default is None else str(default))
        try:
            return float(v)
        except ValueError:
            raise ConfigurationError(f"[{section}] {key} = {v!r} is not a number") from None

    def get_int(self, section, key, default=None):
        v = self.get_float(section, key, default)
        if v != int(v):
            raise ConfigurationError(f"[{section}] {key} must be an integer")
        return int(v)

    def get_floats(self, section, key):
        v = self.raw(section, key)
        try:
            return [float(x) for x in v.replace(";", ",").split(",") if x.strip()]
        except ValueError:
            raise ConfigurationError(f"[{section}] {key} = {v!r} is not a number list") from None

    def get_str(self, section, key, default=None):
        return self.raw(section, key, default).strip()

    # -- updates ----------------------------------------------------------
    def override(self, dotted: str, value) -> "ScenarioConfig":
        """Copy with ``section.key`` set to ``value``; the key must exist."""
        section, sep, key = dotted.partition(".")
        if not sep or not key:
            raise ConfigurationError(f"override {dotted!r} must look like section.key")
        current = self.sections.get(section, {})
        allowed = OPTIONAL.get(self.scenario, {}).get(section, set())
        # "F.beta" is valid whenever a sigmoid family key "F" exists
        head = key.partition(".")[0]
        is_param = "." in key and head in current
        if key not in current and key not in allowed and not is_param:
            raise ConfigurationError(f"scenario {self.scenario} has no key [{section}] {key}")
        sections = {s: dict(kv) for s, kv in self.sections.items()}
        sec = sections.setdefault(section, {})
        if any(k.startswith(key + ".") for k in sec) and sec.get(key) != str(value):
            # a new sigmoid family starts from its own defaults
            for k in [k for k in sec if k.startswith(key + ".")]:
                del sec[k]
        sec[key] = str(value)
        return ScenarioConfig(self.scenario, sections)

    def to_ini(self) -> str:
        cp = _parser()
        for s, kv in self.sections.items():
            cp[s] = kv
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def load_config(path=None, scenario=None, overrides=()) -> ScenarioConfig:
    """Bundled defaults for the scenario, then the file at ``path``, then overrides.

    The scenario is taken from ``scenario`` or from ``[scenario] name`` in the file.
    """
    user = {}
    if path is not None:
        try:
            with open(path) as fh:
                user = _sections(fh.read())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    name = scenario or user.get("scenario", {}).get("name")
    if not name:
        raise ConfigurationError("no scenario given (use --scenario or [scenario] name)")
    file_name = user.get("scenario", {}).get("name")
    if scenario and file_name and file_name != scenario:
        raise ConfigurationError(f"config is for {file_name!r}, not {scenario!r}")
    cfg = ScenarioConfig(name, _sections(default_text(name)))
    for section, kv in user.items():
        for key, value in kv.items():
            cfg = cfg.override(f"{section}.{key}", value)
    for dotted, value in overrides:
        cfg = cfg.override(dotted, value)
    return cfg


# ---------------------------------------------------------------------------
# builders shared by the scenario runners
# ---------------------------------------------------------------------------

def sigmoid_from(cfg: ScenarioConfig, section: str, prefix: str) -> sg.SigmoidSpec:
    """``prefix = Family`` plus ``prefix.param = value`` keys."""
    family = cfg.get_str(section, prefix)
    params = {k[len(prefix) + 1:]: cfg.get_float(section, k)
              for k in cfg.sections[section] if k.startswith(prefix + ".")}
    try:
        return sg.SigmoidSpec(family, params)
    except ValueError as exc:
        raise ConfigurationError(f"[{section}] {prefix}: {exc}") from None


def reference_from(cfg: ScenarioConfig, section: str, rng, prefix: str = "") -> RefTrajectory:
    """A reference from ``family`` and its named parameters.

    ``family = RandomSinusoid`` draws a band-limited sum from ``rng`` with keys
    ``offset``, ``amplitude``, ``n_terms`` and ``period``.  An optional
    ``period`` declares a cyclic reference.
    """
    key = lambda k: prefix + k  # noqa: E731
    family = cfg.get_str(section, key("family"))
    period = cfg.get_float(section, key("period")) if cfg.has(section, key("period")) else None
    if family == "RandomSinusoid":
        return random_sinusoid_sum(rng, cfg.get_float(section, key("offset")),
                                   cfg.get_float(section, key("amplitude")),
                                   cfg.get_int(section, key("n_terms")),
                                   period if period is not None else 2 * np.pi)
    try:
        fam = Family(family)
    except ValueError:
        raise ConfigurationError(f"[{section}] unknown reference family {family!r}") from None
    if fam is Family.POLY_SPLINE:
        raise ConfigurationError("spline references are not configurable from a file")
    if fam is Family.SINUSOID_SUM:
        amps = cfg.get_floats(section, key("amps"))
        params = {"offset": cfg.get_float(section, key("offset")), "amps": amps,
                  "omegas": cfg.get_floats(section, key("omegas")),
                  "phases": (cfg.get_floats(section, key("phases"))
                             if cfg.has(section, key("phases")) else [0.0] * len(amps))}
        return RefTrajectory(fam, params, max_order=12, period=period)
    names = {"Constant": ("c",), "Line": ("v0", "slope"),
             "TanhStep": ("lo", "hi", "gamma", "t0"),
             "TanhOfLine": ("xi", "xf", "yi", "yf", "gamma", "x0", "T")}[fam.value]
    return RefTrajectory(fam, {n: cfg.get_float(section, key(n)) for n in names}, period=period)


def integrator_from(cfg: ScenarioConfig, section: str = "integrator") -> IntegratorConfig:
    try:
        method = Method(cfg.get_str(section, "method"))
    except ValueError:
        raise ConfigurationError(
            f"[{section}] method must be one of {[m.value for m in Method]}") from None
    max_step = cfg.get_float(section, "max_step") if cfg.has(section, "max_step") else np.inf
    return IntegratorConfig(t_start=cfg.get_float(section, "t_start", 0.0),
                            t_end=cfg.get_float(section, "t_end"), method=method,
                            dt=cfg.get_float(section, "dt"), rel_tol=cfg.get_float(section, "rel_tol"),
                            abs_tol=cfg.get_float(section, "abs_tol"), max_step=max_step)
