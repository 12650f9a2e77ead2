"""Config-driven experiment runner.

Usage::

    zollsim SUBCOMMAND [--config PATH] [--out DIR] [--seed N] [--jobs N] [--set KEY=VALUE ...]

Config files are either JSON objects or flat ``key = value`` text; ``#``
starts a comment.  A value is read as a JSON literal when possible
(``0.3``, ``[1, 2]``, ``"x"``), otherwise as a comma-separated list of
numbers, otherwise as a bare string.  Recognised keys:

    surface        canonical | tannery
    sigma          odd coefficients of sigma (c, c^3, c^5, ...)
    cubic_a        shorthand for sigma = a c (1 - c^2)
    V              potential as a polynomial in x1, x2, x3
    l              cluster degree(s)
    eps_exponent   eps = hbar^eps_exponent
    rho0           phase point theta, phi, p_theta, p_phi
    n0, normals    geodesic normals (3-vectors; normals is a list of them)
    n_samples, n_random, resolution, n_grid, n_times, t_max, tilts, tol,
    halfwidth, window, energy, lmax_pad

Exit status: 0 on success, 2 on validation errors, 3 on numerical failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import evolve as ev
from . import geodesic as gd
from . import geometry as geo
from . import io
from . import radon as rd
from . import spectral as sp
from . import verify as vf
from . import zelditch as zd
from .potential import Potential

SUBCOMMANDS = ("geodesic", "radon", "crit", "caustic", "q0", "band", "gaps",
               "transport", "echo", "verify")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    def __init__(self, where, err):
        super().__init__(f"numerical failure in {where}: {err}")


# -- config parsing -----------------------------------------------------------

def _parse_value(text: str):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    parts = [p.strip() for p in text.split(",")]
    try:
        nums = [float(p) for p in parts]
        return nums if len(nums) > 1 else nums[0]
    except ValueError:
        return text


def parse_config_text(text: str) -> dict:
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON config: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return data
    cfg = {}
    for k, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {k}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {k}: empty key")
        cfg[key] = _parse_value(val)
    return cfg


class Config:
    """Typed accessors with field-precise validation messages."""

    def __init__(self, data: dict):
        self.data = dict(data)

    def _get(self, key, default):
        if key in self.data:
            return self.data[key]
        if default is None:
            raise ConfigError(f"config field '{key}' is required")
        return default

    def float(self, key, default=None, positive=True, allow_zero=False):
        v = self._get(key, default)
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"config field '{key}': expected a number, got {v!r}") from None
        if not np.isfinite(v):
            raise ConfigError(f"config field '{key}': must be finite")
        if positive and (v < 0 or (v == 0 and not allow_zero)):
            raise ConfigError(f"config field '{key}': must be positive, got {v}")
        return v

    def int(self, key, default=None, minimum=1):
        v = self._get(key, default)
        if isinstance(v, float) and v.is_integer():
            v = int(v)
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"config field '{key}': expected an integer, got {v!r}")
        if v < minimum:
            raise ConfigError(f"config field '{key}': must be >= {minimum}, got {v}")
        return v

    def ints(self, key, default=None, minimum=1):
        v = self._get(key, default)
        vals = v if isinstance(v, list) else [v]
        return [Config({key: x}).int(key, minimum=minimum) for x in vals]

    def vector(self, key, length, default=None):
        v = self._get(key, default)
        try:
            arr = np.asarray(v, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"config field '{key}': expected {length} numbers") from None
        if arr.shape != (length,) or not np.all(np.isfinite(arr)):
            raise ConfigError(f"config field '{key}': expected {length} finite numbers, got {v!r}")
        return arr

    def floats(self, key, default=None):
        v = self._get(key, default)
        vals = v if isinstance(v, list) else [v]
        try:
            return np.asarray(vals, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"config field '{key}': expected numbers, got {v!r}") from None

    def choice(self, key, choices, default=None):
        v = self._get(key, default)
        if v not in choices:
            raise ConfigError(f"config field '{key}': must be one of {list(choices)}, got {v!r}")
        return v

    def surface(self):
        kind = self.choice("surface", ("canonical", "tannery"), "canonical")
        if kind == "canonical":
            return geo.ZollSurface.canonical()
        try:
            if "cubic_a" in self.data:
                return geo.ZollSurface.tannery(geo.RevolutionProfile.cubic(self.float("cubic_a", positive=False)))
            sig = self._get("sigma", None)
            return geo.ZollSurface.tannery(list(np.atleast_1d(np.asarray(sig, dtype=float))))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"config field 'sigma': {e}") from None

    def potential(self, default="x3**2"):
        v = self._get("V", default)
        try:
            return Potential.from_record(v)
        except Exception as e:  # sympy raises a variety of parse errors
            raise ConfigError(f"config field 'V': cannot parse {v!r}: {e}") from None

    def normals(self, key="normals", default=None):
        v = self._get(key, default)
        arr = np.asarray(v, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 3) if arr.size % 3 == 0 else arr
        if arr.ndim != 2 or arr.shape[1] != 3 or np.any(np.linalg.norm(arr, axis=1) == 0):
            raise ConfigError(f"config field '{key}': expected nonzero 3-vectors, got {v!r}")
        return arr / np.linalg.norm(arr, axis=1, keepdims=True)


# -- subcommands ----------------------------------------------------------------
# each returns (csv header, rows, summary lines)

def _run_geodesic(cfg: Config, rng, jobs):
    s = cfg.surface()
    n = cfg.int("n_samples", gd.DEFAULT_SAMPLES, minimum=16)
    tol = cfg.float("tol", gd.DEFAULT_TOL)
    rho0 = cfg.vector("rho0", 4, [np.pi / 2, 0.0, 0.0, 1.0])
    traj = gd.trajectory(s, rho0, n, tol)
    if np.isclose(geo.hamiltonian_p0(s, rho0), 0.5):
        defect = gd.closure_defect(s, rho0)
    else:
        defect = gd.closure_defect(s, np.r_[rho0[:2], rho0[2:] / geo.covector_norm(s, rho0)])
    return (("s", "theta", "phi", "p_theta", "p_phi", "E"), traj.rows(),
            [f"method {traj.method}, closure defect {defect:.3e}"])


def _run_radon(cfg: Config, rng, jobs):
    s = cfg.surface()
    V = cfg.potential()
    n = cfg.int("n_samples", gd.DEFAULT_SAMPLES, minimum=16)
    if "rho0" in cfg.data:
        pts = [cfg.vector("rho0", 4)]
    else:
        pts = [gd.random_unit_phase_point(s, rng) for _ in range(cfg.int("n_random", 16))]
    rows = [(*p, rd.radon(s, V, p, n)) for p in pts]
    vals = np.array([r[-1] for r in rows])
    return (("theta", "phi", "p_theta", "p_phi", "radon"), rows,
            [f"{len(rows)} geodesics, max |I(V)| = {np.max(np.abs(vals)):.3e}"])


def _run_crit(cfg: Config, rng, jobs):
    s = cfg.surface()
    scan = rd.critical_scan(s, cfg.potential(), cfg.int("resolution", 32, minimum=16))
    return (("phi0", "alpha", "theta", "phi", "p_theta", "p_phi", "residual"),
            [c.row() for c in scan.candidates], [scan.message])


def _run_caustic(cfg: Config, rng, jobs):
    s = cfg.surface()
    rho0 = cfg.vector("rho0", 4, list(rd.phase_point_from_normal([0.0, -0.5, np.sqrt(0.75)])))
    scan = rd.caustic_scan(s, cfg.potential(), rho0, cfg.int("n_grid", 64, minimum=8))
    return ("s",), [(z,) for z in scan.zeros], [scan.message]


def _run_q0(cfg: Config, rng, jobs):
    s = cfg.surface()
    n = cfg.int("n_grid", zd.DEFAULT_GRID, minimum=64)
    rows = [("equator", np.nan, zd.q0(s, zd.equator_point(s), n)),
            ("meridian", np.nan, zd.q0(s, zd.meridian_point(s), n))]
    if "tilts" in cfg.data:
        rows += [("tilt", a, q) for a, q in zd.q0_sweep(s, cfg.floats("tilts"), n)]
    return (("geodesic", "tilt", "q0"), rows,
            [f"q0 equator {rows[0][2]:.10f}, meridian {rows[1][2]:.10f}"])


def _band_rows(args):
    V, l = args
    basis = sp.HarmonicBasis(l)
    return [(l, k, x) for k, x in enumerate(sp.band_invariants(basis, V, l))]


def _pmap(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))  # map preserves input order
    return [fn(x) for x in items]


def _run_band(cfg: Config, rng, jobs):
    V = cfg.potential()
    ls = cfg.ints("l", [10, 20, 40])
    rows = [r for block in _pmap(_band_rows, [(V, l) for l in ls], jobs) for r in block]
    return ("l", "k", "eigenvalue"), rows, [f"band invariants for l = {ls}"]


def _gap_row(args):
    V, l, a, hw, e0, pad = args
    return sp.gap_scan(V, [l], a, hw, e0, pad)[0]


def _run_gaps(cfg: Config, rng, jobs):
    V = cfg.potential()
    ls = cfg.ints("l", [20, 30, 40])
    a = cfg.float("eps_exponent", 0.5)
    args = [(V, l, a, cfg.float("window", 0.1), cfg.float("energy", 0.5),
             cfg.int("lmax_pad", ev.LMAX_PAD)) for l in ls]
    rows = _pmap(_gap_row, args, jobs)
    return (("l", "hbar", "eps", "s0", "ratio"), rows,
            [f"l={r[0]}: s0/(hbar eps^2) = {r[4]:.6g}" for r in rows])


def _transport_one(args):
    V, n0, l, a, times, hw = args
    plan = ev.EvolutionPlan.for_cluster(l, a, "eps^-2", times)
    return ev.transport_experiment(plan, V, n0, l, hw)


def _run_transport(cfg: Config, rng, jobs):
    V = cfg.potential()
    n0 = cfg.normals("n0", [np.sqrt(0.75), 0.0, 0.5])[0]
    ls = cfg.ints("l", [20, 30, 40])
    times = np.linspace(0, cfg.float("t_max", 1.0), cfg.int("n_times", 33, minimum=2))
    a = cfg.float("eps_exponent", 0.5)
    reports = _pmap(_transport_one, [(V, n0, l, a, times, cfg.float("halfwidth", 0.35)) for l in ls], jobs)
    rows, lines = [], []
    for r in reports:
        rows += [(r.l, *row, m0) for row, m0 in zip(r.rows(), r.initial_tube_mass)]
        lines.append(f"l={r.l}: max angular error {r.angular_error.max():.4f} rad, "
                     f"min tube mass {r.tube_mass.min():.4f}, "
                     f"mean initial-circle mass {r.mean_initial_tube_mass:.4f}")
    return ("l", *ev.TransportReport.header, "initial_tube_mass"), rows, lines


def _echo_one(args):
    V, normals, l, a, times, J = args
    plan = ev.EvolutionPlan.for_cluster(l, a, "hbar/eps^2", times)
    plan.validate_echo()
    basis = sp.HarmonicBasis(plan.lmax)
    u = ev.superposition(*(ev.geodesic_state(basis, n, l) for n in normals))
    series = ev.loschmidt(plan, V, u, basis)
    series.predicted = np.abs(ev.echo_prediction(J, np.ones(len(J)), times))
    return l, series


def _run_echo(cfg: Config, rng, jobs):
    V = cfg.potential()
    normals = cfg.normals("normals", [[0, 0, 1], [1, 0, 0]])
    a = cfg.float("eps_exponent", 0.7)
    if a <= 0.5:
        raise ConfigError("config field 'eps_exponent': echo requires eps << sqrt(hbar), "
                          f"i.e. an exponent > 1/2, got {a}")
    ls = cfg.ints("l", [20, 30, 40])
    times = np.linspace(0, cfg.float("t_max", 2 * np.pi), cfg.int("n_times", 65, minimum=2))
    s2 = geo.ZollSurface.canonical()
    J = [rd.radon(s2, V, rd.phase_point_from_normal(n)) for n in normals]
    out = _pmap(_echo_one, [(V, normals, l, a, times, J) for l in ls], jobs)
    rows, lines = [], []
    for l, series in out:
        rows += [(l, *row) for row in series.rows()]
        dev = np.max(np.abs(np.abs(series.values) - series.predicted))
        lines.append(f"l={l}: max ||F| - predicted| = {dev:.4f}")
    return ("l", *ev.EchoSeries.header), rows, lines


def _run_verify(cfg: Config, rng, jobs, seed=0):
    results = vf.run_suite(seed)
    rows = [(f"{r.module}.{r.name}", r.defect, r.tol, int(r.passed)) for r in results]
    return ("invariant", "defect", "tol", "passed"), rows, [r.line() for r in results]


RUNNERS = {
    "geodesic": _run_geodesic, "radon": _run_radon, "crit": _run_crit,
    "caustic": _run_caustic, "q0": _run_q0, "band": _run_band, "gaps": _run_gaps,
    "transport": _run_transport, "echo": _run_echo, "verify": _run_verify,
}

_OPERATION = {
    "geodesic": "geodesic.trajectory", "radon": "radon.radon", "crit": "radon.critical_scan",
    "caustic": "radon.caustic_scan", "q0": "zelditch.q0", "band": "spectral.band_invariants",
    "gaps": "spectral.min_gap", "transport": "evolve.transport_experiment",
    "echo": "evolve.loschmidt", "verify": "verify.run_suite",
}


def run(subcommand, config: dict, out_dir=".", seed=0, jobs=1, stream=None):
    """Run one subcommand; returns (exit status, path of the CSV or None)."""
    stream = stream or sys.stdout
    if subcommand not in RUNNERS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    cfg = Config(config)
    rng = np.random.default_rng(seed)
    try:
        if subcommand == "verify":
            header, rows, lines = _run_verify(cfg, rng, jobs, seed)
        else:
            header, rows, lines = RUNNERS[subcommand](cfg, rng, jobs)
    except (ConfigError, geo.ChartError):
        raise
    except (gd.GeodesicError, ev.PlanError, np.linalg.LinAlgError, RuntimeError,
            FloatingPointError, ArithmeticError) as e:
        raise NumericalFailure(_OPERATION[subcommand], e) from e
    except ValueError as e:
        raise ConfigError(f"{_OPERATION[subcommand]}: {e}") from e
    digest_input = {"subcommand": subcommand, "seed": seed, "config": config}
    path = io.write_csv(Path(out_dir) / f"{subcommand}.csv", header, rows, digest_input)
    for line in lines:
        print(line, file=stream)
    print(f"wrote {path}", file=stream)
    status = EXIT_OK
    if subcommand == "verify" and not all(r[-1] for r in rows):
        status = EXIT_NUMERIC
    return status, path


def build_parser():
    p = argparse.ArgumentParser(prog="zollsim", description="Zoll-surface semiclassical laboratory")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="key=value or JSON config file")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config entry (repeatable)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = {}
        if args.config is not None:
            try:
                config = parse_config_text(args.config.read_text())
            except OSError as e:
                raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if args.overrides:
            config.update(parse_config_text("\n".join(args.overrides)))
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        status, _ = run(args.subcommand, config, args.out, args.seed, args.jobs)
        return status
    except (ConfigError, geo.ChartError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
