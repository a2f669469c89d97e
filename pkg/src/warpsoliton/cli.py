"""Command-line interface: ``warp-soliton <subcommand> ...``.

Every subcommand prints a JSON summary on stdout.  Exit status is 0 on
success, 1 on usage or input errors and 2 when a numerical solver fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import stability
from .cache import cached_ground_state, sha256_text
from .cheb_basis import SPECTRAL_SCHEMA
from .config import DEFAULT_CONFIG, SolverConfig
from .geometry import WARP_SCHEMA, WarpingFunction, estimate_V0d
from .ground_state import ConvergenceError, mass
from .linearized import RadialGrid, SingularOperatorError, build_L, low_spectrum
from .manifold_soliton import fixed_point_rho, manifold_mass, mass_derivative, strauss_check

log = logging.getLogger("warpsoliton")

MANIFEST_SCHEMA = "warp-soliton/manifest-v1"
RESULT_SCHEMA = "warp-soliton/result-v1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let ranges such as -0.5:0.5 pass as values rather than flags
        self._negative_number_matcher = re.compile(r"^-\d*\.?\d+([eE][-+]?\d+)?(:[-+]?\d*\.?\d+([eE][-+]?\d+)?)?$")

    def error(self, message):
        raise UsageError(message)


@dataclass
class RunManifest:
    command: list
    config: dict
    schemas: dict = field(default_factory=lambda: {
        "spectral": SPECTRAL_SCHEMA, "warp": WARP_SCHEMA, "result": RESULT_SCHEMA, "manifest": MANIFEST_SCHEMA,
    })
    wall_time: float = 0.0
    outputs: dict = field(default_factory=dict)

    def record(self, path, text: str):
        self.outputs[str(path)] = sha256_text(text)

    def to_json(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "command": self.command,
            "config": self.config,
            "schemas": self.schemas,
            "wall_time": self.wall_time,
            "outputs": self.outputs,
        }


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write(path, text: str, manifest: RunManifest):
    Path(path).write_text(text)
    manifest.record(path, text)


def _range(text: str):
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None


def _alpha(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return float("inf")
    val = float(text)
    if not val > 0:
        raise argparse.ArgumentTypeError("alpha must be positive")
    return val


def load_warp(source: str | None) -> WarpingFunction:
    """Warp from a JSON file; the names 'flat' and 'hyperbolic' are accepted directly."""
    if source is None:
        return WarpingFunction.flat()
    if source in ("flat", "hyperbolic"):
        return WarpingFunction(source)
    try:
        return WarpingFunction.from_json(Path(source).read_text())
    except (OSError, ValueError, TypeError, AttributeError) as exc:
        raise UsageError(f"malformed warp file {source}: {exc}") from None


def _config(path) -> SolverConfig:
    if path is None:
        return DEFAULT_CONFIG
    try:
        return SolverConfig.from_file(path)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"bad config {path}: {exc}") from None


def _reference_gs(args, config):
    return cached_ground_state(config.n_max_refined, config, use_cache=not args.no_cache)


# -- subcommands -------------------------------------------------------------


def cmd_ground_state(args, config, manifest):
    n_max = args.nmax or config.n_max
    gs = cached_ground_state(n_max, config, use_cache=not args.no_cache)
    summary = {
        "n_max": n_max,
        "f0": gs.amplitude,
        "mass": mass(gs),
        "residual_norm": gs.residual_norm,
    }
    if args.out:
        _write(args.out, _dumps({"schema": RESULT_SCHEMA, **summary, "profile": gs.profile.to_json()}), manifest)
    return summary


def cmd_constants(args, config, manifest):
    return stability.expansion_constants(config).to_json()


def cmd_kappa(args, config, manifest):
    return stability.kappa(args.c1, args.c2, config).to_json()


def cmd_scan(args, config, manifest):
    rows = stability.scan(args.c1, args.c2, args.steps, config, jobs=args.jobs)
    text = stability.scan_csv(rows)
    if args.out:
        _write(args.out, text, manifest)
    else:
        sys.stdout.write(text)
        return None
    counts = {c: sum(r.classification == c for r in rows) for c in stability.CLASSES}
    return {"rows": len(rows), "counts": counts, "out": args.out}


def cmd_rho(args, config, manifest):
    warp = load_warp(args.warp)
    gs = _reference_gs(args, config)
    grid = RadialGrid.from_config(config)
    cs = fixed_point_rho(args.alpha, warp, gs, config=config, grid=grid)
    st = strauss_check(cs)
    summary = {
        "alpha": cs.alpha,
        "warp": warp.to_json(),
        "iterations": cs.iterations,
        "contraction_factor": cs.contraction_factor,
        "sup_norm": cs.sup_norm,
        "h2_proxy": cs.h2_proxy(),
        "mass": manifold_mass(cs),
        "strauss": {"passed": st.passed, "constant": st.constant},
    }
    if args.out:
        payload = {"schema": RESULT_SCHEMA, **summary, "r": cs.grid.r.tolist(), "rho": cs.rho.tolist()}
        _write(args.out, _dumps(payload), manifest)
    return summary


def cmd_vk(args, config, manifest):
    warp = load_warp(args.warp)
    gs = _reference_gs(args, config)
    res = mass_derivative(warp, args.alpha, gs, config, RadialGrid.from_config(config))
    return {
        "alpha_pair": list(res.alpha_pair),
        "masses": list(res.masses),
        "d_mass_d_alpha": res.d_mass_d_alpha,
        "classification": res.classification,
    }


def cmd_spectrum(args, config, manifest):
    warp = load_warp(args.warp)
    gs = _reference_gs(args, config)
    grid = RadialGrid.from_config(config)
    if np.isinf(args.alpha) or warp.is_flat:
        profile = grid.sample(gs)
    else:
        profile = fixed_point_rho(args.alpha, warp, gs, config=config, grid=grid).profile
    op = build_L(args.variant, args.alpha, warp, 2, 3.0, profile, grid)
    sl = low_spectrum(op, args.k, config.eig_tol)
    return {
        "variant": args.variant,
        "alpha": "inf" if np.isinf(args.alpha) else args.alpha,
        "eigenvalues": [float(v) for v in sl.eigenvalues],
        "neg_count": sl.neg_count,
        "near_zero": sl.near_zero,
    }


def cmd_geometry(args, config, manifest):
    warp = load_warp(args.warp)
    rep = estimate_V0d(warp, args.d)
    return {
        "warp": warp.to_json(),
        "d": rep.d,
        "V0d": rep.V0d,
        "hypothesis_ok": rep.hypothesis_ok,
        "fit_residual": rep.fit_residual,
        "curvature_samples": [{"r": r, "K_rad": kr, "K_sph": ks} for r, kr, ks in rep.curvature_samples],
        "message": rep.message,
    }


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file overriding solver defaults")
    common.add_argument("--manifest", help="write a run manifest to this file")
    common.add_argument("--no-cache", action="store_true", help="do not read or write the profile cache")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="warp-soliton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ground-state", parents=[common], help="Townes profile by Newton collocation")
    p.add_argument("--nmax", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("constants", parents=[common], help="expansion constants b1, b2")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("kappa", parents=[common], help="kappa and classification for A = r + c1 r^3 + c2 r^5")
    p.add_argument("--c1", type=float, required=True)
    p.add_argument("--c2", type=float, required=True)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("scan", parents=[common], help="kappa over a (c1, c2) grid as CSV")
    p.add_argument("--c1", type=_range, required=True, metavar="A:B")
    p.add_argument("--c2", type=_range, required=True, metavar="C:D")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("rho", parents=[common], help="curved-space correction by fixed-point iteration")
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--warp", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("vk", parents=[common], help="sign of the mass derivative")
    p.add_argument("--alpha", type=_alpha, required=True)
    p.add_argument("--warp", required=True)
    p.set_defaults(func=cmd_vk)

    p = sub.add_parser("spectrum", parents=[common], help="low eigenvalues of L+ or L-")
    p.add_argument("--variant", choices=("plus", "minus"), required=True)
    p.add_argument("--alpha", type=_alpha, default=float("inf"))
    p.add_argument("--warp")
    p.add_argument("--k", type=int, default=4)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("geometry", parents=[common], help="curvatures and limit potential of a warp")
    p.add_argument("--warp", required=True)
    p.add_argument("--d", type=int, default=2)
    p.set_defaults(func=cmd_geometry)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
        config = _config(args.config)
        manifest = RunManifest(argv, config.to_dict())
        t0 = time.perf_counter()
        summary = args.func(args, config, manifest)
        manifest.wall_time = time.perf_counter() - t0
    except UsageError as exc:
        print(f"warp-soliton: error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, SingularOperatorError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"warp-soliton: numerical failure: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"warp-soliton: error: {exc}", file=sys.stderr)
        return 1
    if summary is not None:
        sys.stdout.write(_dumps(summary))
    if args.manifest:
        Path(args.manifest).write_text(_dumps(manifest.to_json()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
