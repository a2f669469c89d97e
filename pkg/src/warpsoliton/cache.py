"""Content-addressed on-disk cache for spectral ground-state profiles."""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path

from .cheb_basis import SPECTRAL_SCHEMA, SpectralFunction
from .config import DEFAULT_CONFIG, SolverConfig
from .ground_state import GroundState, collocation_residual, solve_ground_state

log = logging.getLogger(__name__)

CACHE_SCHEMA = "warp-soliton/profile-cache-v1"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def profile_key(n_max: int, d: int = 2, p: float = 3.0, newton_tol: float = 1e-12) -> str:
    fields = {"schema": SPECTRAL_SCHEMA, "n_max": int(n_max), "d": int(d), "p": float(p), "newton_tol": float(newton_tol)}
    return sha256_text(canonical_json(fields))[:32]


def _path(cache_dir: Path, key: str) -> Path:
    return Path(cache_dir) / f"profile-{key}.json"


def cache_profile(gs: GroundState, config: SolverConfig = DEFAULT_CONFIG) -> Path:
    """Store the profile atomically; the payload digest is kept alongside it."""
    key = profile_key(gs.profile.n_max, gs.d, gs.p, config.newton_tol)
    payload = gs.profile.to_json()
    entry = {
        "schema": CACHE_SCHEMA,
        "key": key,
        "d": gs.d,
        "p": float(gs.p),
        "residual_norm": gs.residual_norm,
        "profile": payload,
        "digest": sha256_text(canonical_json(payload)),
    }
    cache_dir = config.resolved_cache_dir()
    cache_dir.mkdir(parents=True, exist_ok=True)
    target = _path(cache_dir, key)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(canonical_json(entry))
    os.replace(tmp, target)
    return target


def load_profile(n_max: int, config: SolverConfig = DEFAULT_CONFIG, d: int = 2, p: float = 3.0) -> GroundState | None:
    """Return the cached profile, or None on a miss or an invalid entry.

    An entry is rejected (with a warning) when it does not parse, its digest
    does not match, it was stored for different parameters, or its
    collocation residual exceeds the Newton tolerance.
    """
    key = profile_key(n_max, d, p, config.newton_tol)
    path = _path(config.resolved_cache_dir(), key)
    if not path.exists():
        return None
    try:
        entry = json.loads(path.read_text())
        payload = entry["profile"]
        if entry.get("schema") != CACHE_SCHEMA or entry.get("key") != key:
            raise ValueError("key mismatch")
        if sha256_text(canonical_json(payload)) != entry["digest"]:
            raise ValueError("digest mismatch")
        sf = SpectralFunction.from_json(payload)
        if sf.n_max != n_max:
            raise ValueError("n_max mismatch")
        res = collocation_residual(sf)
        if not res <= max(config.newton_tol, 1e-9):
            raise ValueError(f"residual {res:.2e} too large")
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        log.warning("ignoring corrupt cache entry %s: %s", path, exc)
        return None
    return GroundState(sf, d, p, res, 0, ())


def cached_ground_state(n_max: int, config: SolverConfig = DEFAULT_CONFIG, use_cache: bool = True) -> GroundState:
    """Load from the cache or solve and store."""
    if use_cache:
        gs = load_profile(n_max, config)
        if gs is not None:
            return gs
    gs = solve_ground_state(config=config, n_max=n_max)
    if use_cache:
        try:
            cache_profile(gs, config)
        except OSError as exc:
            log.warning("could not write profile cache: %s", exc)
    return gs
