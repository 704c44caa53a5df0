"""Experiment configuration: typed schema, INI parsing, fingerprints.

Configs are INI text with sections mirroring the schema blocks
([experiment], [grid], [model], [noise], [sweep], [ensemble]).  Parsing is
all-errors-at-once: every problem found is collected into one ConfigError
instead of stopping at the first.  The fingerprint hashes the semantic
fields only, so relocating output or changing thread counts keeps it
stable while any physics, grid, noise, or seed change moves it.
"""
import configparser
import hashlib
import io
from dataclasses import dataclass, fields

import numpy as np

from .grids import build_grid
from .models import FluxModel, make_reaction

U0_PROFILES = ("sine-bump", "plateau", "two-bump")
REACTIONS = ("none", "pospart", "power")
PENALTIES = ("linear", "power")


class ConfigError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ExperimentConfig:
    name: str = "standard"
    # grid block
    dim: int = 1
    extent: float = 1.0
    nx: int = 64
    ny: int = 0
    T: float = 0.5
    nt: int = 500
    # model block
    p: float = 3.0
    c: float = 0.5
    eps: float = 1e-8
    reaction: str = "none"
    reaction_coef: float = 1.0
    penalty: str = "linear"
    n: float = 100.0
    u0: str = "sine-bump"
    u0_amp: float = 0.5
    # noise block
    K: int = 16
    gamma: float = 2.0
    amp: float = 0.3
    seed: int = 1000
    # sweep block
    n_values: tuple = (1.0, 10.0, 100.0, 1000.0, 10000.0)
    # ensemble block
    num_paths: int = 8
    base_seed: int = 1000
    # capacity block (coarse space-time obstacle sets)
    cap_nx: int = 8
    cap_ny: int = 0
    cap_nt: int = 8
    cap_extent: float = 1.0
    cap_T: float = 1.0
    cap_cells: str = "3:5,3:5"
    # non-semantic
    out_dir: str = "out"
    threads: int = 1

    # fields that do not affect results and stay out of the fingerprint
    NON_SEMANTIC = ("out_dir", "threads", "name")


def standard_config():
    """The pinned standard scenario (1D, p=3, drift 0.5, 16-mode noise)."""
    return ExperimentConfig()


_SECTIONS = {
    "experiment": ("name", "out_dir", "threads", "u0", "u0_amp"),
    "grid": ("dim", "extent", "nx", "ny", "T", "nt"),
    "model": ("p", "c", "eps", "reaction", "reaction_coef", "penalty", "n"),
    "noise": ("K", "gamma", "amp", "seed"),
    "sweep": ("n_values",),
    "ensemble": ("num_paths", "base_seed"),
    "capacity": ("cap_nx", "cap_ny", "cap_nt", "cap_extent", "cap_T",
                 "cap_cells"),
}
# INI keys in [capacity] drop the cap_ prefix
_CAP_KEYS = {k[len("cap_"):]: k for k in _SECTIONS["capacity"]}
_FIELD_SECTION = {k: s for s, ks in _SECTIONS.items() for k in ks}


def _coerce(name, text, typ, errors):
    try:
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        if typ is tuple:
            vals = tuple(float(v) for v in text.replace(",", " ").split())
            if not vals:
                raise ValueError("empty list")
            return vals
        return text.strip()
    except ValueError:
        errors.append(f"{name}: cannot parse {text!r} as {typ.__name__}")
        return None


def validate(cfg):
    """Semantic checks; returns the full list of problems (empty if fine)."""
    errors = []
    if cfg.dim not in (1, 2):
        errors.append("dim: must be 1 or 2")
    if cfg.extent <= 0:
        errors.append("extent: must be positive")
    if cfg.nx < 2:
        errors.append("nx too small: need at least 2 interior nodes")
    if cfg.dim == 2 and cfg.ny < 2:
        errors.append("ny too small: need at least 2 interior nodes")
    if cfg.T <= 0:
        errors.append("T: must be positive")
    if cfg.nt < 2:
        errors.append("nt too small: need at least 2 steps")
    if cfg.p <= 1:
        errors.append("p: flux exponent must exceed 1")
    elif cfg.dim >= 1 and cfg.p <= 2 * cfg.dim / (cfg.dim + 1):
        errors.append(f"p: {cfg.p} is at or below the pseudomonotone "
                      f"threshold 2d/(d+1) = {2 * cfg.dim / (cfg.dim + 1)}")
    if cfg.eps < 0:
        errors.append("eps: must be nonnegative")
    if cfg.reaction not in REACTIONS:
        errors.append(f"reaction: unknown choice {cfg.reaction!r} "
                      f"(use one of {', '.join(REACTIONS)})")
    if cfg.penalty not in PENALTIES:
        errors.append(f"penalty: unknown choice {cfg.penalty!r} "
                      f"(use one of {', '.join(PENALTIES)})")
    if cfg.penalty == "power" and not 1.0 < cfg.p < 2.0:
        errors.append("penalty: power penalty needs 1 < p < 2")
    if cfg.n < 0:
        errors.append("n: penalty strength must be nonnegative")
    if cfg.u0 not in U0_PROFILES:
        errors.append(f"u0: unknown profile {cfg.u0!r} "
                      f"(use one of {', '.join(U0_PROFILES)})")
    if cfg.u0_amp < 0:
        errors.append("u0_amp: must be nonnegative")
    if cfg.K < 1:
        errors.append("K: need at least one noise mode")
    if cfg.gamma <= 1:
        errors.append(f"gamma: trace-class violation, decay exponent "
                      f"{cfg.gamma} must exceed 1")
    if cfg.amp < 0:
        errors.append("amp: must be nonnegative")
    if any(v < 0 for v in cfg.n_values):
        errors.append("n_values: penalty strengths must be nonnegative")
    if cfg.num_paths < 1:
        errors.append("num_paths: need at least one path")
    if cfg.threads < 1:
        errors.append("threads: must be positive")
    if not 2 <= cfg.cap_nx <= 32:
        errors.append("capacity nx: coarse grids only (2..32)")
    if cfg.cap_ny and not 2 <= cfg.cap_ny <= 32:
        errors.append("capacity ny: coarse grids only (0 for 1D, else 2..32)")
    if not 2 <= cfg.cap_nt <= 32:
        errors.append("capacity nt: coarse grids only (2..32)")
    if cfg.cap_extent <= 0:
        errors.append("capacity extent: must be positive")
    if cfg.cap_T <= 0:
        errors.append("capacity T: must be positive")
    else:
        shape = (cfg.cap_nx,) if cfg.cap_ny == 0 else (cfg.cap_nx, cfg.cap_ny)
        try:
            capacity_cells(cfg.cap_cells, cfg.cap_nt, shape)
        except ValueError as e:
            errors.append(f"capacity cells: {e}")
    return errors


def capacity_cells(cells_text, nt, shape):
    """Parse obstacle cells: semicolon-separated boxes of half-open index
    ranges, time axis first, e.g. '3:5,3:5' or '0:2,1:4,2:6'."""
    mask = np.zeros((nt,) + tuple(shape), dtype=bool)
    ndim = 1 + len(shape)
    for box in cells_text.split(";"):
        box = box.strip()
        if not box:
            continue
        parts = [s.strip() for s in box.split(",")]
        if len(parts) != ndim:
            raise ValueError(f"cell box {box!r}: expected {ndim} ranges "
                             "(time first)")
        idx = []
        for dim_len, part in zip((nt,) + tuple(shape), parts):
            lo, _, hi = part.partition(":")
            lo = int(lo)
            hi = int(hi) if hi else lo + 1
            if not 0 <= lo < hi <= dim_len:
                raise ValueError(f"cell range {part!r} outside 0:{dim_len}")
            idx.append(slice(lo, hi))
        mask[tuple(idx)] = True
    return mask


def parse_config(text):
    """Parse INI text (or a path-like opened upstream) into a validated
    ExperimentConfig; raises ConfigError carrying every problem found."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (K vs k)
    errors = []
    try:
        cp.read_string(text)
    except configparser.Error as e:
        raise ConfigError([f"syntax: {e}"]) from None
    cfg = ExperimentConfig()
    types = {f.name: f.type for f in fields(cfg)}
    pytypes = {"str": str, "int": int, "float": float, "tuple": tuple}
    for section in cp.sections():
        if section not in _SECTIONS:
            errors.append(f"unknown section [{section}]")
            continue
        for key, raw in cp.items(section):
            if section == "capacity":
                key = _CAP_KEYS.get(key, key)
            if key not in _SECTIONS[section]:
                where = _FIELD_SECTION.get(key)
                hint = f" (belongs in [{where}])" if where else ""
                errors.append(f"[{section}] unknown key {key!r}{hint}")
                continue
            typ = types[key]
            if isinstance(typ, str):  # postponed annotations
                typ = pytypes[typ]
            val = _coerce(key, raw, typ, errors)
            if val is not None:
                setattr(cfg, key, val)
    errors.extend(validate(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def read_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def to_text(cfg):
    """Render a config back to canonical INI text."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    for section, keys in _SECTIONS.items():
        cp[section] = {}
        for k in keys:
            v = getattr(cfg, k)
            if isinstance(v, tuple):
                v = " ".join(repr(x) for x in v)
            out_key = k[len("cap_"):] if section == "capacity" else k
            cp[section][out_key] = str(v)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def fingerprint(cfg):
    """sha256 over canonical key=value lines of the semantic fields."""
    lines = []
    for f in sorted(fields(cfg), key=lambda f: f.name):
        if f.name in ExperimentConfig.NON_SEMANTIC:
            continue
        v = getattr(cfg, f.name)
        if isinstance(v, float):
            v = repr(float(v))
        elif isinstance(v, tuple):
            v = ",".join(repr(float(x)) for x in v)
        lines.append(f"{f.name}={v}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def initial_state(cfg, grid):
    """Named nonnegative initial profiles on the grid."""
    x = grid.x / grid.extent
    if cfg.u0 == "sine-bump":
        prof = np.sin(np.pi * x)
    elif cfg.u0 == "plateau":
        prof = np.clip(np.minimum(5.0 * x, 5.0 * (1.0 - x)), 0.0, 1.0)
    else:  # two-bump
        prof = (np.exp(-((x - 0.3) / 0.08) ** 2)
                + np.exp(-((x - 0.7) / 0.08) ** 2))
    if grid.dim == 2:
        y = grid.y / grid.extent
        prof = prof[:, None] * np.sin(np.pi * y)[None, :]
    return cfg.u0_amp * prof


def build_objects(cfg, n=None, seed=None):
    """Materialize (grid, flux, reaction, noise spec, u0) from a config."""
    from .noise import build_noise
    grid = build_grid(cfg.dim, cfg.extent, cfg.nx, ny=cfg.ny or None,
                      T=cfg.T, nt=cfg.nt)
    flux = FluxModel(p=cfg.p, conv=cfg.c, eps=cfg.eps)
    base = {"none": "zero", "pospart": "pospart", "power": "power"}[cfg.reaction]
    reaction = make_reaction(cfg.n if n is None else n, kind=cfg.penalty,
                             p=cfg.p, base=base, coef=cfg.reaction_coef)
    spec = build_noise(grid, K=cfg.K, gamma=cfg.gamma, amp=cfg.amp)
    u0 = initial_state(cfg, grid)
    return grid, flux, reaction, spec, u0
