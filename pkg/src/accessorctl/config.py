"""JSON model configs: loading, validation, and seeded random instances.

Schema::

    {
      "system":   {"dim": 3, "energies": [1.0, 0.0, -1.0]},
      "accessor": {"qubits": 2, "frequencies": [1.0, 1.3], "chain_couplings": [0.7]},
      "coupling": [{"word": "yx", "j": 1, "k": 0, "g": 0.42}, ...],
      "tolerances": {"independence": 1e-9, "verify": 1e-8}
    }

Numbers may also be given as strings ``"p/q"``; they are read as exact
fractions so the rational oracle sees the intended value.
"""
from __future__ import annotations

import dataclasses
import json
import math
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .linalg import DEFAULT_TOL, ToleranceConfig
from .model import AccessorSpec, ControlModel, CouplingTensor, ModelError, SystemSpec
from .operators import GRADES, enumerate_words

BUILTIN_PREFIX = "builtin:"


class ConfigError(ValueError):
    """Invalid config; the message names the offending path."""


def _number(value, path):
    if isinstance(value, bool):
        raise ConfigError(f"{path} must be a number, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"{path} must be finite, got {value!r}")
        return value
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            raise ConfigError(f"{path} is not a number: {value!r}") from None
    raise ConfigError(f"{path} must be a number, got {value!r}")


def _int(value, path, lo):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer, got {value!r}")
    if value < lo:
        raise ConfigError(f"{path} must be >= {lo}, got {value}")
    return value


def _obj(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path} must be an object")
    return value


def _list(value, path):
    if not isinstance(value, list):
        raise ConfigError(f"{path} must be a list")
    return value


def _check_keys(obj, path, allowed, required=()):
    for k in required:
        if k not in obj:
            raise ConfigError(f"{path}.{k} is missing")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{path}.{k} is not a known field")


def parse_config(data: dict):
    """Validate a decoded config; returns ``(model, tolerances)``."""
    _obj(data, "config")
    _check_keys(data, "config", ("system", "accessor", "coupling", "tolerances"),
                ("system", "accessor", "coupling"))

    system = _obj(data["system"], "system")
    _check_keys(system, "system", ("dim", "energies"), ("energies",))
    energies = [_number(e, f"system.energies[{i}]")
                for i, e in enumerate(_list(system["energies"], "system.energies"))]
    n = _int(system.get("dim", len(energies)), "system.dim", 2)
    if len(energies) != n:
        raise ConfigError(f"system.energies has {len(energies)} entries, expected dim = {n}")

    acc = _obj(data["accessor"], "accessor")
    _check_keys(acc, "accessor", ("qubits", "frequencies", "chain_couplings"), ("frequencies",))
    freqs = [_number(w, f"accessor.frequencies[{i}]")
             for i, w in enumerate(_list(acc["frequencies"], "accessor.frequencies"))]
    m = _int(acc.get("qubits", len(freqs)), "accessor.qubits", 1)
    if len(freqs) != m:
        raise ConfigError(f"accessor.frequencies has {len(freqs)} entries, expected qubits = {m}")
    chain = [_number(c, f"accessor.chain_couplings[{i}]")
             for i, c in enumerate(_list(acc.get("chain_couplings", []), "accessor.chain_couplings"))]
    if len(chain) != m - 1:
        raise ConfigError(f"accessor.chain_couplings has {len(chain)} entries, expected qubits - 1 = {m - 1}")
    for i, c in enumerate(chain):
        if c == 0:
            raise ConfigError(f"accessor.chain_couplings[{i}] is zero")

    coupling = CouplingTensor()
    seen = set()
    for i, entry in enumerate(_list(data["coupling"], "coupling")):
        path = f"coupling[{i}]"
        _obj(entry, path)
        _check_keys(entry, path, ("word", "j", "k", "g"), ("word", "j", "k", "g"))
        word = entry["word"]
        if not isinstance(word, str) or not word:
            raise ConfigError(f"{path}.word must be a non-empty string")
        w = word.lower()
        for ch in w:
            if ch == "i":
                raise ConfigError(f"{path}.word contains 'i'")
            if ch not in "xyz":
                raise ConfigError(f"{path}.word contains invalid letter {ch!r}")
        if len(w) != m:
            raise ConfigError(f"{path}.word has length {len(w)}, expected {m}")
        j = _int(entry["j"], f"{path}.j", 1)
        if j > n - 1:
            raise ConfigError(f"{path}.j must be <= {n - 1}, got {j}")
        k = entry["k"]
        if isinstance(k, bool) or k not in GRADES:
            raise ConfigError(f"{path}.k must be one of -1, 0, 1, got {k!r}")
        if (w, j, k) in seen:
            raise ConfigError(f"{path} duplicates ({w!r}, {j}, {k})")
        seen.add((w, j, k))
        coupling.add(w, j, k, _number(entry["g"], f"{path}.g"))

    tol = DEFAULT_TOL
    if "tolerances" in data:
        t = _obj(data["tolerances"], "tolerances")
        _check_keys(t, "tolerances", ("independence", "verify", "hermiticity"))
        kw = {}
        for key, field in (("independence", "independence_tol"), ("verify", "verify_tol"),
                           ("hermiticity", "hermiticity_tol")):
            if key in t:
                kw[field] = float(_number(t[key], f"tolerances.{key}"))
        try:
            tol = dataclasses.replace(DEFAULT_TOL, **kw)
        except ValueError as exc:
            raise ConfigError(f"tolerances: {exc}") from None

    try:
        model = ControlModel(SystemSpec(tuple(energies)), AccessorSpec(tuple(freqs), tuple(chain)), coupling)
    except ModelError as exc:
        raise ConfigError(str(exc)) from None
    return model, tol


def builtin_names() -> list:
    root = resources.files("accessorctl") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def read_config_text(source: str) -> str:
    """Text of a config file, or of a shipped config named ``builtin:<name>``."""
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        path = resources.files("accessorctl") / "configs" / f"{name}.json"
        if not path.is_file():
            raise ConfigError(f"unknown builtin config {name!r}; available: {', '.join(builtin_names())}")
        return path.read_text(encoding="utf-8")
    try:
        return Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {source}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"{source} is not valid UTF-8") from None


def load_config(source: str):
    """``(raw dict, model, tolerances)`` from a path or ``builtin:<name>``."""
    text = read_config_text(source)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    model, tol = parse_config(raw)
    return raw, model, tol


def _json_number(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    return v


def model_to_config(model: ControlModel, tol: ToleranceConfig | None = None) -> dict:
    """Config dict with resolved defaults; the inverse of :func:`parse_config`."""
    out = {
        "system": {"dim": model.n, "energies": [_json_number(e) for e in model.system.energies]},
        "accessor": {
            "qubits": model.m,
            "frequencies": [_json_number(w) for w in model.accessor.frequencies],
            "chain_couplings": [_json_number(c) for c in model.accessor.chain_couplings],
        },
        "coupling": [{"word": w, "j": j, "k": k, "g": _json_number(g)} for (w, j, k), g in model.coupling.items()],
    }
    tol = tol or DEFAULT_TOL
    out["tolerances"] = {"independence": tol.independence_tol, "verify": tol.verify_tol,
                         "hermiticity": tol.hermiticity_tol}
    return out


# ---------------------------------------------------------------------------
# seeded random instances


class SplitMix64:
    """Portable 64-bit generator; identical streams on every platform."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def uniform(self, lo=-1.0, hi=1.0) -> float:
        # 53 random bits, as in the usual double conversion
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def rational(self, denominator: int) -> Fraction:
        """Uniform on the grid ``{-1, ..., -1/q, 0, 1/q, ..., 1}``."""
        return Fraction(self.next_u64() % (2 * denominator + 1) - denominator, denominator)


def _nonzero(draw):
    while True:
        v = draw()
        if v != 0:
            return v


def random_config(n: int, m: int, seed: int) -> dict:
    """Config with every parameter uniform in [-1, 1], including all ``3**m * 3(n-1)`` coupling slots."""
    if n < 2 or m < 1:
        raise ConfigError(f"random config needs n >= 2 and m >= 1, got n={n}, m={m}")
    rng = SplitMix64(seed)
    energies = [rng.uniform() for _ in range(n)]
    freqs = [rng.uniform() for _ in range(m)]
    chain = [_nonzero(rng.uniform) for _ in range(m - 1)]
    coupling = [{"word": w, "j": j, "k": k, "g": rng.uniform()}
                for w in enumerate_words(m) for j in range(1, n) for k in GRADES]
    return {
        "system": {"dim": n, "energies": energies},
        "accessor": {"qubits": m, "frequencies": freqs, "chain_couplings": chain},
        "coupling": coupling,
    }


def random_rational_model(n: int, m: int, seed: int, denominator: int = 8, density: float = 1.0) -> ControlModel:
    """Model whose parameters are small exact fractions.

    With ``density < 1`` each coupling slot is kept with that probability,
    which produces both controllable and uncontrollable members.
    """
    rng = SplitMix64(seed)
    energies = tuple(rng.rational(denominator) for _ in range(n))
    freqs = tuple(rng.rational(denominator) for _ in range(m))
    chain = tuple(_nonzero(lambda: rng.rational(denominator)) for _ in range(m - 1))
    entries = {}
    for w in enumerate_words(m):
        for j in range(1, n):
            for k in GRADES:
                keep = rng.uniform(0.0, 1.0) < density
                g = rng.rational(denominator)
                if keep and g:
                    entries[(w, j, k)] = g
    return ControlModel(SystemSpec(energies), AccessorSpec(freqs, chain), CouplingTensor(entries))
