"""Numerical tolerances and resource caps.

All library entry points accept an optional ``tol`` argument; when omitted
the module-level :data:`DEFAULT` instance is used.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import ArgumentError, CapacityError


@dataclass(frozen=True)
class Tolerances:
    tol_eig: float = 1e-9
    tol_orth: float = 1e-10
    sym_tol: float = 1e-8  # relative to max |A|
    eps_rank: float = 1e-10
    sign_eps: float = 1e-12
    max_sweeps: int = 64
    eig_cap: int = 4096
    memory_cap_bytes: int = 2**31

    def replace(self, **changes) -> "Tolerances":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_mapping(cls, mapping) -> "Tolerances":
        """Build from string key/value pairs (config files, CLI overrides)."""
        fields = {f.name: f.type for f in dataclasses.fields(cls)}
        values = {}
        for key, raw in mapping.items():
            if key not in fields:
                raise ArgumentError(f"unknown tolerance '{key}'")
            caster = int if fields[key] in ("int", int) else float
            try:
                values[key] = caster(float(raw)) if caster is int else caster(raw)
            except ValueError as exc:
                raise ArgumentError(f"bad value for '{key}': {raw!r}") from exc
        return cls(**values)


DEFAULT = Tolerances()


def resolve(tol: Tolerances | None) -> Tolerances:
    return DEFAULT if tol is None else tol


def check_allocation(n_floats: int, what: str, tol: Tolerances | None = None) -> None:
    """Fail before allocating ``n_floats`` doubles if the cap would be exceeded."""
    cap = resolve(tol).memory_cap_bytes
    required = int(n_floats) * 8
    if required > cap:
        raise CapacityError(
            f"{what} needs {required} bytes, above the cap of {cap} bytes",
            required_bytes=required,
        )
