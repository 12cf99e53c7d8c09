"""Runtime configuration: desk-scale caps and output options.

Caps are honest resource guards, not math: exceeding one raises
CapExceededError (or returns a caps-exceeded verdict where the
operation reports verdicts instead of failing).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace


class CapExceededError(RuntimeError):
    """A configured desk-scale cap would be exceeded."""


@dataclass(frozen=True)
class Config:
    field_cap: int = 10_000_000        # max p^k for a field context
    points_cap: int = 400_000_000      # max enumerated grid size q^(k*n)
    solutions_cap: int = 2_000_000     # max materialized solution list
    ie_m_cap: int = 20                 # max m for the 2^m subset baseline
    chunk_size: int = 1 << 20          # grid chunk length
    budget_cap: int = 64               # max zeta reconstruction budget D
    kmax_default: int = 8              # default bound for universal equivalence
    program_size_cap: int = 200_000    # max AST/term size during reduction
    cnf_atom_cap: int = 16             # max distinct atoms for CNF expansion
    workers: int = 1                   # grid partitions (processed sequentially)
    output_mode: str = "human"         # "human" | "machine"

    def with_overrides(self, **kw) -> "Config":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_ENV_FIELDS = {
    "FFZETA_FIELD_CAP": "field_cap",
    "FFZETA_POINTS_CAP": "points_cap",
    "FFZETA_SOLUTIONS_CAP": "solutions_cap",
    "FFZETA_IE_M_CAP": "ie_m_cap",
    "FFZETA_CHUNK_SIZE": "chunk_size",
    "FFZETA_BUDGET_CAP": "budget_cap",
    "FFZETA_KMAX": "kmax_default",
    "FFZETA_PROGRAM_SIZE_CAP": "program_size_cap",
    "FFZETA_CNF_ATOM_CAP": "cnf_atom_cap",
    "FFZETA_WORKERS": "workers",
}


def config_from_env(base: Config | None = None) -> Config:
    cfg = base or Config()
    overrides = {}
    for env, field in _ENV_FIELDS.items():
        val = os.environ.get(env)
        if val is not None:
            overrides[field] = int(val)
    return cfg.with_overrides(**overrides)


DEFAULT_CONFIG = Config()
