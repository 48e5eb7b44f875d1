"""Run configuration assembled from command-line flags and the environment."""
from __future__ import annotations

import argparse
import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from ..io.ingest import ConfigError

COMMANDS = ("solve", "certify", "bd", "multibd", "neutron", "report")
THREADS_ENV = "QSDLAB_THREADS"
DEFAULT_TOL = 1e-10


def resolve_threads(value: Optional[int], environ: Optional[Dict[str, str]] = None) -> int:
    """``--threads`` wins; otherwise ``QSDLAB_THREADS``; otherwise 1."""

    if value is not None:
        threads = value
    else:
        raw = (environ if environ is not None else os.environ).get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            threads = int(raw)
        except ValueError as exc:
            raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from exc
    if threads < 1:
        raise ConfigError(f"thread count must be positive, got {threads}")
    return threads


@dataclass
class RunConfig:
    command: str
    out: Path
    config: Optional[Path] = None
    results: Optional[Path] = None
    seed: Optional[int] = None
    threads: int = 1
    tol: float = DEFAULT_TOL
    verbose: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}; expected one of {', '.join(COMMANDS)}")
        self.out = Path(self.out)
        if self.config is not None:
            self.config = Path(self.config)
        if self.results is not None:
            self.results = Path(self.results)
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")

    @property
    def results_dir(self) -> Path:
        return self.results if self.results is not None else self.out

    def check_paths(self) -> None:
        """Referenced inputs exist and the output directory is writable."""

        if self.command == "report":
            if not self.results_dir.is_dir():
                raise ConfigError(f"results directory {self.results_dir} does not exist")
        elif self.config is None:
            raise ConfigError(f"command {self.command!r} needs --config")
        elif not self.config.is_file():
            raise ConfigError(f"config file {self.config} does not exist")
        self.out.mkdir(parents=True, exist_ok=True)
        if not os.access(self.out, os.W_OK):
            raise ConfigError(f"output directory {self.out} is not writable")

    def overrides(self) -> Dict[str, Any]:
        """Flags that change results (threads never do)."""

        return {"seed": self.seed, "tol": self.tol}

    @classmethod
    def from_args(cls, args: argparse.Namespace, environ: Optional[Dict[str, str]] = None) -> "RunConfig":
        return cls(
            command=args.command,
            out=Path(args.out),
            config=Path(args.config) if args.config else None,
            results=Path(args.results) if getattr(args, "results", None) else None,
            seed=args.seed,
            threads=resolve_threads(args.threads, environ),
            tol=args.tol,
            verbose=args.verbose,
        )


def config_hash(command: str, document: Dict[str, Any], overrides: Dict[str, Any]) -> str:
    canonical = json.dumps(
        {"command": command, "document": document, "overrides": overrides},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
