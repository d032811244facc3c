"""Experiment runner: `run`, `spectrum`, and `resources` subcommands.

Configs are flat key=value files with `#` comments; every key has a CLI flag
of the same name that overrides it.  A run writes `trace.csv` (one row per
iteration, 17-significant-digit floats) and `summary.json` to its output
directory.  Exit codes: 0 success, 2 config error, 3 memory-cap error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .lcu import estimate_resources
from .pauli import (
    DENSE_QUBIT_CAP,
    HamiltonianParseError,
    PauliSum,
    exact_spectrum,
    parse_hamiltonian,
)
from .pea import (
    DEFAULT_MEM_CAP_QUBITS,
    MemoryCapError,
    PeaConfig,
    PeaResult,
    run_ipea,
)

MEM_CAP_ENV = "LCUPEA_MEM_CAP_QUBITS"

_CONFIG_KEYS = (
    "hamiltonian",
    "strategy",
    "bits",
    "kappa",
    "amplify_m",
    "eigenvector",
    "output_dir",
    "emit_state_dumps",
    "seed",
    "shots",
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """File/flag-level mirror of PeaConfig plus run plumbing."""

    hamiltonian: str = ""
    strategy: str = "successive"
    bits: int = 8
    kappa: str = "auto"  # numeric text or "auto"
    amplify_m: str = "0"  # numeric text or "auto"
    eigenvector: str = "exact_ground"
    output_dir: str = ""
    emit_state_dumps: bool = False
    seed: int | None = None
    shots: int = 0

    def to_text(self) -> str:
        lines = []
        for key in _CONFIG_KEYS:
            val = getattr(self, key)
            if val is None or val == "":
                continue
            if isinstance(val, bool):
                val = "true" if val else "false"
            lines.append(f"{key} = {val}")
        return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            _set_key(cfg, key, value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return cfg


def _set_key(cfg: ExperimentConfig, key: str, value: str) -> None:
    if key in ("bits", "shots"):
        setattr(cfg, key, int(value))
    elif key == "seed":
        cfg.seed = int(value)
    elif key == "emit_state_dumps":
        low = value.lower()
        if low not in ("true", "false", "1", "0"):
            raise ValueError(f"boolean expected, got {value!r}")
        cfg.emit_state_dumps = low in ("true", "1")
    else:
        setattr(cfg, key, value)


def load_config(path: Path) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text)


def _load_hamiltonian(path: Path) -> PauliSum:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read Hamiltonian {path}: {exc}") from None
    try:
        return parse_hamiltonian(text)
    except HamiltonianParseError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _mem_cap() -> int:
    raw = os.environ.get(MEM_CAP_ENV)
    if raw is None:
        return DEFAULT_MEM_CAP_QUBITS
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{MEM_CAP_ENV} must be an integer, got {raw!r}") from None


def build_pea_config(cfg: ExperimentConfig, base_dir: Path, output_dir: Path) -> PeaConfig:
    """Resolve an experiment config into an executable PeaConfig."""
    if not cfg.hamiltonian:
        raise ConfigError("no Hamiltonian given (key/flag 'hamiltonian')")
    ham_path = Path(cfg.hamiltonian)
    if not ham_path.is_absolute():
        ham_path = base_dir / ham_path
    h = _load_hamiltonian(ham_path)

    if cfg.kappa == "auto":
        from .lcu import choose_kappa

        kappa = choose_kappa(h)
    else:
        try:
            kappa = float(cfg.kappa)
        except ValueError:
            raise ConfigError(f"kappa must be a number or 'auto', got {cfg.kappa!r}") from None

    if cfg.amplify_m == "auto":
        amplify_m: int | str = "auto"
    else:
        try:
            amplify_m = int(cfg.amplify_m)
        except ValueError:
            raise ConfigError(
                f"amplify_m must be an integer or 'auto', got {cfg.amplify_m!r}"
            ) from None

    eig = cfg.eigenvector
    if eig.startswith("file:"):
        vec_path = Path(eig.split(":", 1)[1])
        if not vec_path.is_absolute():
            vec_path = base_dir / vec_path
        eig = f"file:{vec_path}"

    try:
        return PeaConfig(
            hamiltonian=h,
            bits=cfg.bits,
            kappa=kappa,
            strategy=cfg.strategy,
            amplify_m=amplify_m,
            eigenvector=eig,
            shots=cfg.shots,
            seed=cfg.seed,
            mem_cap_qubits=_mem_cap(),
            dump_dir=str(output_dir) if cfg.emit_state_dumps else None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def write_trace(result: PeaResult, path: Path) -> None:
    rows = ["iter,k,power,bit,p0_unnorm,p1_unnorm,feedback_angle"]
    for i, r in enumerate(result.records, start=1):
        rows.append(
            f"{i},{r.k},{2 ** r.k},{r.bit},"
            f"{r.p0_unnorm:.17g},{r.p1_unnorm:.17g},{r.feedback_angle:.17g}"
        )
    path.write_text("\n".join(rows) + "\n")


def write_summary(result: PeaResult, pea_cfg: PeaConfig, amplify_m: int, path: Path) -> None:
    payload = {
        "phase": result.phase,
        "energy": result.energy,
        "exact_energy": result.exact_energy,
        "abs_error": result.abs_error,
        "kappa": pea_cfg.kappa,
        "strategy": pea_cfg.strategy,
        "amplify_m": amplify_m,
        "bits": result.bits,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _run_one(cfg: ExperimentConfig, base_dir: str, out_dir: str) -> int:
    base, out = Path(base_dir), Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pea_cfg = build_pea_config(cfg, base, out)
    if pea_cfg.amplify_m == "auto":
        # resolve the scan once so the summary records the count actually used
        from .amplify import tune_repetitions
        from .lcu import build_lcu
        from .pea import resolve_eigenvector

        if pea_cfg.strategy == "exact_oracle":
            pea_cfg.amplify_m = 0
        else:
            lcu = build_lcu(pea_cfg.hamiltonian, pea_cfg.kappa)
            pea_cfg.amplify_m = tune_repetitions(lcu, resolve_eigenvector(pea_cfg))
    result = run_ipea(pea_cfg)
    write_trace(result, out / "trace.csv")
    write_summary(result, pea_cfg, int(pea_cfg.amplify_m), out / "summary.json")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    jobs: list[tuple[ExperimentConfig, str, str]] = []
    out_dirs: set[str] = set()
    for cfg_path_text in args.config:
        cfg_path = Path(cfg_path_text)
        cfg = load_config(cfg_path)
        _apply_flag_overrides(cfg, args)
        out_dir = cfg.output_dir or f"{cfg_path.stem}_out"
        out_path = Path(out_dir)
        if not out_path.is_absolute():
            out_path = Path.cwd() / out_path
        if str(out_path) in out_dirs:
            raise ConfigError(f"duplicate output dir {out_path}; runs must not collide")
        out_dirs.add(str(out_path))
        jobs.append((cfg, str(cfg_path.resolve().parent), str(out_path)))

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_run_one, *job) for job in jobs]
            for fut in futures:
                fut.result()
    else:
        for job in jobs:
            _run_one(*job)
    return 0


def _apply_flag_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> None:
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is None:
            continue
        if isinstance(val, bool) and not val:
            continue  # store_true flags only override when set
        setattr(cfg, key, val)


def cmd_spectrum(args: argparse.Namespace) -> int:
    h = _load_hamiltonian(Path(args.hamiltonian))
    if h.n > DENSE_QUBIT_CAP:
        print(
            f"error: spectrum needs the dense oracle (n <= {DENSE_QUBIT_CAP}), got n={h.n}",
            file=sys.stderr,
        )
        return 3
    evals, _ = exact_spectrum(h)
    print("[" + ", ".join(f"{v:.12g}" for v in evals) + "]")
    return 0


def cmd_resources(args: argparse.Namespace) -> int:
    report = estimate_resources(args.n, args.L, args.a, args.strategy)
    print(json.dumps(dataclasses.asdict(report)))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcupea",
        description="Eigenvalue estimation on block-encoded Pauli-sum Hamiltonians",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run phase-estimation experiments from configs")
    run.add_argument("config", nargs="+", help="config file(s), key=value format")
    run.add_argument("--jobs", type=int, default=1, help="concurrent runs for multiple configs")
    run.add_argument("--hamiltonian", help="override: Hamiltonian file")
    run.add_argument("--strategy", choices=["successive", "permutation", "exact_oracle"])
    run.add_argument("--bits", type=int, help="override: iteration count")
    run.add_argument("--kappa", help="override: scaling constant or 'auto'")
    run.add_argument("--amplify_m", help="override: amplification count or 'auto'")
    run.add_argument("--eigenvector", help="override: exact_ground | basis:<i> | file:<path>")
    run.add_argument("--output_dir", help="override: output directory")
    run.add_argument("--emit_state_dumps", action="store_true")
    run.add_argument("--seed", type=int, help="override: shot-sampling seed")
    run.add_argument("--shots", type=int, help="override: shots per bit (0 = exact)")

    spec = sub.add_parser("spectrum", help="print the exact eigenvalues of a Hamiltonian file")
    spec.add_argument("hamiltonian")

    res = sub.add_parser("resources", help="qubit/operation-count estimate")
    res.add_argument("n", type=int, help="system qubits")
    res.add_argument("L", type=int, help="Hamiltonian term count")
    res.add_argument("a", type=int, help="phase-estimation iterations")
    res.add_argument("strategy", choices=["successive", "permutation"])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "spectrum":
            return cmd_spectrum(args)
        return cmd_resources(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MemoryCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
