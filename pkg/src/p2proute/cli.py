"""Command line entry point: ``p2proute <command> ...``.

Exit codes: 0 success, 2 input or configuration error, 3 runtime
prerequisite failure. ``P2PROUTE_OUTPUT_DIR`` overrides the directory of
relative output paths.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .hypergraph import (
    NoConstraintsError,
    OracleTooLargeError,
    format_strategy,
    from_clusters,
    minimal_transversals,
    minimal_transversals_bruteforce,
    parse_hypergraph,
)
from .mining import DatasetFormatError, MiningParams, format_cluster, parse_dataset, select_clusters
from .network import ConfigurationError, NetworkGenParams, build_network, dump_network
from .routing import RoutingError
from .sim import CSV_HEADER, POLICIES, PrerequisiteError, SimConfig, generate_workload, prepare, run

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_RUNTIME = 3

OUTPUT_DIR_ENV = "P2PROUTE_OUTPUT_DIR"


class InputError(Exception):
    pass


def _output_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc


# ------------------------------------------------------------------ config

@dataclass
class ExperimentConfig:
    n_peers: int = 300
    n_superpeers: int = 10
    n_ksps: int = 2
    minfr: float = 0.2
    m_overlap: int = 1
    eps_acc: float = 0.5
    ttl: int = 4
    n_queries: int = 200
    noise: float = 0.0
    seeds: list[int] = field(default_factory=lambda: [1])
    policies: list[str] = field(default_factory=lambda: list(POLICIES))
    output: str = "report.csv"
    bootstrap_fraction: float = 0.2
    retrain_every: int = 100
    max_depth: int = 12
    min_leaf: int = 1

    def network_params(self) -> NetworkGenParams:
        return NetworkGenParams(
            n_peers=self.n_peers,
            n_superpeers=self.n_superpeers,
            n_ksps=self.n_ksps,
            eps_acc=self.eps_acc,
        )

    def sim_config(self) -> SimConfig:
        return SimConfig(
            eps_acc=self.eps_acc,
            ttl=self.ttl,
            minfr=self.minfr,
            m_overlap=self.m_overlap,
            bootstrap_fraction=self.bootstrap_fraction,
            retrain_every=self.retrain_every,
            max_depth=self.max_depth,
            min_leaf=self.min_leaf,
        )


_CHECKS = {
    "n_peers": lambda v: v >= 1,
    "n_superpeers": lambda v: v >= 1,
    "n_ksps": lambda v: v >= 1,
    "minfr": lambda v: 0 < v <= 1,
    "m_overlap": lambda v: v >= 1,
    "eps_acc": lambda v: 0 <= v <= 1,
    "ttl": lambda v: v >= 1,
    "n_queries": lambda v: v >= 2,
    "noise": lambda v: 0 <= v <= 1,
    "seeds": lambda v: len(v) >= 1,
    "policies": lambda v: len(v) >= 1 and all(p in POLICIES for p in v),
    "output": lambda v: bool(v),
    "bootstrap_fraction": lambda v: 0 < v < 1,
    "retrain_every": lambda v: v >= 0,
    "max_depth": lambda v: v >= 1,
    "min_leaf": lambda v: v >= 1,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines; unknown keys and bad values raise :class:`InputError`."""
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise InputError(f"config line {lineno}: expected 'key = value'")
        if key not in types:
            raise InputError(f"config line {lineno}: unknown key {key!r}")
        try:
            if key == "seeds":
                parsed = [int(tok) for tok in value.replace(",", " ").split()]
            elif key == "policies":
                parsed = [tok for tok in value.replace(",", " ").split()]
            elif types[key] in ("int", int):
                parsed = int(value)
            elif types[key] in ("float", float):
                parsed = float(value)
            else:
                parsed = value
        except ValueError:
            raise InputError(f"config line {lineno}: invalid value for {key}: {value!r}") from None
        if not _CHECKS[key](parsed):
            raise InputError(f"config line {lineno}: value out of range for {key}: {value!r}")
        values[key] = parsed
    cfg = ExperimentConfig(**values)
    try:
        cfg.network_params().validate()
    except ConfigurationError as exc:
        raise InputError(f"config: {exc}") from None
    return cfg


# ------------------------------------------------------------------ commands

def cmd_mine(args) -> int:
    dataset = parse_dataset(_read(args.dataset))
    clusters = select_clusters(dataset, MiningParams(args.minfr, args.m))
    text = "".join(format_cluster(c) + "\n" for c in clusters)
    sys.stdout.write(text)
    if args.out:
        _output_path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def _looks_like_dataset(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            return ":" in line
    return False


def _load_hypergraph(path: str, minfr: float, m: int):
    text = _read(path)
    if _looks_like_dataset(text):
        dataset = parse_dataset(text)
        clusters = select_clusters(dataset, MiningParams(minfr, m))
        return from_clusters(clusters, dataset.ids)
    return parse_hypergraph(text)


def _print_strategies(strategies, out) -> int:
    text = "".join(format_strategy(s) + "\n" for s in strategies)
    sys.stdout.write(text)
    if out:
        _output_path(out).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_transversals(args) -> int:
    h = _load_hypergraph(args.input, args.minfr, args.m)
    return _print_strategies(minimal_transversals(h), args.out)


def cmd_oracle_transversals(args) -> int:
    h = _load_hypergraph(args.input, args.minfr, args.m)
    return _print_strategies(minimal_transversals_bruteforce(h), args.out)


def cmd_dump_network(args) -> int:
    params = NetworkGenParams(args.n_peers, args.n_sps, args.n_ksps)
    text = dump_network(build_network(params, args.seed))
    sys.stdout.write(text) if not args.out else _output_path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


def simulate(cfg: ExperimentConfig) -> list[str]:
    """One CSV row per (seed, policy); every run starts from a freshly built network."""
    rows = []
    sim_cfg = cfg.sim_config()
    for seed in sorted(set(cfg.seeds)):
        for policy in sorted(set(cfg.policies), key=POLICIES.index):
            net = build_network(cfg.network_params(), seed)
            wl = generate_workload(net, cfg.n_queries, cfg.noise, seed, cfg.eps_acc, cfg.ttl)
            index = prepare(net, policy, wl, sim_cfg)
            rows.append(run(net, policy, wl, sim_cfg, index, seed).csv_row())
    return rows


def cmd_simulate(args) -> int:
    cfg = parse_config(_read(args.config))
    rows = simulate(cfg)
    out = _output_path(args.out or cfg.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(CSV_HEADER + "\n" + "".join(r + "\n" for r in rows), encoding="utf-8")
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p2proute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="select overlapping super-peer clusters")
    p.add_argument("dataset")
    p.add_argument("--minfr", type=float, default=0.2)
    p.add_argument("--m", type=int, default=1, help="minimal number of new transactions per cluster")
    p.add_argument("--out")
    p.set_defaults(func=cmd_mine)

    for name, func, help_ in [
        ("transversals", cmd_transversals, "minimal transversals (Berge)"),
        ("oracle-transversals", cmd_oracle_transversals, "minimal transversals by exhaustive scan"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("input", help="hypergraph file, or a dataset file to mine first")
        p.add_argument("--minfr", type=float, default=0.2)
        p.add_argument("--m", type=int, default=1)
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="run the configured experiment grid, write CSV")
    p.add_argument("config")
    p.add_argument("--out", help="override the config's output path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("dump-network", help="print a generated network")
    p.add_argument("--n-peers", type=int, default=300)
    p.add_argument("--n-sps", type=int, default=10)
    p.add_argument("--n-ksps", type=int, default=2)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dump_network)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "minfr", None) is not None and not 0 < args.minfr <= 1:
        parser.exit(EXIT_INPUT, "error: --minfr must lie in (0, 1]\n")
    if getattr(args, "m", None) is not None and args.m < 1:
        parser.exit(EXIT_INPUT, "error: --m must be >= 1\n")
    try:
        return args.func(args)
    except (InputError, DatasetFormatError, NoConstraintsError, OracleTooLargeError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (PrerequisiteError, RoutingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
