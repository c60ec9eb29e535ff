"""Command line interface.

Subcommands: run a scenario, compare finished runs, list scheduling policies,
and run the bundled scenario suite. Exit codes: 0 success, 2 invalid input,
3 broken runtime invariant.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .errors import InvariantError, ValidationError
from .model import Catalog, ScenarioConfig, parse_catalog, parse_functions_doc, parse_scenario
from .runner import run_scenario
from .report import compare_runs
from .scheduler import list_policies

BUNDLED_CATALOG = "data/default_catalog.json"
BUNDLED_SCENARIOS = "data/scenarios"

CAPABILITY_PLATFORMS = (
    "hpc-node-cluster", "old-hpc-node-cluster", "cloud-cluster",
    "google-cloud-cluster", "edge-cluster",
)
CAPABILITY_VUS = (10, 20, 30, 40, 50)


def _bundled_text(rel: str) -> str:
    return (resources.files("fdnsim") / rel).read_text(encoding="utf-8")


def load_catalog(catalog_arg: str | None, scenario: ScenarioConfig | None,
                 scenario_path: Path | None) -> Catalog:
    """Resolution order: --catalog flag, the scenario's catalog field,
    FDNSIM_CATALOG, then the bundled default."""
    path = catalog_arg
    if path is None and scenario is not None and scenario.catalog_path:
        path = scenario.catalog_path
        if scenario_path is not None and not Path(path).is_absolute():
            path = str(scenario_path.parent / path)
    if path is None:
        path = os.environ.get("FDNSIM_CATALOG")
    if path is None:
        catalog = parse_catalog(_bundled_text(BUNDLED_CATALOG))
    else:
        catalog = parse_catalog(Path(path).read_text(encoding="utf-8"))
    if scenario is not None and scenario.functions_config:
        fpath = scenario.functions_config
        if scenario_path is not None and not Path(fpath).is_absolute():
            fpath = str(scenario_path.parent / fpath)
        extra = parse_functions_doc(Path(fpath).read_text(encoding="utf-8"))
        merged = dict(catalog.functions)
        merged.update(extra)
        catalog = Catalog(platforms=catalog.platforms, functions=merged)
    return catalog


def _print_run(summary: dict, out_dir: Path | None) -> None:
    print(f"{summary['test_name']}: policy={summary['policy']} seed={summary['seed']}")
    print(f"  issued={summary['issued']} completed={summary['completed']} "
          f"rejected={summary['rejected']} failed={summary['failed']}")
    for pid, p in summary["platforms"].items():
        p90 = p["overall_p90_s"]
        p90_s = f"{p90:.3f}s" if p90 is not None else "n/a"
        energy = p["energy_j"]
        energy_s = f"{energy:.1f}J" if energy is not None else "n/a"
        print(f"  {pid}: completed={p['requests_completed']} p90={p90_s} "
              f"throughput={p['throughput_rps']:.2f}rps energy={energy_s}")
    if out_dir is not None:
        print(f"  artifacts: {out_dir}")


def cmd_run(args) -> int:
    scenario_path = Path(args.scenario)
    scenario = parse_scenario(scenario_path.read_text(encoding="utf-8"))
    catalog = load_catalog(args.catalog, scenario, scenario_path)
    out_dir = Path(args.out) if args.out else Path("runs") / scenario.test_name
    result = run_scenario(scenario, catalog, out_dir=out_dir,
                          seed=args.seed, trace=args.trace)
    _print_run(result.summary, out_dir)
    return 0


def cmd_compare(args) -> int:
    result = compare_runs(args.runs, args.metric, out_path=args.out)
    if args.out:
        print(f"comparison written to {args.out}")
    else:
        print(json.dumps(result, indent=2))
    return 0


def cmd_list_policies(_args) -> int:
    for p in list_policies():
        params = ", ".join(f"{k}={v}" for k, v in p["params"].items()) or "-"
        print(f"{p['name']:22s} params: {params}")
        print(f"{'':22s} {p['description']}")
    return 0


def _bundled_scenarios() -> list[tuple[str, str]]:
    root = resources.files("fdnsim") / BUNDLED_SCENARIOS
    entries = []
    for item in root.iterdir():
        if item.name.endswith(".json"):
            entries.append((item.name, item.read_text(encoding="utf-8")))
    return sorted(entries)


def _capability_sweep() -> list[dict]:
    docs = []
    for pid in CAPABILITY_PLATFORMS:
        for vus in CAPABILITY_VUS:
            docs.append({
                "test_name": f"capability-{pid}-vus{vus:02d}",
                "functions": ["nodeinfo"],
                "target_platforms": [pid],
                "policy": "ranked-best",
                "test_settings": {"vus": vus, "duration": "120s", "sleep": "0.1s"},
                "collection_duration": "240s",
            })
    return docs


def cmd_suite(args) -> int:
    catalog = load_catalog(args.catalog, None, None)
    out_root = Path(args.out) if args.out else Path("runs")
    jobs: list[tuple[str, ScenarioConfig]] = []
    for name, text in _bundled_scenarios():
        cfg = parse_scenario(text)
        jobs.append((name, cfg))
    for doc in _capability_sweep():
        cfg = parse_scenario(doc)
        jobs.append((cfg.test_name + ".gen", cfg))
    if args.only:
        jobs = [(n, c) for n, c in jobs if args.only in c.test_name]
    if not jobs:
        raise ValidationError(f"no suite scenario matches --only {args.only!r}")
    rows = []
    for name, cfg in jobs:
        out_dir = out_root / cfg.test_name
        result = run_scenario(cfg, catalog, out_dir=out_dir, seed=args.seed)
        s = result.summary
        total_energy = sum(p["energy_j"] for p in s["platforms"].values()
                           if p["energy_j"] is not None)
        p90s = [p["overall_p90_s"] for p in s["platforms"].values()
                if p["overall_p90_s"] is not None]
        rows.append({
            "test_name": s["test_name"], "policy": s["policy"],
            "issued": s["issued"], "completed": s["completed"],
            "rejected": s["rejected"], "failed": s["failed"],
            "p90_s": max(p90s) if p90s else None,
            "energy_j": round(total_energy, 3),
            "out_dir": str(out_dir),
        })
        print(f"{s['test_name']}: completed={s['completed']} "
              f"rejected={s['rejected']} failed={s['failed']}")
    (out_root / "suite.json").write_text(
        json.dumps(rows, indent=2) + "\n", encoding="utf-8")
    print(f"suite summary: {out_root / 'suite.json'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdnsim",
        description="Simulated function delivery network: scheduling, energy "
                    "and data placement across heterogeneous FaaS platforms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario")
    p_run.add_argument("--scenario", required=True, help="scenario JSON file")
    p_run.add_argument("--catalog", help="platform/function catalog JSON")
    p_run.add_argument("--out", help="artifact directory (default runs/<test_name>)")
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.add_argument("--trace", action="store_true", help="write events.trace")
    p_run.set_defaults(func=cmd_run)

    p_cmp = sub.add_parser("compare", help="compare finished runs")
    p_cmp.add_argument("runs", nargs="+", help="run directories")
    p_cmp.add_argument("--metric", required=True,
                       help="energy_j or a metrics.csv column")
    p_cmp.add_argument("--out", help="write CSV/JSON here instead of stdout")
    p_cmp.set_defaults(func=cmd_compare)

    p_list = sub.add_parser("list-policies", help="show scheduling policies")
    p_list.set_defaults(func=cmd_list_policies)

    p_suite = sub.add_parser("suite", help="run the bundled scenario suite")
    p_suite.add_argument("--out", help="root artifact directory (default runs/)")
    p_suite.add_argument("--seed", type=int, help="override every scenario seed")
    p_suite.add_argument("--catalog", help="platform/function catalog JSON")
    p_suite.add_argument("--only", help="run only tests whose name contains this")
    p_suite.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
