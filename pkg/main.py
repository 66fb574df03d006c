#!/usr/bin/env python3
"""
Max-Semi-Stable Toolkit - Main Entry Point
Builds max-semi-stable laws, simulates extremal processes and max-AR(1)
series, and verifies their defining identities from scenario files
"""

import os
import sys
import json
import yaml
import logging
import argparse
from pathlib import Path
from typing import List, Optional
from dotenv import load_dotenv
from colorama import Fore, Style, init as colorama_init

# Import services
from services.distributions import (
    cdf,
    geometric_max_identity_check,
    quantile,
    sample_power,
)
from services.processes import (
    compound_cdf_analytic,
    compound_semi_sd_check,
    marginal_reports,
    power_cdf,
    self_similarity_check,
    simulate_compound_ep_paths,
    simulate_ep_paths,
)
from services.timeseries import (
    ar_identity_check,
    geometric_max_sampler,
    one_step_closure,
    simulate_max_ar1,
    simulate_modified_max_ar1,
    stationarity_report,
)
from services.verifier import verify_distribution

# Import models and utilities
from models.laws import MaxSemiStableDF
from models.report import KSReport
from models.scenario import ScenarioConfig, ScenarioError
from utils.output import matrix_rows, write_csv, write_json
from utils.stats import DEFAULT_KS_COEFFICIENT, ks_one_sample
from utils.validators import ensure_directory, validate_config_format, validate_file_exists

# Initialize colorama for colored output
colorama_init(autoreset=True)

logger = logging.getLogger(__name__)

COMMANDS = [
    "make-dist",
    "eval",
    "sample",
    "verify",
    "sim-ep",
    "sim-compound-ep",
    "sim-ar1",
    "sim-ar1-mod",
]

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CHECK_FAILED = 2

DEFAULT_SETTINGS_PATH = Path(__file__).resolve().parent / "config.yml"

DEFAULT_SETTINGS = {
    "logging": {"level": "INFO", "file": "logs/maxsemi.log"},
    "numerics": {"identity_tol": 1e-12, "roundtrip_tol": 1e-10, "cm_tol": 1e-10},
    "stats": {"ks_coefficient": DEFAULT_KS_COEFFICIENT, "cm_max_order": 8},
    "pool": {"workers": 1, "chunk_size": 2500, "progress": False},
    "output": {"digits": 17},
    "scenario": {"supported_formats": ["json", "yml", "yaml"]},
}


def print_banner():
    """Print application banner"""
    banner = f"""
{Fore.CYAN}╔═══════════════════════════════════════════════════════════╗
║                                                           ║
║              MAX-SEMI-STABLE TOOLKIT                      ║
║                                                           ║
║   Laws, extremal processes and max-AR(1) verification    ║
║                                                           ║
╚═══════════════════════════════════════════════════════════╝{Style.RESET_ALL}
    """
    print(banner)


def print_step(step_num: int, total_steps: int, description: str):
    """Print processing step"""
    print(f"\n{Fore.YELLOW}[{step_num}/{total_steps}] {description}{Style.RESET_ALL}")


def print_success(message: str):
    """Print success message"""
    print(f"{Fore.GREEN}✓ {message}{Style.RESET_ALL}")


def print_error(message: str):
    """Print error message"""
    print(f"{Fore.RED}✗ {message}{Style.RESET_ALL}")


def print_warning(message: str):
    """Print warning message"""
    print(f"{Fore.YELLOW}⚠ {message}{Style.RESET_ALL}")


def print_info(message: str):
    """Print info message"""
    print(f"{Fore.CYAN}ℹ {message}{Style.RESET_ALL}")


def load_settings(path: Optional[str] = None) -> dict:
    """
    Load application settings, section by section over the defaults

    Environment overrides: MAXSEMI_LOG_LEVEL, MAXSEMI_WORKERS.
    """
    settings = {section: dict(values) for section, values in DEFAULT_SETTINGS.items()}
    path = path or os.getenv("MAXSEMI_CONFIG") or str(DEFAULT_SETTINGS_PATH)
    if validate_file_exists(path):
        with open(path, 'r') as f:
            loaded = yaml.safe_load(f) or {}
        for section, values in loaded.items():
            settings.setdefault(section, {}).update(values or {})
    else:
        logger.debug(f"Settings file {path} not found, using defaults")

    if os.getenv("MAXSEMI_LOG_LEVEL"):
        settings["logging"]["level"] = os.getenv("MAXSEMI_LOG_LEVEL")
    if os.getenv("MAXSEMI_WORKERS"):
        settings["pool"]["workers"] = int(os.getenv("MAXSEMI_WORKERS"))
    return settings


def setup_logging(settings: dict) -> None:
    """File + stdout logging as configured"""
    log_file = settings["logging"]["file"]
    ensure_directory(os.path.dirname(log_file) or ".")
    logging.basicConfig(
        level=getattr(logging, str(settings["logging"]["level"]).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler(sys.stdout)
        ]
    )


def load_scenario(config_path: str, supported_formats: List[str]) -> ScenarioConfig:
    """
    Parse and validate a scenario file (JSON or YAML)

    Raises:
        ScenarioError: If the file is missing or has an unsupported extension
        pydantic.ValidationError: If a record violates a model invariant
    """
    if not validate_file_exists(config_path):
        raise ScenarioError(f"scenario file not found: {config_path}")
    if not validate_config_format(config_path, supported_formats):
        raise ScenarioError(f"unsupported scenario format: {config_path}")

    with open(config_path, 'r') as f:
        if config_path.lower().endswith(".json"):
            raw = json.load(f)
        else:
            raw = yaml.safe_load(f)
    return ScenarioConfig.model_validate(raw)


def ks_entry(check: str, anchor: str, report: KSReport, **detail) -> dict:
    entry = {"check": check, "anchor": anchor, **report.to_json_dict()}
    if detail:
        entry["detail"] = detail
    return entry


def error_payload(error: Exception) -> dict:
    """error.json body: exception type, message and the violated invariant if known"""
    invariant = None
    errors = getattr(error, "errors", None)
    if callable(errors):
        first = errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ()))
        invariant = f"{location}: {first.get('msg', '')}".strip(": ")
    return {"error": type(error).__name__, "detail": str(error), "invariant": invariant}


def _all_pass(entries: List[dict]) -> bool:
    return all(entry["pass"] for entry in entries)


def _run_make_dist(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    payload = {
        "kind": law.kind,
        "psi": law.psi.to_record(),
        "phi": law.phi.model_dump(mode="json"),
        "seed": scenario.seed,
    }
    write_json(os.path.join(out_dir, "spec.json"), payload)
    print_success(f"{law.psi.branch} law with alpha={law.psi.alpha:.12g}")
    return []


def _run_eval(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    digits = settings["output"]["digits"]
    section = scenario.eval
    if section.x:
        values = cdf(law, section.x)
        write_csv(os.path.join(out_dir, "cdf.csv"), ["x", "cdf"],
                  zip(section.x, values), digits)
    if section.u:
        values = quantile(law, section.u)
        write_csv(os.path.join(out_dir, "quantile.csv"), ["u", "quantile"],
                  zip(section.u, values), digits)
    print_success(f"Evaluated {len(section.x)} d.f. points and {len(section.u)} quantiles")
    return []


def _run_sample(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    section = scenario.sample
    draws = sample_power(law, section.tau, section.n, scenario.seed)
    if section.format == "json":
        write_json(os.path.join(out_dir, "sample.json"), draws.tolist())
    else:
        write_csv(os.path.join(out_dir, "sample.csv"), ["value"],
                  ([v] for v in draws), settings["output"]["digits"])
    print_success(f"Drew {section.n} values from F^{section.tau:g}")
    return []


def _run_verify(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    numerics = settings["numerics"]
    checks = verify_distribution(
        law,
        identity_tol=numerics["identity_tol"],
        roundtrip_tol=numerics["roundtrip_tol"],
        cm_tol=numerics["cm_tol"],
        cm_max_order=settings["stats"]["cm_max_order"]
    )
    return [c.to_json_dict() for c in checks]


def _paths_csv(out_dir: str, paths, times, digits: int) -> None:
    write_csv(os.path.join(out_dir, "paths.csv"), ["replicate", "time", "value"],
              matrix_rows(paths, times), digits)


def _run_sim_ep(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    section = scenario.process
    pool = settings["pool"]
    coefficient = settings["stats"]["ks_coefficient"]

    paths = simulate_ep_paths(law, section.times, section.n, scenario.seed,
                              workers=pool["workers"], chunk_size=pool["chunk_size"],
                              progress=pool["progress"])
    _paths_csv(out_dir, paths, section.times, settings["output"]["digits"])

    reports = marginal_reports(paths, section.times, lambda t: power_cdf(law, t), coefficient)
    entries = [ks_entry("ep-marginal", "ep-marginal", r, t=t)
               for t, r in zip(section.times, reports)]
    for b in section.self_similarity:
        report = self_similarity_check(law, b, 1.0, section.n, scenario.seed, coefficient)
        entries.append(ks_entry("self-similarity", "self-similarity", report, b=b))
    return entries


def _run_sim_compound_ep(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    section = scenario.process
    phi = section.phi
    pool = settings["pool"]
    coefficient = settings["stats"]["ks_coefficient"]

    paths = simulate_compound_ep_paths(law, phi, section.times, section.n, scenario.seed,
                                       workers=pool["workers"], chunk_size=pool["chunk_size"],
                                       progress=pool["progress"])
    _paths_csv(out_dir, paths, section.times, settings["output"]["digits"])

    entries = []
    for k, t in enumerate(section.times):
        if t == 0.0:
            continue
        report = ks_one_sample(paths[:, k],
                               lambda x, t=t: compound_cdf_analytic(phi, law, t, x),
                               coefficient)
        entries.append(ks_entry("compound-marginal", "compound-law", report, t=t))
        if isinstance(law, MaxSemiStableDF):
            check = compound_semi_sd_check(phi, law, t, tol=settings["numerics"]["identity_tol"])
            entries.append(check.to_json_dict())
    return entries


def _series_csv(out_dir: str, series, digits: int) -> None:
    write_csv(os.path.join(out_dir, "series.csv"), ["replicate", "n", "value"],
              matrix_rows(series, range(series.shape[1])), digits)


def _stationarity_entries(series, law, checkpoints, coefficient) -> List[dict]:
    report = stationarity_report(series, law, checkpoints, coefficient)
    return [ks_entry("ar1-stationarity", "ar1-stationarity", cp.ks, checkpoint=cp.index)
            for cp in report.checkpoints]


def _run_sim_ar1(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    cfg = scenario.ar
    pool = settings["pool"]
    coefficient = settings["stats"]["ks_coefficient"]

    series = simulate_max_ar1(cfg, law, scenario.replicates, scenario.seed,
                              workers=pool["workers"], chunk_size=pool["chunk_size"],
                              progress=pool["progress"])
    _series_csv(out_dir, series, settings["output"]["digits"])

    entries = _stationarity_entries(series, law, cfg.resolved_checkpoints(), coefficient)
    entries.append(
        ar_identity_check(law, cfg.rho, tol=settings["numerics"]["identity_tol"]).to_json_dict()
    )
    closure = one_step_closure(law, cfg.rho, scenario.replicates, scenario.seed,
                               coefficient=coefficient)
    entries.append(ks_entry("ar1-closure", "max-ar1", closure))
    return entries


def _run_sim_ar1_mod(scenario: ScenarioConfig, out_dir: str, settings: dict) -> List[dict]:
    law = scenario.distribution.build()
    cfg = scenario.ar
    pool = settings["pool"]
    coefficient = settings["stats"]["ks_coefficient"]
    c = 1.0 / cfg.rho

    series = simulate_modified_max_ar1(cfg, law, scenario.replicates, scenario.seed,
                                       workers=pool["workers"], chunk_size=pool["chunk_size"],
                                       progress=pool["progress"])
    _series_csv(out_dir, series, settings["output"]["digits"])

    entries = _stationarity_entries(series, law, cfg.resolved_checkpoints(), coefficient)
    identity = geometric_max_identity_check(law, cfg.p, c, tol=settings["numerics"]["identity_tol"])
    entries.append(identity.to_json_dict())

    draws = geometric_max_sampler(law, cfg.p, c, scenario.replicates, scenario.seed)
    sampler = ks_one_sample(draws, lambda x: cdf(law, x), coefficient)
    entries.append(ks_entry("geometric-max-sampler", "geometric-max", sampler, p=cfg.p, c=c))

    closure = one_step_closure(law, cfg.rho, scenario.replicates, scenario.seed, p=cfg.p,
                               coefficient=coefficient)
    entries.append(ks_entry("ar1-mod-closure", "max-ar1-modified", closure))
    return entries


HANDLERS = {
    "make-dist": _run_make_dist,
    "eval": _run_eval,
    "sample": _run_sample,
    "verify": _run_verify,
    "sim-ep": _run_sim_ep,
    "sim-compound-ep": _run_sim_compound_ep,
    "sim-ar1": _run_sim_ar1,
    "sim-ar1-mod": _run_sim_ar1_mod,
}


def run(
    command: str,
    config_path: str,
    out_dir: str,
    seed: Optional[int] = None,
    workers: Optional[int] = None,
    settings: Optional[dict] = None
) -> int:
    """
    Execute one command on one scenario file

    Args:
        command: One of COMMANDS
        config_path: Scenario file (JSON or YAML)
        out_dir: Output directory, created if missing
        seed: Overrides the scenario seed
        workers: Overrides the configured worker count
        settings: Application settings (default: load_settings())

    Returns:
        0 on success, 1 on a validation failure (error.json written),
        2 if any check in the run fails
    """
    settings = settings or load_settings()
    if workers is not None:
        settings = {**settings, "pool": {**settings["pool"], "workers": workers}}
    ensure_directory(out_dir)

    try:
        if command not in HANDLERS:
            raise ScenarioError(f"unknown command: {command}")
        scenario = load_scenario(config_path, settings["scenario"]["supported_formats"])
        if seed is not None:
            scenario = ScenarioConfig.model_validate({**scenario.model_dump(), "seed": seed})
        scenario.require(command)
        print_info(f"Running {command} on {config_path} (seed {scenario.seed})")
        entries = HANDLERS[command](scenario, out_dir, settings)
    except (ValueError, OSError, yaml.YAMLError) as e:
        print_error(f"{command} failed validation: {str(e)}")
        logger.error(f"{command} on {config_path}: {type(e).__name__}: {e}")
        write_json(os.path.join(out_dir, "error.json"), error_payload(e))
        return EXIT_INVALID

    if not entries:
        return EXIT_OK

    passed = _all_pass(entries)
    write_json(os.path.join(out_dir, "report.json"),
               {"command": command, "checks": entries, "pass": passed})
    if passed:
        print_success(f"All {len(entries)} checks pass")
        return EXIT_OK

    failed = [entry["check"] for entry in entries if not entry["pass"]]
    print_warning(f"Failed checks: {', '.join(failed)}")
    return EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Max-semi-stable laws, extremal processes and max-AR(1) verification"
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="Scenario file (JSON or YAML)")
    parser.add_argument("--out", required=True, help="Output directory")
    parser.add_argument("--seed", type=int, default=None, help="Overrides the scenario seed")
    parser.add_argument("--workers", type=int, default=None, help="Replicate worker threads")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function"""
    load_dotenv()
    args = build_parser().parse_args(argv)

    settings = load_settings()
    setup_logging(settings)
    print_banner()

    print_step(1, 2, f"Loading scenario {args.config}...")
    status = run(args.command, args.config, args.out, seed=args.seed,
                 workers=args.workers, settings=settings)

    print_step(2, 2, "Done")
    if status == EXIT_OK:
        print_success(f"Artifacts written to {args.out}")
    elif status == EXIT_CHECK_FAILED:
        print_warning(f"Checks failed, see {os.path.join(args.out, 'report.json')}")
    else:
        print_error(f"Validation failed, see {os.path.join(args.out, 'error.json')}")
    return status


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}Process interrupted by user{Style.RESET_ALL}")
        sys.exit(1)
    except Exception as e:
        print_error(f"Unexpected error: {str(e)}")
        logger.exception("Fatal error:")
        sys.exit(1)
