"""
Command-line entry point.

    netspace validate-lattice --kind su2 --lmax 50 --beta 0
    netspace verify --inequality su2-converse --p 1.5 --lmax 10 --corpus random:50:seed=7

Exit codes: 0 success, 1 verification failure, 2 usage, configuration or domain error. Errors are
written to standard error as one line of JSON.
"""
import argparse
import json
import logging
import math
import sys
from typing import List, Optional

import pandas as pd

from netspace.config import INEQUALITIES, NETSPACE_GRID_SIZE, RunConfig, load_config_file, resolve_config
from netspace.corpus import net_corpus
from netspace.dirichlet import ROW_COLUMNS, characterization_constant, dirichlet_norm, frontend_for
from netspace.errors import ConfigError, NetSpaceError, exit_code_for
from netspace.harness import build_family, build_lattice, run_campaign
from netspace.lattice import check_density_condition, weyl_count_check
from netspace.netnorm import NormParams, averaging_table, conjugate_exponent, load_net_json, net_norm
from netspace.reports import SCHEMA, dumps, write_csv, write_text

logger = logging.getLogger(__name__)

DEFAULTS = {name: info.default for name, info in RunConfig.model_fields.items()}


def _emit_error(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


class JsonArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors are single-line JSON on standard error."""

    def error(self, message):
        _emit_error("UsageError", f"{self.prog}: {message}")
        raise SystemExit(2)


def _extended_real(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'inf', got '{text}'")


def _float_list(text: str) -> list:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")


def _default(name: str) -> str:
    value = DEFAULTS[name]
    return "inf" if isinstance(value, float) and math.isinf(value) else str(value)


def _add(group, flag: str, dest: str, help_text: str, **kwargs):
    group.add_argument(flag, dest=dest, default=None, help=f"{help_text} (default: {_default(dest)})", **kwargs)


def _lattice_flags(parser):
    group = parser.add_argument_group("lattice")
    _add(group, "--kind", "lattice_kind", "Lattice kind", choices=["su2", "integer", "file"])
    _add(group, "--lattice", "lattice_file", "Lattice JSON file (implies --kind file)")
    _add(group, "--lmax", "l_max", "Largest SU(2) label l (half-integer)", type=float)
    _add(group, "--dim", "dim", "Torus dimension n for the integer lattice", type=int)
    _add(group, "--radius", "radius", "Truncation radius K of the integer lattice", type=int)
    _add(group, "--lambda-rule", "lambda_rule", "Lambda rule of the integer lattice", choices=["rank", "abs-m"])


def _family_flags(parser):
    group = parser.add_argument_group("family")
    _add(group, "--family", "family", "Subset family", choices=["all-subsets", "progressions", "segments", "explicit"])
    _add(group, "--family-file", "family_file", "JSON array of member label lists for --family explicit")
    _add(group, "--max-cardinality", "max_cardinality", "Skip members with more elements", type=int)
    _add(group, "--max-count", "max_count", "Refuse families with more members", type=int)
    _add(group, "--segment-measure", "segment_measure", "Measure of a segment", choices=["lattice", "lambda"])


def _norm_flags(parser):
    group = parser.add_argument_group("norms")
    _add(group, "--p", "p", "Exponent p", type=_extended_real)
    _add(group, "--q", "q", "Exponent q (number or inf)", type=_extended_real)
    _add(group, "--engine", "engine", "Averaging engine", choices=["exact", "heuristic"])


def _net_flags(parser):
    group = parser.add_argument_group("nets")
    _add(group, "--net", "net_file", "Coefficient net JSON file (otherwise the corpus is used)")
    _add(group, "--corpus", "corpus", "Corpus spec: deterministic, random:<n>:seed=<s>[:decay=<d>], mixed:<n>:seed=<s>, file:<path>; append :scale=<c> to scale every member")


def _numeric_flags(parser):
    group = parser.add_argument_group("numerics")
    group.add_argument(
        "--grid-size",
        dest="grid_size",
        type=int,
        default=None,
        help=f"Torus grid size per axis (default: {NETSPACE_GRID_SIZE} on the circle, 4K+4 and at least 32 on T^n for n > 1)",
    )
    _add(group, "--quad", "quad", "SU(2) quadrature node count (certified default when unset)", type=int)


def _output_flags(parser):
    group = parser.add_argument_group("output")
    _add(group, "--threads", "threads", "Worker threads (env NETSPACE_THREADS)", type=int)
    _add(group, "--out-json", "out_json", "Write the JSON result here instead of standard output")
    _add(group, "--out-csv", "out_csv", "Write the CSV rows here")
    group.add_argument("--timings", dest="timings", action="store_true", default=None, help="Include runtimes in reports (default: False)")
    _add(group, "--log-level", "log_level", "Logging level on standard error")
    group.add_argument("--config", dest="config_file", default=None, help="TOML config file; flags override it (default: None)")


def build_parser() -> argparse.ArgumentParser:
    parser = JsonArgumentParser(prog="netspace", description="Net-space norms, Dirichlet kernel constants and verification campaigns.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=JsonArgumentParser)

    netnorm = commands.add_parser("netnorm", help="Net norm N_{p,q} of a net or of every net in a corpus")
    averaging = commands.add_parser("averaging-table", help="Averaging function at every lambda, with witnesses")
    for sub in (netnorm, averaging):
        _lattice_flags(sub)
        _family_flags(sub)
        _norm_flags(sub)
        _net_flags(sub)
        _output_flags(sub)

    dirichlet = commands.add_parser("dirichlet", help="L^p' norm of a Dirichlet kernel D_Q")
    _lattice_flags(dirichlet)
    group = dirichlet.add_argument_group("kernel")
    _add(group, "--members", "members", "Comma-separated element labels of Q, e.g. l=0,l=1/2")
    _add(group, "--p-prime", "p_prime", "Exponent p' (defaults to the conjugate of --p)", type=_extended_real)
    _add(group, "--p", "p", "Exponent p", type=_extended_real)
    _numeric_flags(dirichlet)
    _output_flags(dirichlet)

    characterize = commands.add_parser("characterize", help="Characterization constant C_pM with its witness")
    _lattice_flags(characterize)
    _family_flags(characterize)
    group = characterize.add_argument_group("norms")
    _add(group, "--p", "p", "Exponent p", type=_extended_real)
    _numeric_flags(characterize)
    _output_flags(characterize)

    verify = commands.add_parser("verify", help="Run a verification campaign")
    _lattice_flags(verify)
    _family_flags(verify)
    _norm_flags(verify)
    group = verify.add_argument_group("campaign")
    _add(group, "--inequality", "inequality", "Campaign", choices=list(INEQUALITIES))
    _add(group, "--corpus", "corpus", "Corpus spec: deterministic, random:<n>:seed=<s>[:decay=<d>], mixed:<n>:seed=<s>, file:<path>; append :scale=<c> to scale every member")
    _add(group, "--frontend", "frontend", "Fourier frontend for hausdorff-young", choices=["torus", "su2"])
    _add(group, "--bandwidth", "bandwidth", "Torus corpus bandwidth", type=int)
    _add(group, "--q1", "q1", "Smaller q of the embedding", type=_extended_real)
    _add(group, "--q2", "q2", "Larger q of the embedding", type=_extended_real)
    _add(group, "--p1", "p1", "Smaller p of the K-functional check", type=_extended_real)
    _add(group, "--p2", "p2", "Larger p of the K-functional check", type=_extended_real)
    _add(group, "--trials", "trials", "K-functional trials", type=int)
    _add(group, "--seed", "seed", "Seed of the K-functional trials", type=int)
    _add(group, "--bound", "bound", "Declared bound on the ratios", type=float)
    _add(group, "--weight", "weight", "SU(2) converse weight exponent", choices=["definition", "display"])
    _add(group, "--sizes", "sizes", "Comma-separated l_max values for the embedding trend", type=_float_list)
    _numeric_flags(verify)
    _output_flags(verify)

    validate = commands.add_parser("validate-lattice", help="Density condition bands (and Weyl counting on SU(2))")
    _lattice_flags(validate)
    group = validate.add_argument_group("validation")
    _add(group, "--beta", "beta", "Exponent beta (not -1)", type=float)
    _add(group, "--side", "side", "Partial sums below or above lambda", choices=["below", "above"])
    _output_flags(validate)

    return parser


# -- commands ------------------------------------------------------------------------------------


def _nets(config: RunConfig, lattice) -> list:
    if config.net_file:
        return [(config.net_file, load_net_json(config.net_file, lattice))]
    return net_corpus(config.corpus, lattice)


def _netnorm(config: RunConfig):
    lattice = build_lattice(config)
    params = NormParams(p=config.p, q=config.q, family=build_family(config, lattice))
    results = []
    for name, F in _nets(config, lattice):
        result = net_norm(F, params, config.engine).to_dict(lattice)
        results.append({"name": name, **result})
    rows = pd.DataFrame([{"name": r["name"], "value": r["value"], "exact": r["exact"]} for r in results], columns=["name", "value", "exact"])
    return {"results": results}, rows, 0


def _averaging_table(config: RunConfig):
    lattice = build_lattice(config)
    family = build_family(config, lattice)
    records = []
    for name, F in _nets(config, lattice):
        for average in averaging_table(F, family, config.engine):
            records.append(
                {
                    "name": name,
                    "level": average.level,
                    "value": average.value,
                    "witness": ";".join(lattice.labels(average.witness)) if average.witness else "",
                    "exact": average.exact,
                }
            )
    return {"table": records}, pd.DataFrame(records, columns=["name", "level", "value", "witness", "exact"]), 0


def _dirichlet(config: RunConfig):
    lattice = build_lattice(config)
    labels = [label.strip() for label in config.members.split(",") if label.strip()]
    Q = [lattice.by_label(label).id for label in labels]
    p_prime = config.p_prime if config.p_prime is not None else conjugate_exponent(config.p)
    frontend = config.frontend or frontend_for(lattice)
    value, uncertainty = dirichlet_norm(Q, p_prime, frontend, lattice, config.grid_size, config.quad, with_uncertainty=True)
    payload = {"members": labels, "p_prime": p_prime, "value": value, "uncertainty": uncertainty, "frontend": frontend}
    return payload, None, 0


def _characterize(config: RunConfig):
    lattice = build_lattice(config)
    family = build_family(config, lattice)
    result = characterization_constant(lattice, family, config.p, config.frontend, config.grid_size, config.quad, config.threads)
    return result.to_dict(), pd.DataFrame(result.rows, columns=ROW_COLUMNS), 0


def _validate_lattice(config: RunConfig):
    lattice = build_lattice(config)
    payload = {"density": check_density_condition(lattice, config.beta, config.side), "elements": len(lattice), "kind": lattice.kind}
    if lattice.kind == "su2-dual":
        payload["weyl"] = weyl_count_check(lattice)
    return payload, None, 0


HANDLERS = {
    "netnorm": _netnorm,
    "averaging-table": _averaging_table,
    "dirichlet": _dirichlet,
    "characterize": _characterize,
    "validate-lattice": _validate_lattice,
}


def _write(config: RunConfig, text: str, rows: Optional[pd.DataFrame]):
    if config.out_json:
        write_text(config.out_json, text)
    else:
        sys.stdout.write(text)
    if config.out_csv and rows is not None:
        write_csv(config.out_csv, rows)


def execute(config: RunConfig) -> int:
    """Run a validated configuration and write its artifacts; returns the exit code."""
    if config.command == "verify":
        report = run_campaign(config)
        rows = report.to_frame()
        _write(config, report.to_json(config.timings), rows)
        if report.status == "inconclusive":
            logger.warning(f"{len(report.inconclusive)} inconclusive items in {report.inequality}")
        return 1 if report.violations else 0
    payload, rows, code = HANDLERS[config.command](config)
    document = {"schema": SCHEMA, "command": config.command, "config": config.echo(), **payload}
    _write(config, dumps(document), rows)
    return code


def _configure_logging(level: str):
    # a no-op when the host application already configured the root logger
    logging.basicConfig(stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger("netspace").setLevel(level.upper())


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run the command and map errors to exit codes.

    Args:
        argv (list[str]): Arguments without the program name (defaults to sys.argv[1:]).

    Returns:
        int: 0 on success, 1 on verification failure, 2 on usage, configuration or domain errors.
    """
    try:
        args = vars(build_parser().parse_args(argv))
    except SystemExit as e:
        return int(e.code or 0)
    config_file = args.pop("config_file", None)
    if args.get("lattice_file") and args.get("lattice_kind") is None:
        args["lattice_kind"] = "file"
    try:
        file_values = load_config_file(config_file) if config_file else None
        config = resolve_config(args, file_values)
        _configure_logging(config.log_level)
        return execute(config)
    except NetSpaceError as e:
        _emit_error(type(e).__name__, str(e))
        return exit_code_for(e)
    except (OSError, json.JSONDecodeError) as e:
        _emit_error("ConfigError", f"Error reading input: {e}")
        return exit_code_for(ConfigError(str(e)))
    except ValueError as e:
        logger.error(f"Error running {args.get('command')}: {e}", exc_info=True)
        _emit_error("DomainError", str(e))
        return 2


def main():
    sys.exit(run())
