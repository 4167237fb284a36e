"""Command-line driver: every experiment as a validated, seeded subcommand.

    pmsim run EXPERIMENT [--config PATH] [--seed N] [--out PATH]
                         [--format json|csv] [--KEY VALUE ...]
    pmsim list

Parameters come from a JSON config file, overridden by ``--KEY VALUE`` pairs
(dotted keys reach nested fields, e.g. ``--schedule.T 25``).  Each
experiment's parameters are validated against its JSON schema before any
computation; validation failures exit with status 2 and name the offending
field, runtime failures exit 1.  Results are written atomically (temp file
plus rename) and identical (config, seed) pairs produce byte-identical
output files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from importlib import resources

import jsonschema
import numpy as np

from . import hilbert as hb
from .defaults import load_defaults
from .dynamics import Schedule, TimeDependentHamiltonian, adiabatic_gap, default_step_count
from .entropy import entanglement_growth, von_neumann_entropy
from .hilbert import DensityMatrix, Operator, PureState
from .mixtures import beam_merge_demo, despagnat_experiment, frequency_convergence
from .protective import (
    Apparatus,
    ProtectiveSetup,
    build_protection_hamiltonian,
    error_scaling_study,
    make_schedule,
    run_protective,
    synthetic_setup,
)
from .serialize import (
    beam_merge_to_json,
    complex_matrix_from_json,
    density_to_json,
    despagnat_report_to_json,
    entropy_report_to_json,
    frequency_table_to_json,
    measurement_record,
    tomogram_to_json,
)
from .tomography import hermitian_basis, tomograph_via_protective

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


class ConfigError(ValueError):
    """Invalid configuration; maps to exit status 2."""


def _load_schema(filename: str) -> dict:
    text = resources.files("pmsim.schemas").joinpath(filename).read_text(encoding="utf-8")
    return json.loads(text)


def _validate(instance: dict, schema_file: str) -> None:
    schema = _load_schema(schema_file)
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "$" + "".join(
            f".{p}" if isinstance(p, str) else f"[{p}]" for p in err.absolute_path
        )
        raise ConfigError(f"config invalid at {path}: {err.message}")


# ---------------------------------------------------------------------------
# parameter parsing helpers


def _parse_state(spec: dict) -> PureState:
    if "amplitudes" in spec:
        return PureState(np.array([complex(re, im) for re, im in spec["amplitudes"]]))
    return hb.pure_state_from_bloch(spec["bloch"])


_PAULI_BY_NAME = {"I": hb.identity(2), "X": hb.PAULI_X, "Y": hb.PAULI_Y, "Z": hb.PAULI_Z}


def _parse_observable(spec) -> tuple[Operator, str]:
    if isinstance(spec, str):
        return _PAULI_BY_NAME[spec], spec
    return Operator(complex_matrix_from_json(spec["matrix"])), "custom"


def _parse_apparatus(spec: dict | None, defaults: dict) -> Apparatus:
    spec = spec or {}
    return Apparatus(
        grid_points=spec.get("grid_points", defaults["grid_points"]),
        half_width=spec.get("half_width", defaults["half_width"]),
        sigma=spec.get("sigma", defaults["sigma"]),
        mass=spec.get("mass", defaults["mass"]),
    )


def _wrap_for(state_dim: int, observable: Operator) -> Operator:
    """Extend a subsystem observable with identity on the remaining factor."""
    if observable.dim == state_dim:
        return observable
    if state_dim % observable.dim:
        raise ConfigError(
            f"observable dimension {observable.dim} does not divide state dimension {state_dim}"
        )
    return hb.tensor(observable, hb.identity(state_dim // observable.dim))


def _build_setup(params: dict, defaults: dict) -> tuple[ProtectiveSetup, str, float]:
    """Protective setup shared by the protective and error-scaling experiments."""
    apparatus = _parse_apparatus(params.get("apparatus"), defaults)
    observable, label = _parse_observable(params["observable"])
    sched_params = params.get("schedule", {})
    envelope = sched_params.get("envelope", defaults["envelope"])
    steps = sched_params.get("steps")

    if "hamiltonian" in params:
        h0 = Operator(complex_matrix_from_json(params["hamiltonian"]["matrix"]))
        index = params["protected_index"]
        gap = adiabatic_gap(h0, index)
        _, vecs = hb.eig_hermitian(h0)
        state = PureState(vecs[:, index])
    else:
        state = _parse_state(params["state"])
        gap = params.get("gap", defaults["gap"])
        h0 = build_protection_hamiltonian(state, gap)

    observable = _wrap_for(state.dim, observable)
    total_time = sched_params.get("T", defaults["time_factor"] / gap)
    schedule = make_schedule(total_time, observable, h0, apparatus, envelope, steps)
    return ProtectiveSetup(h0, state, observable, schedule, apparatus), label, gap


# ---------------------------------------------------------------------------
# experiment runners: params, seed, defaults -> (result, (header, rows), summary)


def _run_protective(params, seed, defaults):
    setup, label, gap = _build_setup(params, defaults)
    exact = setup.exact_value()
    outcome = run_protective(setup)
    record = measurement_record(
        label, outcome.estimate, exact, setup.schedule.total_time, outcome.disturbance
    )
    record["gap"] = gap
    record["pointer_shift"] = outcome.pointer_shift
    header = ["observable_label", "estimate", "exact", "error", "T", "disturbance"]
    rows = [[record[k] for k in header]]
    summary = (
        f"estimate={outcome.estimate:.6f} exact={exact:.6f} error={record['error']:.3e}"
    )
    return record, (header, rows), summary


def _run_error_scaling(params, seed, defaults):
    build_params = {k: v for k, v in params.items() if k != "T_values"}
    envelope = build_params.pop("envelope", defaults["envelope"])
    build_params["schedule"] = {"T": params["T_values"][0], "envelope": envelope}
    setup, label, gap = _build_setup(build_params, defaults)
    rows = error_scaling_study(setup, params["T_values"])
    result = {
        "observable_label": label,
        "gap": gap,
        "exact": setup.exact_value(),
        "rows": [
            {"T": t, "error": err, "disturbance": dist} for t, err, dist in rows
        ],
    }
    table = [[t, err, dist] for t, err, dist in rows]
    summary = f"{len(rows)} durations, error {rows[0][1]:.3e} -> {rows[-1][1]:.3e}"
    return result, (["T", "error", "disturbance"], table), summary


def _run_tomography(params, seed, defaults):
    state = _parse_state(params["state"])
    sub_dim = params.get("subsystem_dim", state.dim)
    if state.dim % sub_dim:
        raise ConfigError(
            f"subsystem_dim {sub_dim} does not divide state dimension {state.dim}"
        )
    gap = params.get("gap", defaults["gap"])
    apparatus = _parse_apparatus(params.get("apparatus"), defaults)
    sched_params = params.get("schedule", {})
    total_time = sched_params.get("T", defaults["time_factor"] / gap)
    envelope = sched_params.get("envelope", defaults["envelope"])
    steps = sched_params.get("steps")
    basis = hermitian_basis(sub_dim)

    def factory(observable):
        return synthetic_setup(
            state,
            _wrap_for(state.dim, observable),
            gap=gap,
            time_factor=total_time * gap,
            apparatus=apparatus,
            envelope=envelope,
            steps=steps,
        )

    tomogram, rho = tomograph_via_protective(factory, basis)
    if sub_dim == state.dim:
        exact = state.density_matrix()
    else:
        exact = hb.partial_trace(
            state.density_matrix(), (sub_dim, state.dim // sub_dim), keep=1
        )
    distance = hb.trace_distance(rho, exact)
    result = {
        "tomogram": tomogram_to_json(tomogram),
        "reconstruction": density_to_json(rho),
        "exact": density_to_json(exact),
        "trace_distance": distance,
    }
    rows = [[label, value] for label, value in tomogram.entries]
    summary = f"{len(rows)} observables, trace distance to exact {distance:.3e}"
    return result, (["label", "value"], rows), summary


def _run_entropy(params, seed, defaults):
    if params["mode"] == "report":
        rho = DensityMatrix(complex_matrix_from_json(params["rho"]))
        report = von_neumann_entropy(rho)
        result = entropy_report_to_json(report)
        rows = [
            ["S_nats", report.value],
            ["S_bits", report.bits],
            ["purity", report.purity],
        ]
        return result, (["quantity", "value"], rows), f"S={report.value:.6f} nats"

    static = Operator(complex_matrix_from_json(params["static"]))
    if "coupling" in params:
        coupling = Operator(complex_matrix_from_json(params["coupling"]))
    else:
        coupling = Operator(np.zeros((static.dim, static.dim)))
    sched_params = params["schedule"]
    steps = sched_params.get("steps")
    if steps is None:
        trial = Schedule(sched_params["T"], 64, sched_params.get("envelope", "constant"))
        hnorm = static.spectral_norm() + trial.g_max() * coupling.spectral_norm()
        steps = default_step_count(sched_params["T"], hnorm)
    schedule = Schedule(sched_params["T"], steps, sched_params.get("envelope", "constant"))
    h = TimeDependentHamiltonian(static, coupling, schedule)
    psi0 = _parse_state(params["psi0"])
    rows = entanglement_growth(h, psi0, tuple(params["dims"]), params["times"])
    result = {"rows": [{"t": t, "S_nats": s} for t, s in rows]}
    table = [[t, s] for t, s in rows]
    summary = f"{len(rows)} samples, max S = {max(s for _, s in rows):.6f} nats"
    return result, (["t", "S_nats"], table), summary


def _run_ensemble(params, seed, defaults):
    report = despagnat_experiment(params["N"], params["trials"], seed)
    include = params.get("include_trials", False)
    result = despagnat_report_to_json(report, include_trials=include)
    if include:
        header = ["preparation", "trial", "total_spin_z"]
        rows = [
            [stats.label, i, int(v)]
            for stats in (report.z_prepared, report.x_prepared)
            for i, v in enumerate(stats.totals)
        ]
    else:
        header = ["preparation", "empirical_mean", "empirical_std", "analytic_mean", "analytic_std"]
        rows = [
            [s.label, s.empirical_mean, s.empirical_std, s.analytic_mean, s.analytic_std]
            for s in (report.z_prepared, report.x_prepared)
        ]
    summary = (
        f"std(z)={report.z_prepared.empirical_std:.3f} "
        f"std(x)={report.x_prepared.empirical_std:.3f} "
        f"(analytic {report.x_prepared.analytic_std:.3f})"
    )
    return result, (header, rows), summary


def _run_beam_merge(params, seed, defaults):
    result = beam_merge_demo()
    payload = beam_merge_to_json(result)
    rows = [
        ["full", result.full_trace_distance],
        ["spin", result.spin_trace_distance],
        ["path", result.path_trace_distance],
    ]
    summary = (
        f"trace distance full={result.full_trace_distance:.6f} "
        f"spin={result.spin_trace_distance:.2e}"
    )
    return payload, (["comparison", "trace_distance"], rows), summary


def _run_frequency(params, seed, defaults):
    table = frequency_convergence(
        params["weights"], params["N_ladder"], params["n_draws"], seed
    )
    result = frequency_table_to_json(table)
    rows = [[row.total, row.distance] for row in table.rows]
    summary = f"distance {table.rows[0].distance:.3e} -> {table.rows[-1].distance:.3e}"
    return result, (["N", "distance"], rows), summary


class Experiment:
    def __init__(self, description, schema_file, required, runner):
        self.description = description
        self.schema_file = schema_file
        self.required = required
        self.runner = runner


EXPERIMENTS = {
    "protective": Experiment(
        "adiabatic pointer measurement of one observable on a protected state",
        "protective.json",
        "observable; state|hamiltonian+protected_index",
        _run_protective,
    ),
    "tomography": Experiment(
        "reconstruct a density matrix from protective runs on a single system",
        "tomography.json",
        "state",
        _run_tomography,
    ),
    "entropy": Experiment(
        "entropy report for a density matrix, or subsystem entropy growth",
        "entropy.json",
        "mode (+rho | +static,schedule,psi0,dims,times)",
        _run_entropy,
    ),
    "ensemble": Experiment(
        "total-spin fluctuations of the z- and x-prepared unpolarized pairs",
        "ensemble.json",
        "N, trials",
        _run_ensemble,
    ),
    "beam-merge": Experiment(
        "recombined-beam toy: identical spin reductions, distinct full states",
        "beam_merge.json",
        "(none)",
        _run_beam_merge,
    ),
    "error-scaling": Experiment(
        "measurement error and disturbance versus measurement duration",
        "error_scaling.json",
        "observable, T_values; state|hamiltonian+protected_index",
        _run_error_scaling,
    ),
    "frequency": Experiment(
        "memory decay of finite collections along a growing-N ladder",
        "frequency.json",
        "weights, N_ladder, n_draws",
        _run_frequency,
    ),
}


def list_experiments() -> str:
    """Stable text table: name, schema file, required parameters, description."""
    lines = []
    name_w = max(len(n) for n in EXPERIMENTS)
    schema_w = max(len(e.schema_file) for e in EXPERIMENTS.values())
    for name, exp in EXPERIMENTS.items():
        lines.append(
            f"{name:<{name_w}}  {exp.schema_file:<{schema_w}}  "
            f"required: {exp.required}\n"
            f"{'':<{name_w}}  {'':<{schema_w}}  {exp.description}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# argument handling and output


def _set_dotted(params: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = params
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot override non-object field {dotted!r}")
    node[keys[-1]] = value


def _parse_overrides(extras: list[str]) -> dict:
    """--KEY VALUE pairs parsed into (possibly nested) parameter overrides."""
    overrides: dict = {}
    i = 0
    while i < len(extras):
        token = extras[i]
        if not token.startswith("--") or len(token) == 2:
            raise ConfigError(f"unexpected argument {token!r}; expected --KEY VALUE")
        if i + 1 >= len(extras):
            raise ConfigError(f"missing value for override {token!r}")
        raw = extras[i + 1]
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        _set_dotted(overrides, token[2:], value)
        i += 2
    return overrides


def _deep_update(base: dict, extra: dict) -> dict:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value
    return base


def _format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _render_csv(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    return buffer.getvalue()


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pmsim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmsim", description="protective-measurement experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("experiment", nargs="?", help="experiment name (see `pmsim list`)")
    run.add_argument("--config", help="JSON config file")
    run.add_argument("--seed", type=int, help="seed for stochastic experiments")
    run.add_argument("--out", help="output file path")
    run.add_argument("--format", choices=["json", "csv"], dest="fmt", help="output format")
    sub.add_parser("list", help="list experiments and their config schemas")
    return parser


def _run_command(args, extras) -> int:
    config = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
        _validate(config, "runconfig.json")

    experiment = args.experiment or config.get("experiment")
    if experiment is None:
        raise ConfigError("no experiment given (positional argument or config)")
    if experiment not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {experiment!r}; known: {', '.join(EXPERIMENTS)}"
        )
    if args.experiment and config.get("experiment") and args.experiment != config["experiment"]:
        raise ConfigError(
            f"experiment {args.experiment!r} conflicts with config {config['experiment']!r}"
        )

    params = _deep_update(dict(config.get("parameters", {})), _parse_overrides(extras))
    seed = args.seed if args.seed is not None else config.get("seed", 0)
    spec = EXPERIMENTS[experiment]
    _validate(params, spec.schema_file)

    defaults = load_defaults()
    result, (header, rows), summary = spec.runner(params, seed, defaults)

    fmt = args.fmt or config.get("output_format", "json")
    out_path = args.out or config.get("output_path") or f"pmsim_{experiment}.{fmt}"
    if fmt == "json":
        envelope = {
            "version": 1,
            "experiment": experiment,
            "seed": seed,
            "parameters": params,
            "result": result,
        }
        text = json.dumps(envelope, indent=2, sort_keys=True) + "\n"
    else:
        text = _render_csv(header, rows)
    _atomic_write(out_path, text)
    print(f"{experiment}: {summary} -> {out_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args, extras = parser.parse_known_args(argv)
    if args.command == "list":
        if extras:
            print(f"error: unexpected arguments {extras}", file=sys.stderr)
            return EXIT_VALIDATION
        print(list_experiments())
        return EXIT_OK
    try:
        return _run_command(args, extras)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # runtime failures from the library
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
