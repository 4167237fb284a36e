"""JSON and CSV converters for the library's value types.

Complex matrices serialize as row-major nested lists of [re, im] pairs;
state vectors as flat lists of [re, im] pairs.  All converters are pure and
deterministic, so identical inputs produce identical bytes downstream.
"""

from __future__ import annotations

import csv

import numpy as np

from .entropy import EntropyReport
from .hilbert import DensityMatrix, Operator, PureState
from .mixtures import BeamMergeResult, DespagnatReport, FrequencyTable
from .tomography import Tomogram


def complex_matrix_to_json(matrix) -> list:
    m = np.asarray(matrix, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def complex_matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data])


def state_to_json(state: PureState) -> list:
    return [[float(z.real), float(z.imag)] for z in state.amplitudes]


def state_from_json(data) -> PureState:
    return PureState(np.array([complex(re, im) for re, im in data]))


def density_to_json(rho: DensityMatrix) -> list:
    return complex_matrix_to_json(rho.entries)


def operator_from_json(data) -> Operator:
    return Operator(complex_matrix_from_json(data))


def tomogram_to_json(tomogram: Tomogram) -> dict:
    return {
        "dim": tomogram.dim,
        "entries": [{"label": k, "value": v} for k, v in tomogram.entries],
        "source": tomogram.source,
    }


def tomogram_from_json(data) -> Tomogram:
    return Tomogram(
        tuple((e["label"], e["value"]) for e in data["entries"]),
        source=data["source"],
        dim=data.get("dim"),
    )


def entropy_report_to_json(report: EntropyReport) -> dict:
    return {
        "S_nats": report.value,
        "S_bits": report.bits,
        "spectrum": [float(x) for x in report.spectrum],
        "purity": report.purity,
    }


def measurement_record(label: str, estimate: float, exact: float, total_time: float, disturbance: float) -> dict:
    return {
        "observable_label": label,
        "estimate": estimate,
        "exact": exact,
        "error": abs(estimate - exact),
        "T": total_time,
        "disturbance": disturbance,
    }


def despagnat_report_to_json(report: DespagnatReport, include_trials: bool = False) -> dict:
    def prep(stats):
        out = {
            "empirical_mean": stats.empirical_mean,
            "empirical_std": stats.empirical_std,
            "analytic_mean": stats.analytic_mean,
            "analytic_std": stats.analytic_std,
        }
        if include_trials:
            out["totals"] = [int(t) for t in stats.totals]
        return out

    return {
        "N": report.n_members,
        "trials": report.trials,
        "seed": report.seed,
        "z_prepared": prep(report.z_prepared),
        "x_prepared": prep(report.x_prepared),
        "shared_density_matrix": density_to_json(report.shared_density_matrix),
    }


def beam_merge_to_json(result: BeamMergeResult) -> dict:
    return {
        "rho_full_A": density_to_json(result.rho_full_a),
        "rho_full_B": density_to_json(result.rho_full_b),
        "rho_spin_A": density_to_json(result.rho_spin_a),
        "rho_spin_B": density_to_json(result.rho_spin_b),
        "rho_path_A": density_to_json(result.rho_path_a),
        "rho_path_B": density_to_json(result.rho_path_b),
        "trace_distances": {
            "full": result.full_trace_distance,
            "spin": result.spin_trace_distance,
            "path": result.path_trace_distance,
        },
    }


def frequency_table_to_json(table: FrequencyTable) -> dict:
    return {
        "weights": list(table.weights),
        "n_draws": table.n_draws,
        "seed": table.seed,
        "rows": [
            {"N": row.total, "counts": list(row.counts), "distance": row.distance}
            for row in table.rows
        ],
    }


def trajectory_to_csv(trajectory, stream) -> None:
    """Write a propagation trajectory: column t, then re/im pairs per amplitude."""
    writer = csv.writer(stream)
    dim = trajectory[0][1].dim
    header = ["t"]
    for i in range(dim):
        header += [f"re_{i}", f"im_{i}"]
    writer.writerow(header)
    for t, state in trajectory:
        row = [repr(float(t))]
        for z in state.amplitudes:
            row += [repr(float(z.real)), repr(float(z.imag))]
        writer.writerow(row)


def error_scaling_to_csv(rows, stream) -> None:
    """Write (T, error, disturbance) ladder rows."""
    writer = csv.writer(stream)
    writer.writerow(["T", "error", "disturbance"])
    for total_time, error, disturbance in rows:
        writer.writerow([repr(float(total_time)), repr(float(error)), repr(float(disturbance))])
