"""Factorial generalization study of a trained surrogate.

The factorial test set solves every combination of initial-condition group
k1 with conditioning group k2, which lets prediction error be decomposed
by input mechanism.  Errors use a scale-normalized Huber loss: residuals
are divided by the RMS magnitude of the target field,

    s(X) = ||X||_2 / sqrt(C*H*W),    R_n = (prediction - X_M) / (s(X_M) + eps),

making scores comparable across samples of different overall density.  The
study produces the error matrix E[k1, k2], per-group distributions with
Tukey outlier fencing, a worst-to-best ranking of conditioning vectors,
and Pearson/Spearman correlations between each conditioning dimension and
the per-group mean error.
"""

from __future__ import annotations

import argparse
import csv

import numpy as np
from scipy import stats

from .data import CdrReader

EPS = 1e-8


def rms(field: np.ndarray) -> float:
    return float(np.sqrt(np.mean(np.square(field, dtype=np.float64))))


def normalized_residual(
    pred: np.ndarray, target: np.ndarray, eps: float = EPS
) -> np.ndarray:
    """Residual divided by the target's RMS magnitude (dimensionless)."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return (np.asarray(pred, dtype=np.float64) - target) / (rms(target) + eps)


def huber_mean(residual: np.ndarray, delta: float = 1.0) -> float:
    """Mean pixel-wise Huber penalty of a residual field."""
    a = np.abs(np.asarray(residual, dtype=np.float64))
    quad = 0.5 * a * a
    lin = delta * (a - 0.5 * delta)
    return float(np.mean(np.where(a <= delta, quad, lin)))


def normalized_huber(pred: np.ndarray, target: np.ndarray, delta: float = 1.0) -> float:
    return huber_mean(normalized_residual(pred, target), delta)


def build_error_matrix(predict, reader: CdrReader, batch_size: int = 16) -> np.ndarray:
    """E[k1, k2] = normalized Huber loss of the (k1, k2) prediction.

    ``predict`` maps (X0 batch (B, m, m), c batch (B, 4)) to predictions of
    the same field shape (numpy in, numpy out).  Records are keyed by their
    stored factorial indices, so file order is irrelevant.
    """
    n_ic, n_c = reader.factorial_shape()
    matrix = np.full((n_ic, n_c), np.nan)
    order = list(range(len(reader)))
    for start in range(0, len(order), batch_size):
        chunk = order[start : start + batch_size]
        fields = [reader.read(k) for k in chunk]
        x0 = np.stack([f[0] for f in fields])
        xm = np.stack([f[1] for f in fields])
        c = np.stack([f[2] for f in fields])
        pred = predict(x0, c)
        for row, k in enumerate(chunk):
            k1, k2 = reader.factorial_index(k)
            matrix[k1, k2] = normalized_huber(pred[row], xm[row])
    if np.isnan(matrix).any():
        missing = np.argwhere(np.isnan(matrix))[0]
        raise ValueError(f"factorial cell ({missing[0]}, {missing[1]}) missing")
    return matrix


def torch_predictor(model):
    """Adapt a trained ConditionedUNet to the numpy predict interface."""
    import torch

    @torch.no_grad()
    def predict(x0: np.ndarray, c: np.ndarray) -> np.ndarray:
        model.eval()
        out = model(
            torch.from_numpy(np.ascontiguousarray(x0, dtype=np.float32)).unsqueeze(1),
            torch.from_numpy(np.ascontiguousarray(c, dtype=np.float32)),
        )
        return out.squeeze(1).numpy()

    return predict


# ---------------------------------------------------------------------------
# grouped statistics and rankings
# ---------------------------------------------------------------------------


def tukey_filter(values: np.ndarray) -> tuple[np.ndarray, int]:
    """Drop values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]; returns (kept, n_out)."""
    q1, q3 = np.percentile(values, [25.0, 75.0])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    kept = values[(values >= lo) & (values <= hi)]
    return kept, values.size - kept.size


def _group_rows(matrix: np.ndarray, axis: int) -> list[dict]:
    rows = []
    n = matrix.shape[axis]
    for k in range(n):
        values = matrix[k, :] if axis == 0 else matrix[:, k]
        kept, n_outliers = tukey_filter(values)
        q1, q3 = np.percentile(values, [25.0, 75.0])
        rows.append(
            {
                "group": k,
                "mean": float(values.mean()),
                "filtered_mean": float(kept.mean()) if kept.size else float("nan"),
                "median": float(np.median(values)),
                "q1": float(q1),
                "q3": float(q3),
                "n_outliers": int(n_outliers),
            }
        )
    rows.sort(key=lambda r: r["mean"])
    return rows


def grouped_stats(matrix: np.ndarray) -> dict[str, list[dict]]:
    """Per-IC-group and per-conditioning-group distributions, sorted by mean."""
    return {
        "by_ic": _group_rows(matrix, axis=0),
        "by_conditioning": _group_rows(matrix, axis=1),
    }


def rank_conditionings(matrix: np.ndarray, c_list: np.ndarray) -> list[dict]:
    """Conditioning groups ordered worst to best by mean normalized Huber.

    Rank 1 marks the smallest mean error; ties break on the group index.
    """
    c_list = np.asarray(c_list)
    n_c = matrix.shape[1]
    if c_list.shape != (n_c, 4):
        raise ValueError(f"need one 4-vector per conditioning group, got {c_list.shape}")
    means = matrix.mean(axis=0)
    order = sorted(range(n_c), key=lambda k: (means[k], k), reverse=True)
    rows = []
    for pos, k in enumerate(order):
        rows.append(
            {
                "rank": n_c - pos,
                "k2": k,
                "c1": float(c_list[k, 0]),
                "c2": float(c_list[k, 1]),
                "c3": float(c_list[k, 2]),
                "c4": float(c_list[k, 3]),
                "mean_nhuber": float(means[k]),
            }
        )
    return rows


def correlations(matrix: np.ndarray, c_list: np.ndarray) -> list[dict]:
    """Pearson r and Spearman rho between c dimensions and per-group means.

    Zero-variance inputs are reported as undefined (NaN) rather than raising.
    """
    c_list = np.asarray(c_list, dtype=np.float64)
    means = matrix.mean(axis=0)
    rows = []
    for dim in range(4):
        x = c_list[:, dim]
        if np.ptp(x) == 0.0 or np.ptp(means) == 0.0:
            r = rho = float("nan")
        else:
            r = float(stats.pearsonr(x, means).statistic)
            rho = float(stats.spearmanr(x, means).statistic)
        rows.append({"dim": dim + 1, "pearson_r": r, "spearman_rho": rho})
    return rows


# ---------------------------------------------------------------------------
# CSV outputs
# ---------------------------------------------------------------------------


def _write_rows(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def write_study(out_dir, matrix: np.ndarray, c_list: np.ndarray) -> None:
    """error_matrix.csv, grouped_stats.csv, rankings.csv, correlations.csv."""
    import pathlib

    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "error_matrix.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["k1"] + [f"k2_{j}" for j in range(matrix.shape[1])])
        for i, row in enumerate(matrix):
            writer.writerow([i] + [repr(float(v)) for v in row])

    groups = grouped_stats(matrix)
    rows = [dict(kind="ic", **r) for r in groups["by_ic"]]
    rows += [dict(kind="conditioning", **r) for r in groups["by_conditioning"]]
    _write_rows(out / "grouped_stats.csv", rows)

    # mean-sorted axis orderings for heatmap rendering (log scaling and
    # drawing are left to the plotting tool)
    order_rows = [
        {"axis": "k1", "position": pos, "group": r["group"]}
        for pos, r in enumerate(groups["by_ic"])
    ] + [
        {"axis": "k2", "position": pos, "group": r["group"]}
        for pos, r in enumerate(groups["by_conditioning"])
    ]
    _write_rows(out / "orderings.csv", order_rows)
    _write_rows(out / "rankings.csv", rank_conditionings(matrix, c_list))
    _write_rows(out / "correlations.csv", correlations(matrix, c_list))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Factorial generalization study of a trained surrogate"
    )
    parser.add_argument("--data", required=True, help="factorial test set (.cdr)")
    parser.add_argument("--checkpoint", required=True, help="model checkpoint (.pt)")
    parser.add_argument("--out", required=True, help="output directory for CSVs")
    args = parser.parse_args(argv)

    from .training import load_checkpoint

    reader = CdrReader(args.data)
    model = load_checkpoint(args.checkpoint)
    matrix = build_error_matrix(torch_predictor(model), reader)
    n_ic, n_c = reader.factorial_shape()
    c_by_group = np.zeros((n_c, 4))
    for k in range(len(reader)):
        _, k2 = reader.factorial_index(k)
        c_by_group[k2] = reader.records[k]["c"]
    write_study(args.out, matrix, c_by_group)
    print(f"study written to {args.out}")
    return 0
