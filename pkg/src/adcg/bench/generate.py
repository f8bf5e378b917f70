"""Synthetic dataset generators.

Each generator writes CSV data files, a ground-truth file where the family
has one, a ready-to-run experiment config (config.json) and a metadata
file recording the planted parameters. Everything is deterministic in the
seed, so acceptance runs need no external data.
"""

from __future__ import annotations

import json
import os

import numpy as np

from ..models import LTIModel, SuperresModel

__all__ = ["generate_twosource", "generate_lowrank", "generate_lti", "generate"]


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) if isinstance(v, float) else str(v) for v in row) + "\n")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def generate_twosource(out_dir, seed=0, n_frames=50, grid=64, pixel_size=100.0,
                       sigma_px=1.0, separation_px=1.5, snr_db=20.0):
    """Frames with two nearby point sources and Gaussian pixel noise.

    Each frame places a source pair of separation ``separation_px`` at a
    random orientation near the image center, with intensities around 1.
    The noise level is set from the clean image RMS and ``snr_db``.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    sigma = sigma_px * pixel_size
    model = SuperresModel(grid, grid, pixel_size=pixel_size, sigma=sigma)
    center = 0.5 * grid * pixel_size
    half_sep = 0.5 * separation_px * pixel_size

    frame_rows = []
    truth_rows = []
    for f in range(n_frames):
        mid = center + rng.uniform(-2.0, 2.0, size=2) * pixel_size
        angle = rng.uniform(0.0, np.pi)
        offset = half_sep * np.array([np.cos(angle), np.sin(angle)])
        positions = np.array([mid + offset, mid - offset])
        intensities = rng.uniform(0.8, 1.2, size=2)
        clean = sum(w * model.psi(pos) for w, pos in zip(intensities, positions))
        noise_std = np.sqrt(np.mean(clean**2)) / (10.0 ** (snr_db / 20.0))
        image = clean + rng.normal(0.0, noise_std, size=model.d)
        for iy in range(grid):
            frame_rows.append([f] + [float(v) for v in image[iy * grid:(iy + 1) * grid]])
        for w, pos in zip(intensities, positions):
            truth_rows.append([f, float(pos[0]), float(pos[1]), float(w)])

    frames_path = os.path.join(out_dir, "frames.csv")
    truth_path = os.path.join(out_dir, "truth.csv")
    _write_csv(frames_path, ["frame"] + [f"c{i}" for i in range(grid)], frame_rows)
    _write_csv(truth_path, ["frame", "x_nm", "y_nm", "intensity"], truth_rows)

    config = {
        "problem": "superres",
        "model": {"grid_w": grid, "grid_h": grid, "pixel_size": pixel_size, "sigma": sigma},
        "solver": {
            "variant": "adcg",
            "tau": 10.0,
            "max_outer_iters": 10,
            "gap_tolerance": 1e-5,
            "stagewise": True,
        },
        "inputs": {"frames": "frames.csv", "ground_truth": "truth.csv"},
        "output_dir": "results",
        "workers": 1,
        "seed": seed,
        "metrics": {"radii_nm": [0.2 * pixel_size, 0.5 * pixel_size, 1.0 * pixel_size]},
    }
    _write_json(os.path.join(out_dir, "config.json"), config)
    _write_json(
        os.path.join(out_dir, "metadata.json"),
        {
            "kind": "twosource",
            "seed": seed,
            "n_frames": n_frames,
            "grid": grid,
            "pixel_size": pixel_size,
            "sigma_nm": sigma,
            "separation_px": separation_px,
            "snr_db": snr_db,
        },
    )
    return {"frames": frames_path, "truth": truth_path,
            "config": os.path.join(out_dir, "config.json")}


def generate_lowrank(out_dir, seed=0, n_rows=50, n_cols=40, rank=3,
                     train_frac=0.3, test_frac=0.1, mean_rating=3.0):
    """Planted low-rank ratings matrix with disjoint train/test samples.

    The planted matrix is ``mean_rating`` plus a rank-``rank`` perturbation
    scaled to keep every entry inside (1, 5), so the clamped prediction
    rule is exact on it. The config's tau is the nuclear norm of the
    centered matrix (the planted total mass), recorded in the metadata.
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    U = np.linalg.qr(rng.standard_normal((n_rows, rank)))[0]
    V = np.linalg.qr(rng.standard_normal((n_cols, rank)))[0]
    svals = np.linspace(1.0, 0.5, rank)
    A = U @ np.diag(svals) @ V.T
    A *= 1.6 / np.max(np.abs(A))  # entries of mean + A stay within (1, 5)
    full = mean_rating + A

    n_entries = n_rows * n_cols
    order = rng.permutation(n_entries)
    n_train = int(round(train_frac * n_entries))
    n_test = int(round(test_frac * n_entries))
    train_idx = order[:n_train]
    test_idx = order[n_train:n_train + n_test]

    def triples(idx):
        rows, cols = np.divmod(idx, n_cols)
        return [[int(i), int(j), float(full[i, j])] for i, j in zip(rows, cols)]

    train_rows = triples(train_idx)
    test_rows = triples(test_idx)
    train_mean = float(np.mean([t[2] for t in train_rows]))
    centered = full - train_mean
    tau = float(np.sum(np.linalg.svd(centered, compute_uv=False)))

    train_path = os.path.join(out_dir, "train.csv")
    test_path = os.path.join(out_dir, "test.csv")
    _write_csv(train_path, ["user", "item", "rating"], train_rows)
    _write_csv(test_path, ["user", "item", "rating"], test_rows)

    config = {
        "problem": "matcomp",
        "model": {"n_rows": n_rows, "n_cols": n_cols},
        "solver": {
            "variant": "adcg",
            "tau": tau,
            "max_outer_iters": 25,
            "gap_tolerance": 1e-8,
        },
        "inputs": {"train": "train.csv", "test": "test.csv"},
        "output_dir": "results",
        "workers": 1,
        "seed": seed,
    }
    _write_json(os.path.join(out_dir, "config.json"), config)
    _write_json(
        os.path.join(out_dir, "metadata.json"),
        {
            "kind": "lowrank",
            "seed": seed,
            "shape": [n_rows, n_cols],
            "rank": rank,
            "singular_values": [float(s) for s in np.linalg.svd(A, compute_uv=False)[:rank]],
            "train_mean": train_mean,
            "nuclear_norm_centered": tau,
        },
    )
    return {"train": train_path, "test": test_path,
            "config": os.path.join(out_dir, "config.json")}


def generate_lti(out_dir, seed=0, T=400, train_split=300, n_modes=2):
    """White-noise input driving a planted mixture of two-state modes."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(T)
    model = LTIModel(u)
    atoms = []
    rs = np.linspace(0.8, 0.95, n_modes)
    alphas = np.linspace(0.4, 1.1, n_modes)
    for i in range(n_modes):
        x0 = rng.uniform(-0.5, 0.5, size=2)
        B = rng.uniform(-1.0, 1.0, size=2)
        atoms.append(np.array([x0[0], x0[1], rs[i], alphas[i], B[0], B[1]]))
    weights = rng.uniform(0.8, 1.5, size=n_modes)
    y = sum(w * model.psi(th) for w, th in zip(weights, atoms))

    io_path = os.path.join(out_dir, "io.csv")
    _write_csv(io_path, ["u", "y"], [[float(a), float(b)] for a, b in zip(u, y)])

    tau = float(np.sum(weights))
    config = {
        "problem": "sysid",
        "model": {"r_grid": 50, "alpha_grid": 50},
        "solver": {
            "variant": "adcg",
            "tau": 1.5 * tau,
            "max_outer_iters": 10,
            "gap_tolerance": 1e-8,
        },
        "inputs": {"io": "io.csv", "train_split": train_split},
        "output_dir": "results",
        "workers": 1,
        "seed": seed,
    }
    _write_json(os.path.join(out_dir, "config.json"), config)
    _write_json(
        os.path.join(out_dir, "metadata.json"),
        {
            "kind": "lti",
            "seed": seed,
            "T": T,
            "train_split": train_split,
            "weights": [float(w) for w in weights],
            "atoms": [[float(v) for v in th] for th in atoms],
            "total_mass": tau,
        },
    )
    return {"io": io_path, "config": os.path.join(out_dir, "config.json")}


def generate(kind, out_dir, seed=0, **kwargs):
    """Dispatch by dataset kind: twosource | lowrank | lti."""
    makers = {"twosource": generate_twosource, "lowrank": generate_lowrank, "lti": generate_lti}
    if kind not in makers:
        raise ValueError(f"unknown dataset kind {kind!r}; expected one of {sorted(makers)}")
    return makers[kind](out_dir, seed=seed, **kwargs)
