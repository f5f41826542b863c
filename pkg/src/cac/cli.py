"""Command-line entry point for the clustering pipeline.

Subcommands: ``cluster`` (batch active-clustering run with a truth or
replay oracle), ``kernel`` (density / kernel-matrix grid dumps for
external plotting), ``baseline`` (localized-kernel vs Gaussian-KDE
support indicators side by side), and ``serve`` (interactive run behind
the HTTP labeling protocol).

All flags are long-form and subcommand-scoped.  A JSON config file
(``--config``) supplies defaults; explicit flags override it.  Exit
codes: 0 ok, 2 config, 3 data, 4 budget, 5 protocol.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .active import BudgetExhausted, ReplayOracle, Schedule, TruthOracle, run
from .data import (FIGURE_NAMES, Dataset, gen_ball_line, gen_figure_suite,
                   gen_two_moons, load_csv, pca_fit_transform,
                   save_assignments, standardize)
from .density import density_field, gaussian_kde_baseline, support_set
from .errors import ConfigError, DataError, KernelSizeError, ProtocolError
from .filters import FilterH
from .hermite import KernelConfig, kernel_matrix, phi_rows

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_BUDGET = 4
EXIT_PROTOCOL = 5

GENERATOR_NAMES = ("two_moons", "ball_line") + FIGURE_NAMES

_FMT = "%.17g"


@dataclasses.dataclass
class RunConfig:
    """Resolved parameters for one CLI invocation.

    Dataset spec (generator name or file path), kernel and schedule
    fields, oracle mode, and output directory; extras (grid bounds,
    bandwidth, port) only apply to the subcommand that declares them.
    """
    dataset: Optional[str] = None
    data_file: Optional[str] = None
    m: int = 1000
    noise: float = 0.05
    delta: float = 0.2
    seed: int = 0
    has_labels: str = "auto"
    pca_dim: Optional[int] = None
    standardize: bool = False
    out_dir: str = "out"
    # kernel configuration
    sigma: float = 1.0
    filter_gain: float = 0.15
    loc_exponent: float = 4.0
    # schedule
    n_start: float = 4.0
    n_max: float = 8.0
    step: float = 1.0
    theta_init: float = 0.1
    tau: float = 1.3
    eta_constant: Optional[float] = None
    max_escalations: int = 20
    query_budget: Optional[int] = None
    oracle: str = "truth"
    # kernel / baseline extras
    n: float = 6.0
    theta: float = 0.25
    bandwidth: float = 0.25
    grid_min: Optional[list] = None
    grid_max: Optional[list] = None
    grid_steps: int = 50
    matrix: bool = False
    # serve extras
    port: int = 8000
    exit_when_done: bool = False

    def validate(self) -> None:
        if self.dataset is not None and self.data_file is not None:
            raise ConfigError("give either --dataset or --data-file, not both")
        if self.dataset is None and self.data_file is None:
            raise ConfigError("a dataset is required: --dataset or --data-file")
        if self.dataset is not None and self.dataset not in GENERATOR_NAMES:
            raise ConfigError(
                f"unknown dataset {self.dataset!r}; choose from {GENERATOR_NAMES}")
        if self.data_file is not None and not Path(self.data_file).exists():
            raise ConfigError(f"dataset file not found: {self.data_file}")
        if self.m < 1:
            raise ConfigError("--m must be positive")
        if self.has_labels not in ("auto", "yes", "no"):
            raise ConfigError("--has-labels must be auto, yes or no")
        if self.pca_dim is not None and self.pca_dim < 1:
            raise ConfigError("--pca-dim must be positive")
        mode = self.oracle.split(":", 1)[0]
        if mode not in ("truth", "replay"):
            raise ConfigError(
                f"unknown oracle mode {self.oracle!r}; use truth or replay:PATH")
        if mode == "replay":
            if ":" not in self.oracle:
                raise ConfigError("replay oracle needs a path: replay:PATH")
            path = self.oracle.split(":", 1)[1]
            if not Path(path).exists():
                raise ConfigError(f"replay file not found: {path}")
        if self.grid_steps < 2:
            raise ConfigError("--grid-steps must be at least 2")

    def resolve_dataset(self) -> Dataset:
        if self.data_file is not None:
            flag = {"auto": None, "yes": True, "no": False}[self.has_labels]
            return load_csv(self.data_file, has_labels=flag)
        if self.dataset == "two_moons":
            return gen_two_moons(self.m, self.noise, self.seed)
        if self.dataset == "ball_line":
            return gen_ball_line(self.m, self.delta, self.seed)
        return gen_figure_suite(self.dataset, self.m, self.seed)

    def prepare_points(self, ds: Dataset, n: float):
        """Optional PCA then optional rescale into the kernel's domain."""
        pts = ds.points
        if self.pca_dim is not None:
            _, pts = pca_fit_transform(pts, self.pca_dim)
        config = self.kernel_config(pts.shape[1], n)
        if self.standardize:
            pts, _ = standardize(pts, config)
        return pts, config

    def kernel_config(self, q: int, n: float) -> KernelConfig:
        return KernelConfig(n=n, q=q, sigma=self.sigma,
                            filter=FilterH(self.filter_gain),
                            loc_exponent=self.loc_exponent)

    def schedule(self) -> Schedule:
        return Schedule(n_start=self.n_start, n_max=self.n_max,
                        step=self.step, theta_init=self.theta_init,
                        tau=self.tau, eta_constant=self.eta_constant,
                        max_escalations_per_level=self.max_escalations,
                        query_budget=self.query_budget)

    def make_oracle(self, truth):
        if self.oracle == "truth":
            if truth is None:
                raise ConfigError(
                    "truth oracle requires labeled data; use replay:PATH")
            return TruthOracle(truth, budget=self.query_budget)
        path = self.oracle.split(":", 1)[1]
        return ReplayOracle.from_file(path, budget=self.query_budget)


# ---------------------------------------------------------------------------
# artifact writers


def write_artifacts(out_dir, report) -> None:
    """Write report.json, assignments.csv and scores.csv for a run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    save_assignments(out / "assignments.csv", report)
    (out / "scores.csv").write_text(_score_table(report))


def _score_table(report) -> str:
    """One CSV row per level: schedule state, activity counts and (when
    ground truth was available) the per-level scores."""
    scored = bool(report.levels) and "scores" in report.levels[0]
    cols = ["n", "theta", "eta", "components", "escalations", "queries",
            "adoptions", "splits", "reassignments", "confident_count"]
    if scored:
        cols += ["accuracy", "confident_accuracy", "micro_f"]
    lines = [",".join(cols)]
    for rec in report.levels:
        row = [_FMT % rec["n"], _FMT % rec["theta_final"], _FMT % rec["eta"],
               str(rec["components"]), str(rec["escalations"]),
               str(len(rec["queries"])), str(rec["adoptions"]),
               str(len(rec["splits"])), str(rec["reassignments"]),
               str(rec["confident_count"])]
        if scored:
            sc = rec["scores"]
            row += [_FMT % sc["accuracy"], _FMT % sc["confident_accuracy"],
                    _FMT % sc["micro_f"]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _grid_points(pts: np.ndarray, cfg: RunConfig) -> np.ndarray:
    """Rectangular evaluation grid over the data's (padded) bounding box,
    or over explicit --grid-min/--grid-max bounds."""
    q = pts.shape[1]
    if cfg.grid_min is not None or cfg.grid_max is not None:
        if cfg.grid_min is None or cfg.grid_max is None:
            raise ConfigError("--grid-min and --grid-max go together")
        lo = np.asarray(cfg.grid_min, dtype=float)
        hi = np.asarray(cfg.grid_max, dtype=float)
        if lo.shape != (q,) or hi.shape != (q,):
            raise ConfigError(
                f"grid bounds need {q} value(s) for {q}-dimensional data")
        if np.any(hi <= lo):
            raise ConfigError("--grid-max must exceed --grid-min")
    else:
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        pad = 0.1 * np.where(hi > lo, hi - lo, 1.0)
        lo, hi = lo - pad, hi + pad
    axes = [np.linspace(lo[i], hi[i], cfg.grid_steps) for i in range(q)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _grid_density(grid: np.ndarray, samples: np.ndarray,
                  config: KernelConfig) -> np.ndarray:
    """Mean of squared kernel values against the sample set, evaluated in
    row blocks so large grids stay within the pair-count budget."""
    out = np.empty(grid.shape[0])
    block = 4096
    for start in range(0, grid.shape[0], block):
        rows = phi_rows(grid[start:start + block], samples, config)
        out[start:start + rows.shape[0]] = np.mean(rows * rows, axis=1)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_cluster(cfg: RunConfig) -> int:
    """Run the full active loop and write report/assignments/scores."""
    ds = cfg.resolve_dataset()
    pts, config = cfg.prepare_points(ds, cfg.n_start)
    oracle = cfg.make_oracle(ds.labels)
    try:
        report, _ = run(pts, oracle, cfg.schedule(), config,
                        truth=ds.labels, dataset_name=ds.name)
    except BudgetExhausted as exc:
        write_artifacts(cfg.out_dir, exc.report)
        print(f"error: {exc}", file=sys.stderr)
        print(f"partial artifacts written to {cfg.out_dir}", file=sys.stderr)
        return EXIT_BUDGET
    write_artifacts(cfg.out_dir, report)
    print(f"{ds.name}: {report.query_total} queries, "
          f"{int(np.sum(report.confident_mask))} confident points; "
          f"artifacts in {cfg.out_dir}")
    return EXIT_OK


def cmd_kernel(cfg: RunConfig) -> int:
    """Dump the density field on a rectangular grid (and optionally the
    sample kernel matrix) as CSV for external plotting."""
    ds = cfg.resolve_dataset()
    pts, config = cfg.prepare_points(ds, cfg.n)
    q = pts.shape[1]
    if q > 2:
        raise ConfigError(
            "grid dumps support 1- or 2-dimensional data; use --pca-dim 2")
    field = density_field(pts, config)
    grid = _grid_points(pts, cfg)
    dens = _grid_density(grid, pts, config)
    member = dens >= cfg.theta * field.sample_max

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    coord_cols = ["x", "y"][:q]
    lines = [",".join(coord_cols + ["density", "member"])]
    for i in range(grid.shape[0]):
        coords = [_FMT % v for v in grid[i]]
        lines.append(",".join(coords + [_FMT % dens[i], str(int(member[i]))]))
    (out / "density_grid.csv").write_text("\n".join(lines) + "\n")
    written = ["density_grid.csv"]
    if cfg.matrix:
        K = kernel_matrix(pts, config)
        rows = "\n".join(",".join(_FMT % v for v in K[i]) for i in range(len(K)))
        (out / "kernel_matrix.csv").write_text(rows + "\n")
        written.append("kernel_matrix.csv")
    print(f"{ds.name}: wrote {', '.join(written)} to {cfg.out_dir} "
          f"({grid.shape[0]} grid points, {int(member.sum())} members)")
    return EXIT_OK


def cmd_baseline(cfg: RunConfig) -> int:
    """Emit localized-kernel and Gaussian-KDE membership indicators at the
    same relative threshold for side-by-side comparison."""
    ds = cfg.resolve_dataset()
    pts, config = cfg.prepare_points(ds, cfg.n)
    phi_field = density_field(pts, config)
    kde_field = gaussian_kde_baseline(pts, cfg.bandwidth)
    phi_sup = support_set(phi_field, cfg.theta)
    kde_sup = support_set(kde_field, cfg.theta)
    phi_member = np.zeros(len(pts), dtype=int)
    phi_member[phi_sup.members] = 1
    kde_member = np.zeros(len(pts), dtype=int)
    kde_member[kde_sup.members] = 1

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    q = pts.shape[1]
    coord_cols = [f"x{i}" for i in range(q)]
    lines = [",".join(coord_cols
                      + ["phi_density", "phi_member", "kde_density",
                         "kde_member"])]
    for i in range(len(pts)):
        coords = [_FMT % v for v in pts[i]]
        lines.append(",".join(coords + [_FMT % phi_field.values[i],
                                        str(phi_member[i]),
                                        _FMT % kde_field.values[i],
                                        str(kde_member[i])]))
    (out / "baseline.csv").write_text("\n".join(lines) + "\n")
    print(f"{ds.name}: phi members {int(phi_member.sum())}, "
          f"kde members {int(kde_member.sum())} at theta {cfg.theta:g}; "
          f"baseline.csv in {cfg.out_dir}")
    return EXIT_OK


def cmd_serve(cfg: RunConfig) -> int:
    """Run the loop behind the HTTP labeling protocol (blocks)."""
    from .server import serve_run
    ds = cfg.resolve_dataset()
    pts, config = cfg.prepare_points(ds, cfg.n_start)
    return serve_run(cfg, ds, pts, config)


# ---------------------------------------------------------------------------
# argument parsing


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="JSON file of flag defaults (underscored keys)")
    p.add_argument("--dataset", default=None,
                   help=f"generator name: {', '.join(GENERATOR_NAMES)}")
    p.add_argument("--data-file", default=None, help="CSV dataset path")
    p.add_argument("--m", type=int, default=None, help="generated sample size")
    p.add_argument("--noise", type=float, default=None,
                   help="two-moons jitter (default 0.05)")
    p.add_argument("--delta", type=float, default=None,
                   help="ball+line separation (default 0.2)")
    p.add_argument("--seed", type=int, default=None, help="RNG seed")
    p.add_argument("--has-labels", default=None, choices=("auto", "yes", "no"),
                   help="whether the CSV's last column is labels")
    p.add_argument("--pca-dim", type=int, default=None,
                   help="project to this many principal axes first")
    p.add_argument("--standardize", action="store_true", default=None,
                   help="rescale data into the kernel's effective domain")
    p.add_argument("--out-dir", default=None, help="artifact directory")


def _add_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=float, default=None, help="kernel scale")
    p.add_argument("--filter-gain", type=float, default=None,
                   help="smooth cutoff sharpness")
    p.add_argument("--loc-exponent", type=float, default=None,
                   help="reported localization exponent")


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-start", type=float, default=None)
    p.add_argument("--n-max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--theta-init", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--eta-constant", type=float, default=None)
    p.add_argument("--max-escalations", type=int, default=None)
    p.add_argument("--query-budget", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cac", description="localized-kernel cautious active clustering")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="batch active-clustering run")
    _add_data_flags(p)
    _add_kernel_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--oracle", default=None,
                   help="label source: truth or replay:PATH")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("kernel", help="grid dumps of the density field")
    _add_data_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--n", type=float, default=None, help="kernel degree")
    p.add_argument("--theta", type=float, default=None,
                   help="relative membership threshold")
    p.add_argument("--grid-min", type=float, nargs="+", default=None)
    p.add_argument("--grid-max", type=float, nargs="+", default=None)
    p.add_argument("--grid-steps", type=int, default=None)
    p.add_argument("--matrix", action="store_true", default=None,
                   help="also dump the sample kernel matrix")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("baseline",
                       help="localized kernel vs Gaussian KDE members")
    _add_data_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--n", type=float, default=None, help="kernel degree")
    p.add_argument("--theta", type=float, default=None,
                   help="relative membership threshold")
    p.add_argument("--bandwidth", type=float, default=None,
                   help="Gaussian KDE bandwidth")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("serve", help="interactive run over HTTP")
    _add_data_flags(p)
    _add_kernel_flags(p)
    _add_schedule_flags(p)
    p.add_argument("--port", type=int, default=None,
                   help="listen port (0 picks a free one)")
    p.add_argument("--exit-when-done", action="store_true", default=None,
                   help="stop serving once the run completes")
    p.set_defaults(func=cmd_serve)
    return parser


def _merge_config(ns: argparse.Namespace) -> RunConfig:
    """Defaults < config file < explicit flags, scoped to the subcommand."""
    given = {k: v for k, v in vars(ns).items()
             if k not in ("command", "config", "func")}
    merged = {}
    if ns.config is not None:
        path = Path(ns.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {ns.config}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in loaded.items():
            if key not in given:
                raise ConfigError(
                    f"unknown config key {key!r} for this subcommand")
            merged[key] = value
    merged.update({k: v for k, v in given.items() if v is not None})
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; normalize other paths (e.g. --help).
        return int(exc.code) if exc.code else EXIT_OK
    try:
        cfg = _merge_config(ns)
        return ns.func(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KernelSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
