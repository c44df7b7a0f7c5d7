"""Trajectory records, analysis metrics and report comparison.

The trajectory CSV has a fixed 44-column order:

    time, position (3), attitude quaternion wxyz (4), linear velocity (3),
    angular velocity (3), tilt angles (6), prop speeds (6), normalized
    action (12), disturbance force+torque (6)

written with repr-fidelity floats so a parse-back is numerically exact.
Metrics follow the reference analyses: per-axis and total error norms
over the steady window, actuator command histograms on a fixed 101-bin
grid over [-1, 1], per-arm tilt statistics and a squared-thrust energy
proxy.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import attitude_error

HIST_BINS = 101
HIST_EDGES = np.linspace(-1.0, 1.0, HIST_BINS + 1)

CSV_COLUMNS = (
    ["time"]
    + ["px", "py", "pz", "qw", "qx", "qy", "qz"]
    + ["vx", "vy", "vz", "wx", "wy", "wz"]
    + [f"alpha{i}" for i in range(6)]
    + [f"n{i}" for i in range(6)]
    + [f"a{i}" for i in range(12)]
    + ["fdx", "fdy", "fdz", "tdx", "tdy", "tdz"]
)


@dataclass
class Trajectory:
    time: np.ndarray  # (N,)
    position: np.ndarray  # (N, 3)
    attitude: np.ndarray  # (N, 4)
    lin_vel: np.ndarray  # (N, 3)
    ang_vel: np.ndarray  # (N, 3)
    alpha: np.ndarray  # (N, 6)
    prop_speed: np.ndarray  # (N, 6)
    action: np.ndarray  # (N, 12)
    disturbance: np.ndarray  # (N, 6)

    def row_matrix(self):
        return np.hstack(
            [
                self.time[:, None], self.position, self.attitude, self.lin_vel,
                self.ang_vel, self.alpha, self.prop_speed, self.action,
                self.disturbance,
            ]
        )

    def to_csv(self, path):
        mat = self.row_matrix()
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for row in mat:
                fh.write(",".join("%.17g" % v for v in row) + "\n")

    @classmethod
    def from_csv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if header != CSV_COLUMNS:
                raise ValueError(f"{path}: unexpected trajectory columns")
            mat = np.array(
                [[float(v) for v in line.strip().split(",")] for line in fh if line.strip()]
            )
        if mat.size == 0:
            mat = np.zeros((0, len(CSV_COLUMNS)))
        return cls(
            time=mat[:, 0],
            position=mat[:, 1:4],
            attitude=mat[:, 4:8],
            lin_vel=mat[:, 8:11],
            ang_vel=mat[:, 11:14],
            alpha=mat[:, 14:20],
            prop_speed=mat[:, 20:26],
            action=mat[:, 26:38],
            disturbance=mat[:, 38:44],
        )


def _norm_stats(err):
    """mean / rms / max of |err| rows (err is (N,) or (N, d) -> norms)."""
    if err.ndim > 1:
        mag = np.linalg.norm(err, axis=1)
    else:
        mag = np.abs(err)
    if mag.size == 0:
        return {"mean": float("nan"), "rms": float("nan"), "max": float("nan")}
    return {
        "mean": float(np.mean(mag)),
        "rms": float(np.sqrt(np.mean(mag**2))),
        "max": float(np.max(mag)),
    }


def command_distribution(actions):
    """Histograms and summary stats per actuator group.

    Utilization is the fraction of the [-1, 1] command range spanned by
    the central 99% of the mass (0.5th to 99.5th percentile over 2.0).
    """
    actions = np.asarray(actions, dtype=float).reshape(-1, 12)
    out = {}
    for group, cols in (("tilt", slice(0, 6)), ("prop", slice(6, 12))):
        vals = actions[:, cols].ravel()
        counts, _ = np.histogram(vals, bins=HIST_EDGES)
        hist = counts / max(counts.sum(), 1)
        lo, hi = np.percentile(vals, [0.5, 99.5]) if vals.size else (0.0, 0.0)
        out[group] = {
            "hist": hist.tolist(),
            "mean": float(np.mean(vals)) if vals.size else 0.0,
            "variance": float(np.var(vals)) if vals.size else 0.0,
            "utilization": float((hi - lo) / 2.0),
        }
    return out


@dataclass
class MetricsReport:
    scenario: str
    controller: str
    seed: int
    diverged: bool
    steady_start: float
    position_error: dict = field(default_factory=dict)  # per-axis + total
    attitude_error: dict = field(default_factory=dict)
    commands: dict = field(default_factory=dict)
    tilt_mean: list = field(default_factory=list)  # per arm, steady window
    tilt_variance: list = field(default_factory=list)
    energy_proxy: float = 0.0  # integral of sum_i f_i^2 dt

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "controller": self.controller,
            "seed": self.seed,
            "diverged": self.diverged,
            "steady_start": self.steady_start,
            "position_error": self.position_error,
            "attitude_error": self.attitude_error,
            "commands": self.commands,
            "tilt_mean": self.tilt_mean,
            "tilt_variance": self.tilt_variance,
            "energy_proxy": self.energy_proxy,
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), sort_keys=True, indent=1)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def compute_metrics(
    traj: Trajectory,
    reference_position,
    reference_attitude,
    scenario: str,
    controller: str,
    seed: int,
    diverged: bool = False,
    steady_start: float = 3.0,
    k_f_nominal: float = 8e-6,
) -> MetricsReport:
    """Analysis metrics from a recorded trajectory.

    The steady window drops the initial transient (t < steady_start).
    Everything derives from the trajectory plus the reference pose, so a
    report recomputed from the written CSV matches the in-memory one.
    The energy proxy uses the nominal thrust coefficient.
    """
    ref_p = np.asarray(reference_position, dtype=float)
    ref_q = np.asarray(reference_attitude, dtype=float)
    steady = traj.time >= steady_start
    e_p = traj.position[steady] - ref_p
    e_r = attitude_error(traj.attitude[steady], ref_q)

    pos = {axis: _norm_stats(e_p[:, i]) for i, axis in enumerate("xyz")}
    pos["total"] = _norm_stats(e_p)
    att = {axis: _norm_stats(e_r[:, i]) for i, axis in enumerate("xyz")}
    att["total"] = _norm_stats(e_r)

    alpha_w = traj.alpha[steady]
    tilt_mean = list(np.mean(alpha_w, axis=0)) if alpha_w.size else [float("nan")] * 6
    tilt_var = list(np.var(alpha_w, axis=0)) if alpha_w.size else [float("nan")] * 6

    thrust = k_f_nominal * traj.prop_speed**2
    if traj.time.size > 1:
        dt = float(np.median(np.diff(traj.time)))
    else:
        dt = 0.0
    energy = float(np.sum(thrust**2) * dt)

    return MetricsReport(
        scenario=scenario,
        controller=controller,
        seed=int(seed),
        diverged=bool(diverged),
        steady_start=float(steady_start),
        position_error=pos,
        attitude_error=att,
        commands=command_distribution(traj.action[steady] if steady.any() else traj.action[:0]),
        tilt_mean=[float(v) for v in tilt_mean],
        tilt_variance=[float(v) for v in tilt_var],
        energy_proxy=energy,
    )


def compare_report(a: MetricsReport, b: MetricsReport):
    """Side-by-side error norms with ratios. Returns (dict, text table)."""
    if a.scenario != b.scenario:
        raise ValueError(
            f"cannot compare different scenarios: {a.scenario!r} vs {b.scenario!r}"
        )
    rows = []
    for family, attr in (("position", "position_error"), ("attitude", "attitude_error")):
        for axis in ("x", "y", "z", "total"):
            for stat in ("mean", "rms", "max"):
                va = getattr(a, attr)[axis][stat]
                vb = getattr(b, attr)[axis][stat]
                bad = (
                    a.diverged or b.diverged
                    or not np.isfinite(va) or not np.isfinite(vb) or vb == 0.0
                )
                ratio = float("nan") if bad else va / vb
                rows.append(
                    {
                        "metric": f"{family}.{axis}.{stat}",
                        a.controller: va,
                        b.controller: vb,
                        "ratio": ratio,
                    }
                )
    width = max(len(r["metric"]) for r in rows)
    lines = [
        f"scenario: {a.scenario}   ({a.controller} vs {b.controller})",
        f"{'metric'.ljust(width)}  {a.controller:>12}  {b.controller:>12}  {'ratio':>8}",
    ]
    for r in rows:
        ratio = "n/a" if not np.isfinite(r["ratio"]) else f"{r['ratio']:8.3f}"
        lines.append(
            f"{r['metric'].ljust(width)}  {r[a.controller]:12.5g}  "
            f"{r[b.controller]:12.5g}  {ratio:>8}"
        )
    if a.diverged or b.diverged:
        lines.append("note: diverged run present; ratios reported as n/a")
    return {"scenario": a.scenario, "rows": rows,
            "diverged": bool(a.diverged or b.diverged)}, "\n".join(lines) + "\n"


def write_plot_csvs(reports, out_dir):
    """Emit per-figure CSV data from one or more MetricsReports.

    error_norms.csv   - fig4/5-style per-axis pose error norms
    command_hist.csv  - fig6-style command histograms
    tilt_stats.csv    - fig7-style per-arm tilt mean and variance
    """
    import os

    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "error_norms.csv"), "w") as fh:
        fh.write("scenario,controller,family,axis,mean,rms,max\n")
        for rep in reports:
            for family, attr in (("position", "position_error"), ("attitude", "attitude_error")):
                for axis in ("x", "y", "z", "total"):
                    s = getattr(rep, attr)[axis]
                    fh.write(
                        f"{rep.scenario},{rep.controller},{family},{axis},"
                        f"{s['mean']:.17g},{s['rms']:.17g},{s['max']:.17g}\n"
                    )
    with open(os.path.join(out_dir, "command_hist.csv"), "w") as fh:
        centers = 0.5 * (HIST_EDGES[:-1] + HIST_EDGES[1:])
        fh.write("scenario,controller,group,bin_center,mass\n")
        for rep in reports:
            for group in ("tilt", "prop"):
                for c, m in zip(centers, rep.commands[group]["hist"]):
                    fh.write(f"{rep.scenario},{rep.controller},{group},{c:.6g},{m:.17g}\n")
    with open(os.path.join(out_dir, "tilt_stats.csv"), "w") as fh:
        fh.write("scenario,controller,arm,tilt_mean,tilt_variance\n")
        for rep in reports:
            for i in range(6):
                fh.write(
                    f"{rep.scenario},{rep.controller},{i},"
                    f"{rep.tilt_mean[i]:.17g},{rep.tilt_variance[i]:.17g}\n"
                )
