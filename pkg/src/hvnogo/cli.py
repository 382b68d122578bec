"""Command-line front end: run each verification and emit deterministic reports.

JSON is the canonical report format (CSV is available for sweeps). Numeric
fields of a report are byte-identical across runs with the same config; only
the timing block varies. The process exits 0 exactly when every verdict in
the report matches its expected value, so the tool can gate CI directly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field, is_dataclass

import numpy as np

from . import __version__
from .hilbert import (
    ATOL,
    PLUS,
    ZERO,
    Ket,
    Observable,
    build_pbr_basis,
    computational_basis_observable,
    spin_observable,
)
from .models import FaultyProjectorModel, bloch_from_ket, get_model, ket_from_bloch, tilted_axis
from .nogo import (
    WitnessSearchError,
    run_contradiction,
    tracking_set_measure,
    verify_certificate,
)
from .ontology import (
    BellPoint,
    SpherePoint,
    check_assumption_a,
    check_born_reproduction,
    random_ket,
    random_observable,
    tracks,
)

SEED_ENV = "HVNOGO_SEED"

# canonical polar angles (radians) for the Born-rule check: 0, 30, 45, 60,
# 90, 120, 180 degrees
BORN_ANGLES = (
    0.0,
    math.pi / 6,
    math.pi / 4,
    math.pi / 3,
    math.pi / 2,
    2 * math.pi / 3,
    math.pi,
)

LEMMA_OVERLAPS = (0.1, 0.25, 0.5, 0.75, 0.9)


def parse_state(spec: str) -> Ket:
    """Parse a state spec: preset name, polar angle, or "theta,phi" in radians."""
    if spec == "zero":
        return ZERO
    if spec == "plus":
        return PLUS
    try:
        parts = [float(x) for x in spec.split(",")]
    except ValueError:
        raise ValueError(f"unparseable state {spec!r}; expected 'zero', 'plus', "
                         "or Bloch angles in radians like '1.047' or '1.047,0.5'") from None
    if len(parts) == 1:
        theta, phi = parts[0], 0.0
    elif len(parts) == 2:
        theta, phi = parts
    else:
        raise ValueError(f"state {spec!r} has too many angle components")
    n = np.array([
        math.sin(theta) * math.cos(phi),
        math.sin(theta) * math.sin(phi),
        math.cos(theta),
    ])
    return ket_from_bloch(n)


def state_at_angle(theta: float) -> Ket:
    """Qubit state at polar angle theta in the x-z plane (overlap with |0> is cos^2(theta/2))."""
    return parse_state(f"{theta!r}")


@dataclass
class RunConfig:
    command: str
    model: str = "ks"
    model_right: str | None = None
    psi: str = "zero"
    phi: str = "plus"
    one: str = "zero"
    two: str = "plus"
    overlap: float | None = None
    angles: tuple = ()
    n_samples: int = 100_000
    trials: int = 10_000
    scheme: str = "quadrature"
    seed: int = 0
    budget: int = 100_000
    output: str | None = None
    format: str = "json"

    def validate(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.scheme not in ("quadrature", "montecarlo"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.format not in ("json", "csv"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.format == "csv" and self.command != "sweep":
            raise ValueError("csv output is only available for sweeps")
        if self.overlap is not None and not 0.0 <= self.overlap <= 1.0:
            raise ValueError("overlap must lie in [0, 1]")
        if self.command == "sweep" and len(self.angles) < 2:
            raise ValueError("sweep requires a grid of at least 2 angles")


@dataclass
class Report:
    config: dict
    toolkit: dict
    results: dict
    verdicts: dict
    ok: bool
    timings: dict = field(default_factory=dict)

    def to_json(self, include_timings: bool = True) -> str:
        payload = {
            "config": self.config,
            "toolkit": self.toolkit,
            "results": self.results,
            "verdicts": self.verdicts,
            "ok": self.ok,
        }
        if include_timings:
            payload["timings"] = self.timings
        return json.dumps(payload, indent=2, sort_keys=True)


def jsonify(obj):
    """Recursively convert toolkit values into JSON-serializable primitives."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Ket):
        return {"amplitudes": [[z.real, z.imag] for z in obj.amplitudes]}
    if isinstance(obj, SpherePoint):
        return {"type": "sphere", "vec": [float(x) for x in obj.vec]}
    if isinstance(obj, BellPoint):
        return {"type": "bell", "ket": jsonify(obj.ket), "u": obj.u}
    if isinstance(obj, Observable):
        return {"dim": obj.dim, "eigenvalues": list(obj.eigenvalues)}
    if isinstance(obj, np.ndarray):
        return [jsonify(x) for x in obj.tolist()]
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: jsonify(v) for k, v in asdict(obj).items()}
    if isinstance(obj, dict):
        return {_key(k): jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonify(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _key(k) -> str:
    if isinstance(k, float) and k == int(k):
        return str(int(k))
    return str(k)


def _born_tolerance(model_name: str) -> float:
    return 1e-6 if model_name == "ks" else 1e-12


def _born_ok(report, tolerance: float) -> bool:
    if report.scheme == "quadrature":
        return all(abs(o.deviation) <= tolerance for o in report.outcomes)
    return all(abs(o.deviation) <= max(4.0 * o.error, 1e-12) for o in report.outcomes)


def _sub_seeds(seed: int, n: int) -> list:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def _cmd_born(cfg: RunConfig):
    model = get_model(cfg.model)
    psi = parse_state(cfg.psi)
    angles = cfg.angles or BORN_ANGLES
    axis = bloch_from_ket(psi)
    tolerance = _born_tolerance(model.name)
    seeds = _sub_seeds(cfg.seed, len(angles))
    checks = []
    all_ok = True
    for alpha, sub_seed in zip(angles, seeds):
        observable = spin_observable(tilted_axis(axis, alpha))
        report = check_born_reproduction(
            model, psi, observable, scheme=cfg.scheme,
            n=cfg.n_samples if cfg.scheme == "montecarlo" else None,
            seed=sub_seed if cfg.scheme == "montecarlo" else None,
        )
        ok = _born_ok(report, tolerance)
        all_ok = all_ok and ok
        checks.append({
            "angle": alpha,
            "expected_plus": math.cos(alpha / 2.0) ** 2,
            "report": report,
            "ok": ok,
        })
    results = {"model": model.name, "scheme": cfg.scheme, "tolerance": tolerance,
               "checks": checks}
    return results, {"born": all_ok}


def _lemma_states(cfg: RunConfig):
    if cfg.overlap is not None:
        theta = 2.0 * math.acos(math.sqrt(cfg.overlap))
        return ZERO, state_at_angle(theta)
    return parse_state(cfg.psi), parse_state(cfg.phi)


def _cmd_lemma(cfg: RunConfig):
    model = get_model(cfg.model)
    psi, phi = _lemma_states(cfg)
    estimate = tracking_set_measure(model, psi, phi, cfg.n_samples, cfg.seed)
    ok = estimate.degenerate or estimate.within(4.0)
    results = {"model": model.name, "psi": psi, "phi": phi, "estimate": estimate}
    return results, {"lemma": ok}


def _cmd_assumption_a(cfg: RunConfig):
    model = get_model(cfg.model)
    violations = check_assumption_a(model, cfg.trials, cfg.seed)
    results = {
        "model": model.name,
        "trials": cfg.trials,
        "violations": len(violations),
        "first_violations": violations[:5],
    }
    return results, {"assumption_a": len(violations) == 0}


def _cmd_tracking(cfg: RunConfig):
    model = get_model(cfg.model)
    psi = parse_state(cfg.psi)
    lams = model.sample_batch(psi, cfg.n_samples, cfg.seed)
    failures = []
    for i, lam in enumerate(lams):
        report = tracks(model, lam, psi)
        if not report.tracks:
            failures.append({"index": i, "lam": lam, "witnesses": list(report.witnesses)})
    results = {"model": model.name, "psi": psi, "n": cfg.n_samples,
               "failures": failures[:5], "failure_count": len(failures)}
    return results, {"tracking": not failures}


def _cmd_certificate(cfg: RunConfig):
    model_left = get_model(cfg.model)
    model_right = get_model(cfg.model_right or cfg.model)
    one, two = parse_state(cfg.one), parse_state(cfg.two)
    certificate = run_contradiction(model_left, model_right, one, two, cfg.seed,
                                    budget=cfg.budget)
    check = verify_certificate(certificate)
    results = {"certificate": certificate.to_dict(), "reverification": check}
    verdicts = {
        "certificate_verdict": certificate.verdict,
        "certificate_reverified": check["ok"],
    }
    return results, verdicts


def _sweep_rows(cfg: RunConfig):
    model = get_model(cfg.model)
    seeds = _sub_seeds(cfg.seed, len(cfg.angles))
    rows = []
    for theta, sub_seed in zip(cfg.angles, seeds):
        phi = state_at_angle(theta)
        estimate = tracking_set_measure(model, ZERO, phi, cfg.n_samples, sub_seed)
        rows.append({
            "angle": theta,
            "overlap": estimate.target,
            "estimated_measure": estimate.value,
            "stderr": estimate.stderr,
            "model": model.name,
            "degenerate": estimate.degenerate,
        })
    return rows


def _cmd_sweep(cfg: RunConfig):
    rows = _sweep_rows(cfg)
    ok = all(
        row["degenerate"] or abs(row["estimated_measure"] - row["overlap"]) <= 4.0 * row["stderr"]
        for row in rows
    )
    return {"rows": rows}, {"sweep": ok}


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["angle", "overlap", "estimated_measure", "stderr", "model", "degenerate"])
    for row in rows:
        writer.writerow([
            repr(row["angle"]), repr(row["overlap"]), repr(row["estimated_measure"]),
            repr(row["stderr"]), row["model"], row["degenerate"],
        ])
    return buf.getvalue()


def _cmd_all(cfg: RunConfig):
    """Run every verification with its acceptance-grade parameters."""
    seeds = _sub_seeds(cfg.seed, 16)
    results = {}
    verdicts = {}

    # 1: basis residuals
    basis = build_pbr_basis(ZERO, PLUS)
    ortho = basis.max_product_overlap()
    gram = basis.gram_deviation()
    results["basis"] = {"max_product_overlap": ortho, "gram_deviation": gram}
    verdicts["basis"] = ortho <= ATOL and gram <= ATOL

    # 2: Born reproduction, canonical angles plus random (state, observable) pairs
    born_block = {}
    born_ok = True
    for name in ("ks", "bell"):
        model = get_model(name)
        tolerance = _born_tolerance(name)
        psi = ZERO
        axis = bloch_from_ket(psi)
        angle_devs = []
        for alpha in BORN_ANGLES:
            report = check_born_reproduction(model, psi, spin_observable(tilted_axis(axis, alpha)))
            angle_devs.append(report.max_abs_deviation())
        rng = np.random.default_rng(seeds[0] if name == "ks" else seeds[1])
        random_devs = []
        for _ in range(100):
            psi_r = random_ket(2, rng)
            obs_r = random_observable(2, rng)
            report = check_born_reproduction(model, psi_r, obs_r)
            random_devs.append(report.max_abs_deviation())
        worst = max(max(angle_devs), max(random_devs))
        born_block[name] = {"worst_deviation": worst, "tolerance": tolerance}
        born_ok = born_ok and worst <= tolerance
    results["born"] = born_block
    verdicts["born"] = born_ok

    # 3: tracking-set measure across the overlap grid
    lemma_rows = []
    lemma_ok = True
    lemma_seeds = _sub_seeds(seeds[2], 2 * len(LEMMA_OVERLAPS))
    for i, name in enumerate(("ks", "bell")):
        model = get_model(name)
        for j, overlap in enumerate(LEMMA_OVERLAPS):
            theta = 2.0 * math.acos(math.sqrt(overlap))
            estimate = tracking_set_measure(
                model, ZERO, state_at_angle(theta), 100_000,
                lemma_seeds[i * len(LEMMA_OVERLAPS) + j],
            )
            lemma_rows.append({"model": name, "overlap": overlap, "estimate": estimate})
            lemma_ok = lemma_ok and estimate.within(4.0)
    results["lemma"] = lemma_rows
    verdicts["lemma"] = lemma_ok

    # 4: tracking necessity on sampled hidden states
    tracking_block = {}
    tracking_ok = True
    for i, name in enumerate(("ks", "bell")):
        model = get_model(name)
        lams = model.sample_batch(PLUS, 10_000, seeds[3 + i])
        bad = sum(1 for lam in lams if not tracks(model, lam, PLUS).tracks)
        tracking_block[name] = {"n": 10_000, "failures": bad}
        tracking_ok = tracking_ok and bad == 0
    results["tracking"] = tracking_block
    verdicts["tracking"] = tracking_ok

    # 5: projector-rule audit, plus detector sensitivity on the faulty fixture
    aa_block = {}
    aa_ok = True
    for i, name in enumerate(("ks", "bell")):
        model = get_model(name)
        count = len(check_assumption_a(model, 10_000, seeds[5 + i]))
        aa_block[name] = {"trials": 10_000, "violations": count}
        aa_ok = aa_ok and count == 0
    faulty = len(check_assumption_a(FaultyProjectorModel(), 100, seeds[7]))
    aa_block["faulty_fixture"] = {"trials": 100, "violations": faulty}
    aa_ok = aa_ok and faulty >= 1
    results["assumption_a"] = aa_block
    verdicts["assumption_a"] = aa_ok

    # 6: contradiction certificates for both shipped models
    cert_block = {}
    cert_ok = True
    for i, name in enumerate(("ks", "bell")):
        model = get_model(name)
        certificate = run_contradiction(model, model, ZERO, PLUS, seeds[8 + i])
        check = verify_certificate(certificate)
        cert_block[name] = {"certificate": certificate.to_dict(), "reverification": check}
        cert_ok = cert_ok and certificate.verdict and check["ok"] and (
            len(certificate.forced_zero) == 4 and certificate.response_sum == 0.0
        )
    results["certificate"] = cert_block
    verdicts["certificate"] = cert_ok

    # 7: negative control, the pipeline must not manufacture violations
    control = run_contradiction(
        get_model("ks"), get_model("ks"), ZERO, PLUS, seeds[10],
        observable=computational_basis_observable(4),
    )
    results["negative_control"] = {"verdict": control.verdict,
                                   "unforced": list(control.unforced)}
    verdicts["negative_control"] = control.verdict is False

    # 8: determinism of numeric fields under a fixed seed
    def _probe():
        model = get_model("ks")
        estimate = tracking_set_measure(model, ZERO, PLUS, 20_000, seeds[11])
        certificate = run_contradiction(model, model, ZERO, PLUS, seeds[12])
        return json.dumps(jsonify({"estimate": estimate,
                                   "certificate": certificate.to_dict()}), sort_keys=True)

    first, second = _probe(), _probe()
    results["determinism"] = {"identical": first == second}
    verdicts["determinism"] = first == second

    return results, verdicts


_COMMANDS = {
    "born": _cmd_born,
    "lemma": _cmd_lemma,
    "assumption-a": _cmd_assumption_a,
    "tracking": _cmd_tracking,
    "certificate": _cmd_certificate,
    "sweep": _cmd_sweep,
    "all": _cmd_all,
}


def run(cfg: RunConfig) -> Report:
    """Dispatch a validated config to its command and assemble the report."""
    cfg.validate()
    handler = _COMMANDS[cfg.command]
    start = time.perf_counter()
    results, verdicts = handler(cfg)
    elapsed = time.perf_counter() - start
    return Report(
        config=jsonify(asdict(cfg)),
        toolkit={"name": "hvnogo", "version": __version__, "report_schema": 1},
        results=jsonify(results),
        verdicts=dict(verdicts),
        ok=all(verdicts.values()),
        timings={"total_s": elapsed},
    )


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _angles(text: str) -> tuple:
    return tuple(float(x) for x in text.split(","))


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hvnogo",
        description="Verify deterministic hidden-variables models and their composition no-go.",
    )
    parser.add_argument("--version", action="version", version=f"hvnogo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_default=100_000):
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help=f"RNG seed (default from ${SEED_ENV} or 0)")
        p.add_argument("--output", default=None, help="write the report to this path")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("-n", "--n-samples", type=_positive_int, default=n_default,
                       dest="n_samples")

    p = sub.add_parser("born", help="compare model statistics with Born probabilities")
    common(p)
    p.add_argument("--model", choices=("ks", "bell"), default="ks")
    p.add_argument("--psi", default="zero")
    p.add_argument("--scheme", choices=("quadrature", "montecarlo"), default="quadrature")
    p.add_argument("--angles", type=_angles, default=())

    p = sub.add_parser("lemma", help="estimate the tracking-set measure")
    common(p)
    p.add_argument("--model", choices=("ks", "bell"), default="ks")
    p.add_argument("--psi", default="zero")
    p.add_argument("--phi", default="plus")
    p.add_argument("--overlap", type=float, default=None,
                   help="target squared overlap; overrides --psi/--phi")

    p = sub.add_parser("assumption-a", help="randomized projector-rule audit")
    common(p)
    p.add_argument("--model", choices=("ks", "bell"), default="ks")
    p.add_argument("--trials", type=_positive_int, default=10_000)

    p = sub.add_parser("tracking", help="check sampled hidden states track their state")
    common(p, n_default=10_000)
    p.add_argument("--model", choices=("ks", "bell"), default="ks")
    p.add_argument("--psi", default="zero")

    p = sub.add_parser("certificate", help="produce and re-verify a contradiction certificate")
    common(p)
    p.add_argument("--model", choices=("ks", "bell"), default="ks")
    p.add_argument("--model-right", choices=("ks", "bell"), default=None)
    p.add_argument("--one", default="zero")
    p.add_argument("--two", default="plus")
    p.add_argument("--budget", type=_positive_int, default=100_000)

    p = sub.add_parser("sweep", help="tracking-set measure across an angle grid")
    common(p, n_default=20_000)
    p.add_argument("--model", choices=("ks", "bell"), default="ks")
    p.add_argument("--angles", type=_angles, required=True,
                   help="comma-separated polar angles in radians")

    p = sub.add_parser("all", help="run every verification at acceptance-grade sizes")
    common(p)

    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in ("model", "model_right", "psi", "phi", "one", "two", "overlap",
                 "angles", "n_samples", "trials", "scheme", "seed", "budget",
                 "output", "format"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        report = run(cfg)
    except (ValueError, WitnessSearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if cfg.command == "sweep" and cfg.format == "csv":
        text = sweep_csv(report.results["rows"])
    else:
        text = report.to_json() + "\n"

    if cfg.output:
        with open(cfg.output, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)

    for name, verdict in report.verdicts.items():
        print(f"{'PASS' if verdict else 'FAIL'}  {name}", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
