"""Batch experiment runner.

Configuration is a plain-text key-value file with sections (INI dialect):

    [experiment]
    command = variational        ; variational | noise-sample | pam-solve |
    seeds = 1,2,3                ;   moments | regime-table | acceptance
    format = json                ; csv | json

    [kernel]
    family = white
    sigma = 1.0
    dimension = 1
    ; omega = 0.5   (riesz)      ; omegas = 0.5,0.7  (fractional)

    [grid]
    r = 20.0
    n = 512

plus command-specific blocks ([regime], [solver], [variational], [moments]).
Outputs are deterministic for fixed (config, seeds) and independent of the
worker count; every file embeds the config hash and the package version.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigError, PamlabError
from .kernels import KernelSpec, MollifiedKernelSpec
from .moments import estimate_moment, intermittency_scan
from .noise import sample_noise
from .pam import PamSolveConfig, solve_pde
from .scaling import PowerLawSequence, classify_regime, regime_record, scaling_functions
from .variational import (
    BEST_CONSTANT,
    CRT,
    CURVATURE_WELL,
    SCALED,
    SUB,
    SUB_MOLLIFIED,
    SUPPORT_RESTRICTED,
    FunctionalSpec,
    solve_maximizer,
)

_COMMANDS = ("variational", "noise-sample", "pam-solve", "moments", "regime-table", "acceptance")
_KINDS = {
    "sub": SUB,
    "sub_mollified": SUB_MOLLIFIED,
    "crt": CRT,
    "curvature_well": CURVATURE_WELL,
    "support_restricted": SUPPORT_RESTRICTED,
    "scaled": SCALED,
    "best_constant": BEST_CONSTANT,
}


@dataclass
class ExperimentConfig:
    command: str
    seeds: list[int]
    out_dir: str
    fmt: str
    raw_text: str
    sections: dict = field(default_factory=dict)

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.raw_text.encode()).hexdigest()


def _require(section, key, cast, path):
    if key not in section:
        raise ConfigError(f"{path}.{key}: missing")
    try:
        return cast(section[key])
    except ValueError as exc:
        raise ConfigError(f"{path}.{key}: {exc}") from exc


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if "experiment" not in cp:
        raise ConfigError("experiment: missing section")
    exp = cp["experiment"]
    command = _require(exp, "command", str, "experiment")
    if command not in _COMMANDS:
        raise ConfigError(f"experiment.command: unknown command {command!r}")
    seeds_text = exp.get("seeds", "1")
    try:
        seeds = [int(s) for s in seeds_text.split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigError(f"experiment.seeds: {exc}") from exc
    fmt = exp.get("format", "json")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"experiment.format: {fmt!r} is not csv|json")
    sections = {name: dict(cp[name]) for name in cp.sections()}
    return ExperimentConfig(
        command=command,
        seeds=seeds,
        out_dir=exp.get("out", "."),
        fmt=fmt,
        raw_text=text,
        sections=sections,
    )


def _kernel_from(cfg: ExperimentConfig) -> KernelSpec:
    if "kernel" not in cfg.sections:
        raise ConfigError("kernel: missing section")
    sec = cfg.sections["kernel"]
    family = _require(sec, "family", str, "kernel")
    sigma = _require(sec, "sigma", float, "kernel")
    dim = _require(sec, "dimension", int, "kernel")
    omega = float(sec["omega"]) if "omega" in sec else None
    omegas = tuple(float(v) for v in sec["omegas"].split(",")) if "omegas" in sec else None
    try:
        return KernelSpec(family, sigma, dim, omega=omega, omegas=omegas)
    except ValueError as exc:
        raise ConfigError(f"kernel: {exc}") from exc


def _grid_from(cfg: ExperimentConfig) -> tuple[float, int]:
    if "grid" not in cfg.sections:
        raise ConfigError("grid: missing section")
    sec = cfg.sections["grid"]
    return _require(sec, "r", float, "grid"), _require(sec, "n", int, "grid")


def _provenance(cfg: ExperimentConfig) -> dict:
    return {"config_sha256": cfg.sha256, "pamlab_version": __version__}


def _write_json(path, payload):
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows, provenance):
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# config_sha256={provenance['config_sha256']}\n")
        fh.write(f"# pamlab_version={provenance['pamlab_version']}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _cmd_variational(cfg: ExperimentConfig) -> list:
    sec = cfg.sections.get("variational", {})
    kern = _kernel_from(cfg)
    r, n = _grid_from(cfg)
    kind = _KINDS.get(sec.get("kind", "sub"))
    if kind is None:
        raise ConfigError(f"variational.kind: unknown kind {sec.get('kind')!r}")
    kw = {}
    for name, cast in (("frak_c", float), ("p", float), ("t", float), ("radius", float), ("c", float)):
        if name in sec:
            kw[name] = cast(sec[name])
    if "sigma_matrix" in sec:
        vals = [float(v) for v in sec["sigma_matrix"].split(",")]
        d = kern.dimension
        kw["sigma_matrix"] = np.asarray(vals).reshape(d, d)
    spec = FunctionalSpec(kind, kern, float(sec.get("kappa", "1.0")), **kw)
    res = solve_maximizer(spec, r, n, tol=float(sec.get("tol", "1e-6")))
    payload = {
        "module": "variational",
        "kind": sec.get("kind", "sub"),
        "value": res.value,
        "residual": res.residual,
        "iterations": res.iterations,
        "grid": {"r": r, "n": n},
        **_provenance(cfg),
    }
    out = os.path.join(cfg.out_dir, "variational.json")
    _write_json(out, payload)
    if cfg.fmt == "csv":
        out2 = os.path.join(cfg.out_dir, "variational.csv")
        _write_csv(
            out2,
            ["module", "kind", "value", "residual", "iterations"],
            [["variational", sec.get("kind", "sub"), res.value, res.residual, res.iterations]],
            _provenance(cfg),
        )
        return [out, out2]
    return [out]


def _cmd_noise_sample(cfg: ExperimentConfig, workers: int) -> list:
    kern = _kernel_from(cfg)
    r, n = _grid_from(cfg)
    sec = cfg.sections.get("noise", {})
    eps = float(sec.get("epsilon", "1.0"))
    mk = MollifiedKernelSpec(kern, eps)
    outputs = []

    def one(seed):
        return seed, sample_noise(mk, r, n, seed=seed)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        drawn = list(pool.map(one, cfg.seeds))
    for seed, fld in sorted(drawn, key=lambda kv: cfg.seeds.index(kv[0])):
        path = os.path.join(cfg.out_dir, f"noise_seed{seed}.field")
        fld.save(path)
        outputs.append(path)
    meta = os.path.join(cfg.out_dir, "noise_manifest.json")
    _write_json(meta, {"module": "noise", "epsilon": eps, "seeds": cfg.seeds, **_provenance(cfg)})
    outputs.append(meta)
    return outputs


def _cmd_pam_solve(cfg: ExperimentConfig, workers: int) -> list:
    kern = _kernel_from(cfg)
    r, n = _grid_from(cfg)
    sec = cfg.sections.get("solver", {})
    eps = float(sec.get("epsilon", "1.0"))
    t = float(sec.get("t", "1.0"))
    kappa = float(sec.get("kappa", "1.0"))
    pde_cfg = PamSolveConfig(
        method=sec.get("method", "pde"),
        dt=float(sec.get("dt", "1e-2")),
        boundary=sec.get("boundary", "dirichlet_box"),
    )
    mk = MollifiedKernelSpec(kern, eps)

    def one(seed):
        xi = sample_noise(mk, r, n, seed=seed)
        u = solve_pde(xi, t, pde_cfg, kappa=kappa)
        return seed, u

    with ThreadPoolExecutor(max_workers=workers) as pool:
        solved = list(pool.map(one, cfg.seeds))
    outputs = []
    for seed, u in sorted(solved, key=lambda kv: cfg.seeds.index(kv[0])):
        path = os.path.join(cfg.out_dir, f"pam_t{t}_seed{seed}.field")
        u.save(path)
        outputs.append(path)
    return outputs


def _cmd_moments(cfg: ExperimentConfig) -> list:
    kern = _kernel_from(cfg)
    r, n = _grid_from(cfg)
    sec = cfg.sections.get("moments", {})
    eps = float(sec.get("epsilon", "1.0"))
    t = float(sec.get("t", "1.0"))
    kappa = float(sec.get("kappa", "1.0"))
    budget = int(sec.get("budget", "100"))
    solver = PamSolveConfig(method=sec.get("method", "pde"), dt=float(sec.get("dt", "1e-2")))
    mk = MollifiedKernelSpec(kern, eps)
    if "epsilons" in sec and "ps" in sec:
        scan = intermittency_scan(
            mk,
            t,
            epsilons=[float(v) for v in sec["epsilons"].split(",")],
            ps=[float(v) for v in sec["ps"].split(",")],
            budget=budget,
            solver=solver,
            seed=cfg.seeds[0],
            kappa=kappa,
            box_radius=r,
            points_per_dim=n,
        )
        rows = [
            [row["epsilon"], row["t"], row["p"], row["log_moment"], row["stderr"], row["A"],
             row["ell_hat"], row["ell_hat_over_p"]]
            for row in scan["rows"]
        ]
        csv_path = os.path.join(cfg.out_dir, "moment_scan.csv")
        _write_csv(
            csv_path,
            ["epsilon", "t", "p", "log_moment", "stderr", "A", "ell_hat", "ell_hat_over_p"],
            rows,
            _provenance(cfg),
        )
        json_path = os.path.join(cfg.out_dir, "moment_scan.json")
        _write_json(
            json_path,
            {
                "module": "moments",
                "verdict": scan["verdict"],
                "confidence": scan["confidence"],
                "epsilon_tested": scan["epsilon_tested"],
                **_provenance(cfg),
            },
        )
        return [csv_path, json_path]
    p = float(sec.get("p", "1.0"))
    est = estimate_moment(
        mk, t, p, np.zeros(kern.dimension), n_noise=budget, solver=solver,
        seed=cfg.seeds[0], kappa=kappa, box_radius=r, points_per_dim=n,
    )
    path = os.path.join(cfg.out_dir, "moment.json")
    _write_json(
        path,
        {
            "module": "moments",
            "p": p, "t": t, "epsilon": eps,
            "value": est.value,
            "log_value": est.log_value,
            "stderr_log": est.stderr_log,
            "n_noise": est.n_noise,
            **_provenance(cfg),
        },
    )
    return [path]


def _cmd_regime_table(cfg: ExperimentConfig) -> list:
    kern = _kernel_from(cfg)
    sec = cfg.sections.get("regime", {})
    omega = kern.scaling_exponent()
    e_seq = PowerLawSequence(float(sec.get("e_prefactor", "1.0")), float(sec.get("e_exponent", "0.0")))
    t_seq = PowerLawSequence(float(sec.get("t_prefactor", "1.0")), float(sec.get("t_exponent", "1.0")))
    regime = classify_regime(omega, e_seq, t_seq)
    eps = float(sec.get("epsilon", "1.0"))
    t = float(sec.get("t", "1.0"))
    g1 = float(sec.get("gamma1_at_0", "1.0"))
    triple = scaling_functions(regime, eps, t, g1, omega)
    rec = regime_record(regime, triple)
    rec.update({"module": "scaling", "epsilon": eps, "t": t, "omega": omega, **_provenance(cfg)})
    path = os.path.join(cfg.out_dir, "regime_table.json")
    _write_json(path, rec)
    if cfg.fmt == "csv":
        csv_path = os.path.join(cfg.out_dir, "regime_table.csv")
        _write_csv(
            csv_path,
            ["module", "regime", "epsilon", "t", "alpha", "beta", "H"],
            [["scaling", regime.tag, eps, t, triple.alpha, triple.beta, triple.H]],
            _provenance(cfg),
        )
        return [path, csv_path]
    return [path]


def run(cfg: ExperimentConfig, workers: int = 1) -> int:
    """Execute the configured command; returns a process exit status."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    if cfg.command == "variational":
        outputs = _cmd_variational(cfg)
    elif cfg.command == "noise-sample":
        outputs = _cmd_noise_sample(cfg, workers)
    elif cfg.command == "pam-solve":
        outputs = _cmd_pam_solve(cfg, workers)
    elif cfg.command == "moments":
        outputs = _cmd_moments(cfg)
    elif cfg.command == "regime-table":
        outputs = _cmd_regime_table(cfg)
    else:  # acceptance
        from .acceptance import run_all

        results = run_all(printer=print)
        payload = {
            "module": "acceptance",
            "results": [
                {"index": r.index, "name": r.name, "passed": r.passed, "detail": r.detail}
                for r in results
            ],
            **_provenance(cfg),
        }
        path = os.path.join(cfg.out_dir, "acceptance.json")
        _write_json(path, payload)
        return 0 if all(r.passed for r in results) else 1
    for path in outputs:
        print(path)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="pamlab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="path to the experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the seed list")
    parser.add_argument("--out", default=None, help="override the output directory")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
        if args.seed is not None:
            cfg.seeds = [args.seed]
        if args.out is not None:
            cfg.out_dir = args.out
        if args.format is not None:
            cfg.fmt = args.format
        return run(cfg, workers=max(1, args.workers))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PamlabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
