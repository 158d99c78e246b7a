"""Command-line entry point: generate, spectrum, simulate, compare, calibrate, verify, report.

Each run takes a JSON config (``--config``) whose command block is
overridden by flags, writes CSV/JSON outputs under ``--out`` and a
``manifest.json`` recording the resolved config, its hash, seeds and output
digests. A manifest can be passed back as ``--config`` to re-run it.

Exit codes: 0 success, 2 configuration error, 3 acceptance failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import __version__, acceptance, calibrate, netgen, propagate, riskstats, spectral
from .persist import canonical_hash, dump_json, read_rows, write_path, write_rows

EXIT_OK, EXIT_CONFIG, EXIT_CRITERION = 0, 2, 3
COMMANDS = ("generate", "spectrum", "simulate", "compare", "calibrate", "verify", "report")
STOCHASTIC = {"generate", "simulate", "compare"}
SIM_KINDS = ("static", "L", "micro", "reduced")
COMPARE_MODES = ("twomode", "network")

DEFAULTS = {
    "generate": {"n": 100, "alpha": 1.5, "beta": 0.4, "gamma_mode": "uniform", "alignment": "uniform"},
    "spectrum": {"tol": 1e-10},
    "simulate": {"kind": "L", "L": 1, "T": 1000, "sigma": 1.0, "b": 1.0, "convention": "lagged",
                 "demeaned": False},
    "compare": {"mode": "twomode", "lambda2": 0.5, "b": 1.0, "sigma": 1.0, "T": 200_000, "reps": 8,
                "c": 2.0, "convention": "lagged", "L": [1, 100]},
    "calibrate": {"grid": list(calibrate.DEFAULT_GRID), "shares": list(calibrate.DEFAULT_SHARES)},
    "verify": {"level": "fast", "tamper_lambda2": 0.0},
    "report": {},
}


class ConfigError(ValueError):
    """Invalid or incomplete run configuration; ``key`` names the offending field."""

    def __init__(self, key, msg):
        super().__init__(f"config error in '{key}': {msg}")
        self.key = key


class CriterionFailure(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    params: dict
    out: str = "out"
    run_id: str = ""
    seed: int | None = None
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("out")
        d.pop("threads")
        return canonical_hash(d)


@dataclass
class RunManifest:
    command: str
    config: dict
    config_hash: str
    version: str
    wall_clock: float
    seeds: dict
    outputs: dict = field(default_factory=dict)

    def write(self, out_dir: Path) -> Path:
        return dump_json(asdict(self), out_dir / "manifest.json")


# configuration ----------------------------------------------------------------

def _file_digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_config(path) -> tuple[dict, str | None]:
    """Return ``(document, command)``; a manifest yields its stored config and command."""
    try:
        doc = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("--config", f"file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ConfigError("--config", "top level must be an object")
    if "config_hash" in doc and "config" in doc:
        cfg = doc["config"]
        return {"seed": cfg.get("seed"), "run_id": cfg.get("run_id", ""), cfg["command"]: cfg["params"]}, cfg["command"]
    return doc, doc.get("command")


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def resolve_config(args, doc: dict, command: str) -> ExperimentConfig:
    params = dict(DEFAULTS[command])
    block = doc.get(command, {})
    if not isinstance(block, dict):
        raise ConfigError(command, "block must be an object")
    params.update(block)
    for key, value in vars(args).items():
        if key.startswith("p_") and value is not None:
            params[key[2:]] = value
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError("--set", f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = _parse_value(v)
    seed = args.seed if args.seed is not None else params.get("seed", doc.get("seed"))
    if seed is not None:
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {seed!r}")
        params["seed"] = seed
    if command in STOCHASTIC and seed is None:
        raise ConfigError("seed", f"'{command}' is stochastic; pass --seed or set a seed in the config")
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads", "must be at least 1")
    out = args.out if args.out is not None else doc.get("out", "out")
    return ExperimentConfig(command, params, str(out), str(doc.get("run_id", "")), seed,
                            args.threads if args.threads is not None else int(doc.get("threads", 1)))


def _num(params, key, kind=float, lo=None, hi=None, lo_open=False, hi_open=False):
    v = params.get(key)
    try:
        if isinstance(v, bool) or v is None:
            raise TypeError
        v = kind(v)
        if kind is int and float(params[key]) != v:
            raise TypeError
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {kind.__name__}, got {params.get(key)!r}") from None
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(key, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and (v >= hi if hi_open else v > hi):
        raise ConfigError(key, f"must be {'<' if hi_open else '<='} {hi}, got {v}")
    return v


def _choice(params, key, options):
    v = params.get(key)
    if v not in options:
        raise ConfigError(key, f"must be one of {options}, got {v!r}")
    return v


def _network_block(params, key="alpha"):
    n = _num(params, "n", int, lo=2)
    if not params.get("alpha", 0) or float(params["alpha"]) <= 1.0:
        raise ConfigError(key, f"alpha must be > 1 for a normalizable degree tail, got {params.get('alpha')!r}")
    alpha = _num(params, "alpha", float, lo=1.0, lo_open=True)
    beta = _num(params, "beta", float, lo=0.0, hi=1.0, lo_open=True)
    gamma_mode = _choice(params, "gamma_mode", netgen.GAMMA_MODES)
    alignment = _choice(params, "alignment", netgen.ALIGNMENTS)
    return n, alpha, beta, gamma_mode, alignment


def _load_network(params, seed):
    """A network from a CSV path (``network``) or an inline block (``network: {n, alpha, beta, ...}``)."""
    src = params.get("network")
    if src is None:
        raise ConfigError("network", "give an edge-list path or a {n, alpha, beta} block")
    if isinstance(src, str):
        try:
            return netgen.ingest_network(src, beta=params.get("beta"))
        except (OSError, netgen.NetworkError) as exc:
            raise ConfigError("network", str(exc)) from None
    if isinstance(src, dict):
        block = {**DEFAULTS["generate"], **src}
        n, alpha, beta, gamma_mode, alignment = _network_block(block)
        s = block.get("seed", seed)
        if s is None:
            raise ConfigError("network.seed", "inline network needs a seed")
        try:
            return netgen.random_network(n, alpha, beta, s, alignment, gamma_mode)
        except netgen.NetworkError as exc:
            raise ConfigError("network", str(exc)) from None
    raise ConfigError("network", f"unsupported value {src!r}")


def _lambda2(params, key="lambda2"):
    v = params.get(key)
    if isinstance(v, dict):
        v = complex(float(v.get("real", 0.0)), float(v.get("imag", 0.0)))
    elif isinstance(v, str):
        try:
            v = complex(v.replace(" ", ""))
        except ValueError:
            raise ConfigError(key, f"cannot parse {v!r}") from None
    if isinstance(v, complex):
        if v.imag != 0.0:
            raise ConfigError(key, "complex transient eigenvalue: the scalar two-mode path is refused; "
                                   "run 'compare' with mode=network to simulate the full network instead")
        v = v.real
    return _num({key: v}, key, float, lo=0.0, hi=1.0, hi_open=True)


# commands ----------------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig, out: Path, log) -> dict:
    n, alpha, beta, gamma_mode, alignment = _network_block(cfg.params)
    try:
        net = netgen.random_network(n, alpha, beta, cfg.seed, alignment, gamma_mode)
    except netgen.NetworkError as exc:
        raise ConfigError("network", str(exc)) from None
    path = netgen.write_network(net, out / "network.csv",
                                {"alpha": alpha, "seed": cfg.seed, "gamma_mode": gamma_mode})
    d = net.degrees.degrees.astype(np.float64)
    mom = netgen.degree_moments(alpha, n)
    rows = [{"moment": "mean", "empirical": float(d.mean()), "closed_form": mom.mean},
            {"moment": "variance", "empirical": float(d.var()), "closed_form": mom.variance}]
    write_rows(rows, out / "degree_moments.csv")
    for r in rows:
        log(f"{r['moment']:>8}: empirical {r['empirical']:.6g}  closed form {r['closed_form']:.6g}")
    colsum = np.asarray(net.A.sum(axis=0)).ravel()
    log(f"column sums in [{colsum.min():.12g}, {colsum.max():.12g}] (target {1 - beta:.12g})")
    return {"network": path, "network_sidecar": netgen.sidecar_path(path), "degree_moments": out / "degree_moments.csv"}


def cmd_spectrum(cfg: ExperimentConfig, out: Path, log) -> dict:
    p = cfg.params
    if p.get("window_T") is not None:
        lam = _lambda2(p)
        T = _num(p, "window_T", int, lo=2)
        spec = riskstats.finite_T_spectra(lam, T)
        rows = [{"j": j + 1, "nu_star": float(a), "nu": float(b)} for j, (a, b) in enumerate(zip(spec.nu_star, spec.nu))]
        path = write_rows(rows, out / "window_spectrum.csv")
        chk = riskstats.fosd_check(spec)
        log(f"T={T} lambda2={lam}: mean nu {spec.nu.sum() / (T - 1):.6g}, nu_max {spec.nu_max:.6g}, "
            f"dominance condition {'holds' if chk['condition_holds'] else 'fails'}")
        return {"window_spectrum": path}
    net = _load_network(p, cfg.seed)
    tol = _num(p, "tol", float, lo=0.0, lo_open=True)
    try:
        summary = spectral.summarize(net, tol=tol)
    except spectral.SpectralError as exc:
        raise ConfigError("network", str(exc)) from None
    d = summary.to_dict()
    d["network_hash"] = net.digest()
    path = dump_json(d, out / "spectrum.json")
    lam2 = complex(summary.lambda2, summary.lambda2_imag)
    log(f"lambda1 {summary.lambda1:.12g}  lambda2 {lam2:.6g}  |lambda2| {summary.lambda2_mod:.6g}"
        + ("" if summary.b is None else f"  b {summary.b:.6g}"))
    if summary.lambda2_complex:
        log("dominant transient is a complex pair; the scalar two-mode reduction does not apply")
    return {"spectrum": path}


def cmd_simulate(cfg: ExperimentConfig, out: Path, log) -> dict:
    p = cfg.params
    kind = _choice(p, "kind", SIM_KINDS)
    T = _num(p, "T", int, lo=2)
    sigma = _num(p, "sigma", float, lo=0.0)
    if kind == "reduced":
        lam = _lambda2(p)
        b = _num(p, "b", float)
        conv = _choice(p, "convention", propagate.CONVENTIONS)
        eta = sigma * np.random.default_rng(cfg.seed).standard_normal(T)
        path_obj = propagate.simulate_reduced(lam, b, eta, conv, seed=cfg.seed)
    else:
        ss_net, ss_shock = np.random.SeedSequence(cfg.seed).spawn(2)
        net = _load_network(p, ss_net)
        panel = propagate.draw_shocks(net.n, T, sigma, ss_shock)
        if kind == "static":
            path_obj = propagate.static_series(net, panel, demeaned=bool(p["demeaned"]))
        elif kind == "L":
            L = _num(p, "L", int, lo=1)
            path_obj = propagate.simulate_L_economy(net, panel, L, demeaned=bool(p["demeaned"]))
        else:
            try:
                path_obj = propagate.simulate_micro(net, panel)
            except propagate.SolverError as exc:
                raise ConfigError("network", str(exc)) from None
        path_obj.seed = cfg.seed
    path = write_path(path_obj, out / "path.csv")
    log(f"{kind} path, T={T}: realized volatility {riskstats.realized_volatility(path_obj):.6g}")
    return {"path": path, "path_sidecar": path.with_name(path.name + ".json")}


def _twomode_rep(lam, b, sigma, T, c, conv, seed):
    eta = sigma * np.random.default_rng(seed).standard_normal(T)
    y = propagate.simulate_reduced(lam, b, eta, conv)
    y_star = propagate.static_series_reduced(lam, b, eta)
    phi, phi_star = riskstats.twomode_variances(b, lam, sigma)
    return riskstats.risk_report(y, y_star, phi, phi_star, c, {"lambda2": lam})


def _ratio(a, b):
    return a / b if b > 0 else 0.0


def _summary_row(rows, keys, **extra):
    out = {"rep": "summary", **extra}
    for k in keys:
        vals = np.array([r[k] for r in rows], dtype=np.float64)
        out[k] = float(vals.mean())
        out[k + "_se"] = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
    return out


def cmd_compare(cfg: ExperimentConfig, out: Path, log) -> dict:
    p = cfg.params
    mode = _choice(p, "mode", COMPARE_MODES)
    T = _num(p, "T", int, lo=3)
    sigma = _num(p, "sigma", float, lo=0.0)
    reps = _num(p, "reps", int, lo=1)
    c = _num(p, "c", float, lo=0.0, lo_open=True)
    seeds = np.random.SeedSequence(cfg.seed).spawn(reps + 1)
    rows = []
    if mode == "twomode":
        if p.get("network") is not None and p.get("lambda2_from_network"):
            net = _load_network(p, seeds[-1])
            summary = spectral.summarize(net)
            try:
                lam, b = spectral.twomode_parameters(summary)
            except spectral.ComplexModeError as exc:
                raise ConfigError("lambda2", f"{exc}; set mode=network") from None
        else:
            lam, b = _lambda2(p), _num(p, "b", float)
        conv = _choice(p, "convention", propagate.CONVENTIONS)
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            reports = list(pool.map(lambda s: _twomode_rep(lam, b, sigma, T, c, conv, s), seeds[:reps]))
        for k, rep in enumerate(reports):
            d = rep.to_dict()
            d.pop("meta")
            rows.append({"rep": k, "lambda2": lam, **d, "ratio": _ratio(rep.phi_hat, rep.phi_hat_star)})
        keys = ["phi_hat", "phi_hat_star", "omega_hat_c", "omega_hat_c_star", "ratio"]
        rows.append(_summary_row(rows, keys, lambda2=lam, phi=rows[0]["phi"], phi_star=rows[0]["phi_star"],
                                 R=rows[0]["R"], kappa=rows[0]["kappa"], c=c))
        log(f"mean phi_hat/phi_hat* {rows[-1]['ratio']:.6g} (population {rows[0]['R']:.6g}) over {reps} reps")
    else:
        Ls = p["L"] if isinstance(p["L"], list) else [p["L"]]
        Ls = [_num({"L": L}, "L", int, lo=1) for L in Ls]
        net = _load_network(p, seeds[-1])
        phi_star = riskstats.population_static_variance(net, sigma) if sigma > 0 else 0.0
        phis = {L: (riskstats.population_L_variance(net, sigma, L) if sigma > 0 else 0.0) for L in Ls}

        def one(k):
            panel = propagate.draw_shocks(net.n, T, sigma, seeds[k])
            y_star = propagate.static_series(net, panel)
            out_rows = []
            for L in Ls:
                y = propagate.simulate_L_economy(net, panel, L)
                rep = riskstats.risk_report(y, y_star, phis[L], phi_star, c, {"L": L})
                d = rep.to_dict()
                d.pop("meta")
                out_rows.append({"rep": k, "L": L, **d, "ratio": _ratio(rep.phi_hat, rep.phi_hat_star)})
            return out_rows

        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            for chunk in pool.map(one, range(reps)):
                rows.extend(chunk)
        keys = ["phi_hat", "phi_hat_star", "omega_hat_c", "omega_hat_c_star", "ratio"]
        lo, hi = min(Ls), max(Ls)
        by_rep = {}
        for r in rows:
            by_rep.setdefault(r["rep"], {})[r["L"]] = r["phi_hat"]
        ordered = sum(v[hi] >= v[lo] for v in by_rep.values()) / reps
        for L in Ls:
            sub = [r for r in rows if r["rep"] != "summary" and r["L"] == L]
            rows.append(_summary_row(sub, keys, L=L, phi=phis[L], phi_star=phi_star,
                                     share_deep_ge_shallow=ordered))
        log(f"share of reps with phi_hat(L={hi}) >= phi_hat(L={lo}): {ordered:.3f}")
    path = write_rows(rows, out / "compare.csv")
    return {"compare": path}


def cmd_calibrate(cfg: ExperimentConfig, out: Path, log) -> dict:
    p = cfg.params
    grid = [_lambda2({"g": g}, "g") for g in p["grid"]]
    shares = [_num({"s": s}, "s", float, lo=0.0, hi=1.0, lo_open=True) for s in p["shares"]]
    table = calibrate.attenuation_table(grid, shares)
    rows = []
    for r in table.to_records():
        r["description"] = calibrate.describe_share(r["dynamic_share"])
        rows.append(r)
        log(f"lambda2 {r['lambda2']:.2f}  R {r['R']:.4f}  static share {r['static_share']:.3f} -> "
            f"{r['dynamic_share']:.4f} ({r['description']})")
    outputs = {"calibration": write_rows(rows, out / "calibration.csv")}
    sens = p.get("sensitivity")
    if sens:
        if cfg.seed is None and sens.get("seed") is None:
            raise ConfigError("sensitivity.seed", "sensitivity needs degrees drawn from a seed")
        alpha = _num(sens, "alpha", float, lo=1.0, lo_open=True)
        n = _num({"n": sens.get("n", 1000)}, "n", int, lo=2)
        deg = netgen.sample_degrees(n, alpha, sens.get("seed", cfg.seed))
        gamma = netgen.consumption_weights(n, sens.get("gamma_mode", "degree-proportional"), deg.degrees)
        try:
            mapping = calibrate.lambda2_mapping(sens.get("mapping", {"type": "linear", "intercept": 0.9,
                                                                     "slope": -0.2, "alpha0": 1.0}))
            rep = calibrate.sensitivity_decomposition(alpha, mapping, deg.degrees, gamma,
                                                      float(sens.get("sigma", 1.0)), float(sens.get("b_scale", 1.0)),
                                                      int(sens.get("T", 100)))
        except (ValueError, calibrate.CrossingError) as exc:
            raise ConfigError("sensitivity", str(exc)) from None
        outputs["sensitivity"] = dump_json(rep.to_dict(), out / "sensitivity.json")
        log(f"alpha {alpha}: exposure {rep.exposure_channel:.6g}  overlap {rep.overlap_channel:.6g}  "
            f"total {rep.total:.6g}")
    return outputs


def cmd_verify(cfg: ExperimentConfig, out: Path, log) -> dict:
    p = cfg.params
    level = _choice(p, "level", acceptance.LEVELS)
    tamper = _num(p, "tamper_lambda2", float)
    suite = acceptance.SuiteConfig(level, cfg.seed if cfg.seed is not None else acceptance.DEFAULT_SEED, tamper)
    only = p.get("only")
    results = acceptance.run_suite(suite, only=set(only) if only else None, echo=log)
    path = acceptance.write_ledger(results, out / "verify_ledger.csv")
    failed = [r.id for r in results if not r.passed]
    log(f"{len(results) - len(failed)}/{len(results)} checks passed" + (f"; failed: {', '.join(failed)}" if failed else ""))
    if failed:
        raise CriterionFailure(path)
    return {"verify_ledger": path}


def cmd_report(cfg: ExperimentConfig, out: Path, log) -> dict:
    p = cfg.params
    src = p.get("input")
    if src is None:
        src = out / "compare.csv"
    src = Path(src)
    if not src.exists():
        raise ConfigError("input", f"no compare table at {src}")
    rows = [r for r in read_rows(src) if r.get("rep") != "summary"]
    if not rows:
        raise ConfigError("input", f"{src} has no replication rows")
    group_key = "L" if "L" in rows[0] and rows[0]["L"] != "" else "lambda2"
    groups = {}
    for r in rows:
        groups.setdefault(r[group_key], []).append(r)
    table = []
    for g, rs in groups.items():
        ratio = np.array([float(r["ratio"]) for r in rs])
        phi_hat = np.array([float(r["phi_hat"]) for r in rs])
        table.append({group_key: g, "reps": len(rs), "phi": float(rs[0]["phi"]), "phi_star": float(rs[0]["phi_star"]),
                      "phi_hat_mean": float(phi_hat.mean()), "ratio_mean": float(ratio.mean()),
                      "ratio_se": float(ratio.std(ddof=1) / math.sqrt(len(rs))) if len(rs) > 1 else 0.0})
        log(f"{group_key}={g}: reps {len(rs)}  mean phi_hat {phi_hat.mean():.6g}  mean ratio {ratio.mean():.6g}")
    return {"report": write_rows(table, out / "report.csv")}


HANDLERS = {
    "generate": cmd_generate,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "calibrate": cmd_calibrate,
    "verify": cmd_verify,
    "report": cmd_report,
}


# parser -----------------------------------------------------------------------

def _globals(parser, suppress):
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", metavar="PATH", default=d, help="JSON run config or a previous manifest.json")
    parser.add_argument("--out", metavar="DIR", default=d, help="output directory (default: out)")
    parser.add_argument("--seed", metavar="U64", type=int, default=d, help="root seed for every random stream")
    parser.add_argument("--threads", metavar="N", type=int, default=d, help="worker threads for replications")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append", default=d,
                        help="override a field of the command block (value parsed as JSON)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prodwave", description="Shock propagation and volatility attenuation in production networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    g = sub.add_parser("generate", help="random production network to CSV")
    _globals(g, True)
    g.add_argument("--n", dest="p_n", type=int)
    g.add_argument("--alpha", dest="p_alpha", type=float)
    g.add_argument("--beta", dest="p_beta", type=float)
    g.add_argument("--gamma-mode", dest="p_gamma_mode", choices=netgen.GAMMA_MODES)
    g.add_argument("--alignment", dest="p_alignment", choices=netgen.ALIGNMENTS)

    s = sub.add_parser("spectrum", help="Perron and dominant transient pairs, or window spectra")
    _globals(s, True)
    s.add_argument("--network", dest="p_network", metavar="CSV")
    s.add_argument("--lambda2", dest="p_lambda2", type=float, help="with --window-T, spectra of the window forms")
    s.add_argument("--window-T", dest="p_window_T", type=int)

    m = sub.add_parser("simulate", help="one aggregate output path")
    _globals(m, True)
    m.add_argument("--kind", dest="p_kind", choices=SIM_KINDS)
    m.add_argument("--network", dest="p_network", metavar="CSV")
    m.add_argument("--L", dest="p_L", type=int)
    m.add_argument("--T", dest="p_T", type=int)
    m.add_argument("--sigma", dest="p_sigma", type=float)
    m.add_argument("--lambda2", dest="p_lambda2", type=float)
    m.add_argument("--b", dest="p_b", type=float)
    m.add_argument("--convention", dest="p_convention", choices=propagate.CONVENTIONS)

    c = sub.add_parser("compare", help="coupled static/dynamic replications with population values")
    _globals(c, True)
    c.add_argument("--mode", dest="p_mode", choices=COMPARE_MODES)
    c.add_argument("--network", dest="p_network", metavar="CSV")
    c.add_argument("--lambda2", dest="p_lambda2", type=float)
    c.add_argument("--b", dest="p_b", type=float)
    c.add_argument("--sigma", dest="p_sigma", type=float)
    c.add_argument("--T", dest="p_T", type=int)
    c.add_argument("--reps", dest="p_reps", type=int)
    c.add_argument("--c", dest="p_c", type=float, help="tail threshold")
    c.add_argument("--L", dest="p_L", type=int, nargs="+")

    k = sub.add_parser("calibrate", help="attenuation table and implied granular shares")
    _globals(k, True)
    k.add_argument("--grid", dest="p_grid", type=float, nargs="+")
    k.add_argument("--shares", dest="p_shares", type=float, nargs="+")

    v = sub.add_parser("verify", help="run the acceptance suite")
    _globals(v, True)
    v.add_argument("level", nargs="?", choices=acceptance.LEVELS, default=None)
    v.add_argument("--only", dest="p_only", type=int, nargs="+", metavar="K")
    v.add_argument("--tamper-lambda2", dest="p_tamper_lambda2", type=float, help=argparse.SUPPRESS)

    r = sub.add_parser("report", help="summarize a compare table")
    _globals(r, True)
    r.add_argument("--input", dest="p_input", metavar="CSV")
    return parser


def main(argv=None, log=print) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("config", "out", "seed", "threads", "set"):
        if not hasattr(args, name):
            setattr(args, name, None)
    if getattr(args, "level", None) is not None:
        args.p_level = args.level
    started = time.perf_counter()
    try:
        doc, stored = load_config(args.config) if args.config else ({}, None)
        command = args.command or stored or doc.get("command")
        if command not in COMMANDS:
            raise ConfigError("command", f"choose one of {COMMANDS}")
        if args.command is None:
            # replaying a manifest: no subcommand flags were parsed
            for key in list(vars(args)):
                if key.startswith("p_"):
                    delattr(args, key)
        cfg = resolve_config(args, doc, command)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        outputs = HANDLERS[command](cfg, out, log)
    except ConfigError as exc:
        print(f"prodwave: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CriterionFailure as exc:
        print(f"prodwave: acceptance failures recorded in {exc}", file=sys.stderr)
        return EXIT_CRITERION
    manifest = RunManifest(
        command=command,
        config=cfg.to_dict(),
        config_hash=cfg.digest(),
        version=__version__,
        wall_clock=time.perf_counter() - started,
        seeds={"root": cfg.seed},
        outputs={k: {"path": str(v), "sha256": _file_digest(Path(v))} for k, v in outputs.items()},
    )
    manifest.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
