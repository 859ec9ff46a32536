"""Command-line experiments.

    spikewave COMMAND [--config PATH] [--out DIR] [--jobs N] [--epsilon LIST]
                      [--mode {lv,gp,two-eq}] [--case NAME] [--preset TAG]

Every CSV starts with a ``# config-sha256=...`` comment line; the hash is
taken over the canonical form of the resolved configuration, so identical
inputs give byte-identical files.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, SpikewaveError
from .problem import COUPLING_KEYS, ProblemSpec, exact

COMMANDS = ("ground-state", "interaction", "project", "reduced", "verify", "sweep", "report")
MODES = ("lv", "gp", "two-eq")

_SECTIONS = {
    "problem": ("kind", "components", "dim", "eps", "beta", "mu", "v", "omega", "curvature2", "curvature3"),
    "coupling": COUPLING_KEYS,
    "reduced": ("b", "beta0", "delta", "rel_delta"),
    "grid": ("n", "nx"),
    "sweep": ("epsilon",),
    "ground_state": ("dim", "lam", "mu"),
    "interaction": ("case", "dim", "separations"),
}


def _floats(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration of one experiment (every field has a default)."""

    mode: str = "two-eq"
    preset: str | None = None
    problem: dict = field(default_factory=dict)
    coupling: dict = field(default_factory=dict)
    b: float | None = None
    beta0: float = 0.1
    delta: float | None = None
    rel_delta: float | None = None
    n: int = 256
    nx: int = 256
    epsilon: tuple = (0.05, 0.03, 0.02)
    gs_dim: int = 2
    gs_lam: float = 1.0
    gs_mu: float = 1.0
    case: str = "acr-i"
    case_dim: int = 2
    separations: tuple = (8.0, 10.0, 12.0, 14.0, 16.0)

    def _preset(self) -> dict:
        from . import presets

        tag = self.preset or {"two-eq": "two-eq", "lv": "R3", "gp": "GPEqual"}[self.mode]
        if tag == "two-eq":
            cfg = dict(presets.TWO_EQ)
        elif tag.startswith("grid-"):
            cfg = dict(presets.GRID[tag[5:]])
        elif tag in presets.REDUCED:
            cfg = dict(presets.REDUCED[tag])
        else:
            raise ConfigError(f"unknown preset {tag!r}")
        return cfg

    def base(self) -> dict:
        """Preset that the [problem] and [coupling] keys override."""
        cfg = self._preset()
        cfg.pop("b", None)
        return cfg

    @property
    def exponent(self) -> float:
        """b of the beta schedule: [reduced] b, else the preset's, else 1/2."""
        return self.b if self.b is not None else self._preset().get("b", 0.5)

    def spec(self, eps: float | None = None) -> ProblemSpec:
        p = dict(self.problem)
        kw = self.base()
        if "kind" in p:
            kw["kind"] = p["kind"]
        if "components" in p:
            kw["components"] = int(p["components"])
        for key in ("dim",):
            if key in p:
                kw[key] = int(p[key])
        for key in ("eps", "beta"):
            if key in p:
                kw[key] = float(p[key])
        for key in ("mu", "v"):
            if key in p:
                kw[key] = _floats(p[key])
        if "omega" in p:
            kw["omega"] = tuple(exact(t) for t in p["omega"].split(","))
        curv = list(kw.get("curvature", ((0.0, 0.0), (0.0, 0.0))))
        for pos, key in enumerate(("curvature2", "curvature3")):
            if key in p:
                curv[pos] = _floats(p[key])
        kw["curvature"] = tuple(curv)
        if self.coupling:
            kw["coupling"] = {**kw.get("coupling", {}), **{k: float(v) for k, v in self.coupling.items()}}
        if eps is not None:
            kw["eps"] = eps
        if "beta" not in p and kw.get("kind", "lv") == "lv" and kw.get("components", 3) == 3:
            # three Lotka-Volterra densities follow the schedule beta = beta0 eps^b
            kw["beta"] = self.beta0 * kw.get("eps", 0.02) ** self.exponent
        return ProblemSpec(**kw)

    def rel_delta_for(self, sweeping: bool) -> float:
        """Relative half-width of the admissible intervals: 5% of the centre for
        single runs, 40% along eps sweeps (the 5% interval misses the root at
        eps = 0.05)."""
        if self.rel_delta is not None:
            return self.rel_delta
        return 0.4 if sweeping else 0.05

    def canonical(self) -> str:
        d = {
            "mode": self.mode,
            "preset": self.preset,
            "problem": dict(sorted(self.problem.items())),
            "coupling": dict(sorted(self.coupling.items())),
            "b": self.b, "beta0": self.beta0, "delta": self.delta, "rel_delta": self.rel_delta,
            "n": self.n, "nx": self.nx, "epsilon": list(self.epsilon),
            "ground_state": [self.gs_dim, self.gs_lam, self.gs_mu],
            "interaction": [self.case, self.case_dim, list(self.separations)],
        }
        return json.dumps(d, sort_keys=True)

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def parse_config(text: str = "", **overrides) -> ExperimentConfig:
    """Parse the INI-style grammar (see README) and apply command-line overrides.

    Unknown sections or keys and invalid hypotheses are rejected here.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        for key in cp[sec]:
            if key not in _SECTIONS[sec]:
                raise ConfigError(f"unknown key {key!r} in [{sec}]")
    get = lambda sec, key, default=None: cp.get(sec, key, fallback=default) if cp.has_section(sec) else default
    kw = {}
    try:
        kw["problem"] = dict(cp["problem"]) if cp.has_section("problem") else {}
        kw["coupling"] = dict(cp["coupling"]) if cp.has_section("coupling") else {}
        if get("reduced", "b") is not None:
            kw["b"] = float(get("reduced", "b"))
        if get("reduced", "delta") is not None:
            kw["delta"] = float(get("reduced", "delta"))
        for key in ("beta0", "rel_delta"):
            if get("reduced", key) is not None:
                kw[key] = float(get("reduced", key))
        for key in ("n", "nx"):
            if get("grid", key) is not None:
                kw[key] = int(get("grid", key))
        if get("sweep", "epsilon") is not None:
            kw["epsilon"] = _floats(get("sweep", "epsilon"))
        if get("ground_state", "dim") is not None:
            kw["gs_dim"] = int(get("ground_state", "dim"))
        for key, name in (("lam", "gs_lam"), ("mu", "gs_mu")):
            if get("ground_state", key) is not None:
                kw[name] = float(get("ground_state", key))
        if get("interaction", "case") is not None:
            kw["case"] = get("interaction", "case").strip()
        if get("interaction", "dim") is not None:
            kw["case_dim"] = int(get("interaction", "dim"))
        if get("interaction", "separations") is not None:
            kw["separations"] = _floats(get("interaction", "separations"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    kw.update({k: v for k, v in overrides.items() if v is not None})
    if "mode" not in kw and kw.get("preset"):
        from . import presets

        tag = kw["preset"]
        base = presets.TWO_EQ if tag == "two-eq" else presets.GRID.get(tag[5:], {}) if tag.startswith("grid-") else presets.REDUCED.get(tag, {})
        kw["mode"] = "gp" if base.get("kind") == "gp" else "two-eq" if base.get("components") == 2 else "lv"
    if kw.get("mode", "two-eq") not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    cfg = ExperimentConfig(**kw)
    try:
        cfg.spec()  # hypotheses are checked at parse time
    except (ValueError, ZeroDivisionError, SpikewaveError) as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.mode == "two-eq" and cfg.spec().components != 2:
        raise ConfigError("two-eq mode needs components = 2")
    if (cfg.rel_delta is not None and cfg.rel_delta <= 0) or cfg.beta0 < 0 or cfg.n < 8 or cfg.nx < 8 or not cfg.epsilon:
        raise ConfigError("need rel_delta > 0, beta0 >= 0, n, nx >= 8 and at least one eps")
    if any(not 0 < e < 1 for e in cfg.epsilon):
        raise ConfigError("every eps must lie in (0, 1)")
    return cfg


# ---------------------------------------------------------------- output


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))  # plain repr for numpy scalars too
    if isinstance(x, (tuple, list)):
        return " ".join(_fmt(v) for v in x)
    return str(x)


def write_csv(path: Path, cfg: ExperimentConfig, command: str, header, rows, notes=()) -> Path:
    lines = [f"# config-sha256={cfg.digest} command={command}"]
    lines += [f"# {n}" for n in notes]
    lines.append(",".join(header))
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------- commands


def _regime(cfg: ExperimentConfig, spec: ProblemSpec):
    from .reduced import classify_regime

    return classify_regime(*spec.omega, cfg.mode)


def cmd_ground_state(cfg, out: Path, jobs: int) -> list:
    from .ground_state import decay_plateau, profile_to_csv, solve_ground_state

    p = solve_ground_state(cfg.gs_dim, cfg.gs_lam, cfg.gs_mu)
    prof = out / "ground_state.csv"
    prof.parent.mkdir(parents=True, exist_ok=True)
    prof.write_text(f"# config-sha256={cfg.digest} command=ground-state\n" + profile_to_csv(p))
    r, val = decay_plateau(p)
    spread = float((val.max() - val.min()) / val.mean()) if len(val) else float("nan")
    step = max(1, len(r) // 50)
    rows = [(float(a), float(b)) for a, b in zip(r[::step], val[::step])]
    plat = write_csv(out / "decay_plateau.csv", cfg, "ground-state", ("r", "plateau"), rows, [f"spread={_fmt(spread)}"])
    return [prof, plat]


def cmd_interaction(cfg, out: Path, jobs: int) -> list:
    from .interaction import plateau_spread, ratio_sweep

    est = ratio_sweep(cfg.case, cfg.case_dim, cfg.separations)
    rows = [(e.separation, e.value, e.leading, e.ratio, e.case) for e in est]
    note = f"case={cfg.case} N={cfg.case_dim} spread_last3={_fmt(plateau_spread(est))}"
    return [write_csv(out / f"interaction_{cfg.case}.csv", cfg, "interaction", ("separation", "quadrature", "leading", "ratio", "form"), rows, [note])]


def cmd_project(cfg, out: Path, jobs: int) -> list:
    from .ansatz import build_corrections, project_error
    from .problem import PeakConfiguration
    from .reduced import domain_centers

    rows = []
    for e in cfg.epsilon:
        spec = cfg.spec(e)
        centers = domain_centers(_regime(cfg, spec), cfg.exponent)
        scale = e * abs(math.log(e))
        rho3 = centers[1] * scale if spec.components == 3 else 0.0
        corr = build_corrections(spec, PeakConfiguration(centers[0] * scale, rho3, e), cfg.n, cfg.nx)
        for i, rep in project_error(corr).items():
            rows.append((e, i, rep.numeric, rep.predicted, rep.gap, rep.leading["potential"], rep.leading["self"], rep.b, rep.c))
    header = ("epsilon", "component", "numeric", "predicted", "gap", "potential_term", "self_term", "b", "c")
    return [write_csv(out / "project.csv", cfg, "project", header, rows)]


def _reduced_point(args):
    cfg, e, k, reg, rd = args
    from .errors import NoSignChange
    from .reduced import admissible_domains, beta_schedule, solve_reduced

    spec = cfg.spec(e)
    b = cfg.exponent
    coupled = reg.tag not in ("TwoEq", "GPEqual")
    beta = cfg.beta0 * e**b if coupled else 0.0
    sched = beta_schedule(reg, spec, b, cfg.beta0, e, strict=False).ratios if coupled else {}
    doms = admissible_domains(reg, b, e, cfg.delta, rd)
    try:
        r = solve_reduced(reg, k, e, beta, b, rd, spec.kind)
        roots = (r.rho2, r.rho3, r.ratio2, r.ratio3, _signs(r.signs2), _signs(r.signs3), "ok")
    except NoSignChange as exc:
        nan = float("nan")
        roots = (nan, nan, nan, nan, "", "", f"no sign change: {exc}".replace(",", ";"))
    return (e, *roots, " ".join(f"{_fmt(d.lo)}:{_fmt(d.hi)}" for d in doms), " ".join(f"{n}={_fmt(v)}" for n, v in sorted(sched.items())))


def _signs(s) -> str:
    return "".join("+" if v > 0 else "-" if v < 0 else "0" for v in s)


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


_REDUCED_HEADER = ("epsilon", "rho2", "rho3", "ratio2", "ratio3", "signs2", "signs3", "status", "domains", "schedule")


def cmd_reduced(cfg, out: Path, jobs: int) -> list:
    from .reduced import admissible_domains, reduced_constants

    spec = cfg.spec()
    reg = _regime(cfg, spec)
    k = reduced_constants(spec, reg, b=cfg.exponent)
    b = cfg.exponent
    rd = cfg.rel_delta_for(False)
    doms = admissible_domains(reg, b, spec.eps, cfg.delta, rd)
    row = _reduced_point((cfg, spec.eps, k, reg, rd))
    notes = [
        f"regime={reg.tag} omega2={reg.omega2} omega3={reg.omega3} b={_fmt(b)}",
        f"D2=[{_fmt(doms[0].lo)}, {_fmt(doms[0].hi)}]",
        f"D3=[{_fmt(doms[1].lo)}, {_fmt(doms[1].hi)}]",
        f"limits={_fmt(k.limit_a)},{_fmt(k.limit_b)} b_const={_fmt(k.b)} c_const={_fmt(k.c)}",
    ]
    return [write_csv(out / "reduced.csv", cfg, "reduced", _REDUCED_HEADER, [row], notes)]


def cmd_sweep(cfg, out: Path, jobs: int) -> list:
    from .reduced import increment_ratios, reduced_constants

    spec = cfg.spec()
    reg = _regime(cfg, spec)
    k = reduced_constants(spec, reg, b=cfg.exponent)
    rows = _map(_reduced_point, [(cfg, e, k, reg, cfg.rel_delta_for(True)) for e in cfg.epsilon], jobs)
    notes = [f"regime={reg.tag}"]
    if len(rows) >= 3:
        notes.append("increment_ratios2=" + " ".join(_fmt(x) for x in increment_ratios([r[3] for r in rows])))
    return [write_csv(out / "sweep.csv", cfg, "sweep", _REDUCED_HEADER, rows, notes)]


def _verify_point(args):
    cfg, e, k = args
    from .verifier import predicted_peaks, verify

    spec = cfg.spec(e)
    mode = cfg.mode
    pk = predicted_peaks(spec, k, mode, b=cfg.exponent, rel_delta=cfg.rel_delta_for(True))
    pt = verify(spec, pk, cfg.n, cfg.nx)
    return [(e, q.rho_measured, q.rho_predicted, q.ratio, i, pt.state.iterations, pt.state.residual) for i, q in pt.report.peaks.items()]


def cmd_verify(cfg, out: Path, jobs: int) -> list:
    from .reduced import reduced_constants

    spec = cfg.spec()
    k = reduced_constants(spec, _regime(cfg, spec), b=cfg.exponent)
    results = _map(_verify_point, [(cfg, e, k) for e in cfg.epsilon], jobs)
    files = []
    for comp in spec.singular:
        rows = [r[:4] for res in results for r in res if r[4] == comp]
        extra = [f"component={comp}"] + [f"eps={_fmt(r[0])} iterations={r[5]} residual={_fmt(r[6])}" for res in results for r in res if r[4] == comp]
        name = "verify.csv" if comp == 2 else f"verify_component{comp}.csv"
        files.append(write_csv(out / name, cfg, "verify", ("epsilon", "rho_measured", "rho_predicted", "ratio"), rows, extra))
    return files


def cmd_report(cfg, out: Path, jobs: int) -> list:
    """Summarize every CSV already in ``out`` (JSON plus plain text)."""
    summary = {}
    for path in sorted(out.glob("*.csv")):
        lines = path.read_text().splitlines()
        comments = [l[2:] for l in lines if l.startswith("#")]
        body = [l for l in lines if not l.startswith("#")]
        summary[path.name] = {"comments": comments, "columns": body[0].split(",") if body else [], "rows": max(0, len(body) - 1)}
    js = out / "report.json"
    out.mkdir(parents=True, exist_ok=True)
    js.write_text(json.dumps({"config-sha256": cfg.digest, "files": summary}, indent=2, sort_keys=True) + "\n")
    txt = out / "report.txt"
    parts = [f"config-sha256 {cfg.digest}"]
    for name, s in summary.items():
        parts.append(f"{name}: {s['rows']} rows, columns {', '.join(s['columns'])}")
        parts += [f"    {c}" for c in s["comments"]]
    txt.write_text("\n".join(parts) + "\n")
    return [js, txt]


HANDLERS = {
    "ground-state": cmd_ground_state,
    "interaction": cmd_interaction,
    "project": cmd_project,
    "reduced": cmd_reduced,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spikewave", description="Concentrating standing waves: experiments and checks.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="INI-style configuration file")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    ap.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
    ap.add_argument("--epsilon", help="comma-separated eps list (overrides [sweep] epsilon)")
    ap.add_argument("--mode", choices=MODES, help="coupling mode (default two-eq)")
    ap.add_argument("--case", help="interaction case, e.g. acr-ii-log or pv-1-2")
    ap.add_argument("--preset", help="base configuration: two-eq, R1, R2, R3, R4, GPEqual, grid-R3 or grid-GPEqual")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.config.read_text() if args.config else ""
        eps = _floats(args.epsilon) if args.epsilon else None
        cfg = parse_config(text, mode=args.mode, epsilon=eps, case=args.case, preset=args.preset)
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            files = HANDLERS[args.command](cfg, args.out, args.jobs)
    except (SpikewaveError, OSError) as exc:
        print(f"spikewave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(f)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
