"""Command-line front end: ``gapcount <command> --config <path> [--out <dir>]``.

Commands: bands, effective, oracle, asympt, report. Configurations are INI
files with sections [field], [potential], [grid], [lambda], [oracle], [output]
and optional [gap] and [asympt]. Exit codes: 0 ok, 2 configuration error,
3 numerical error, 4 threshold failure (report only).
"""

import argparse
import configparser
import csv
import math
import os
import sys
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import __version__
from .asympt import corridor_constants, fit_sqrt_log, fit_volume_ratio
from .effective import (DEFAULT_DELTA, KGrid, auto_kgrid, build_effective, counting_curve,
                        finiteness_probe, gap_width)
from .errors import ConfigurationError, NumericalError
from .fiber import compute_bands
from .field import FieldSpec, PotentialB, x_plus
from .oracle2d import (DEFAULT_CAP, SCHEMES, Box2D, oracle_rows, refinement_study)
from .potentials import make_potential
from .regions import RegionSpec

COMMANDS = ("bands", "effective", "oracle", "asympt", "report")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_THRESHOLD = 0, 2, 3, 4
ORACLE_SLACK = 3

BANDS_COLUMNS = ("k", "j", "E_j", "gap", "ratio")
COUNTING_COLUMNS = ("lambda", "count_lower", "count_upper", "log_abs_log_lambda_sqrt")
ORACLE_COLUMNS = ("box_id", "a", "b", "count_H", "count_H0", "diff")
FIT_COLUMNS = ("model", "coefficient", "residual_norm", "points_used")

# allowed keys per section, with defaults (None = required or derived)
SCHEMA = {
    "field": {"kind": None, "B_minus": None, "B_plus": None, "center": "0", "width": "1",
              "samples": None},
    "potential": {"kind": "zero", "amplitude": "1", "width": "1", "x_center": "0",
                  "xi_center": "0", "xi_width": None, "m": None, "region": None,
                  "region_params": None},
    "grid": {"j": "1", "j_max": "3", "k_min": "-5", "k_max": "5", "n_k": "21", "band_h": None,
             "kernel_grid": "auto", "kernel_k_min": None, "kernel_k_max": None,
             "kernel_n_k": None, "oversample": "4", "max_nk": "20000"},
    "lambda": {"lambda_grid": None, "lambda_values": None, "delta": str(DEFAULT_DELTA)},
    "gap": {"upper": None},
    "oracle": {"enabled": "no", "boxes": None, "scheme": "peierls", "cap": str(DEFAULT_CAP),
               "refinement_tol": "1"},
    "asympt": {"b_const": None},
    "output": {"dir": "gapcount-out"},
}


def fmt(v):
    """17 significant digits for floats, plain ints, 'nan' for missing."""
    if v is None:
        return "nan"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


@dataclass
class RunConfig:
    field: FieldSpec
    potential: object
    j: int
    j_max: int
    band_ks: np.ndarray
    band_h: float
    kernel_grid: object
    oversample: float
    max_nk: int
    lambdas: np.ndarray
    delta: float
    gap_upper: float
    oracle_enabled: bool
    boxes: list
    scheme: str
    cap: int
    refinement_tol: int
    b_const: float
    out_dir: str
    echo: dict = dc_field(default_factory=dict)

    @property
    def pot(self):
        return PotentialB(self.field)


# -- parsing -------------------------------------------------------------------

def _num(sec, key, cast=float):
    try:
        return cast(sec[key])
    except (TypeError, ValueError):
        raise ConfigurationError(f"[{key}] is not a valid number: {sec[key]!r}", key=key) from None


def _floats(text, key):
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigurationError(f"[{key}] must be a list of numbers", key=key) from None


def _bool(text, key):
    t = text.strip().lower()
    if t in ("1", "yes", "true", "on"):
        return True
    if t in ("0", "no", "false", "off"):
        return False
    raise ConfigurationError(f"[{key}] must be yes or no", key=key)


def _read_sections(text):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed configuration: {exc}", key="config") from None
    secs = {}
    for name in cp.sections():
        if name not in SCHEMA:
            raise ConfigurationError(f"unknown section [{name}]", key=name)
        for key in cp[name]:
            if key not in SCHEMA[name]:
                raise ConfigurationError(f"unknown key {key!r} in [{name}]", key=key)
        secs[name] = dict(SCHEMA[name])
        secs[name].update({k: v.strip() for k, v in cp[name].items()})
    for name in SCHEMA:
        secs.setdefault(name, dict(SCHEMA[name]))
    if "field" not in cp:
        raise ConfigurationError("missing section [field]", key="field")
    return secs


def _parse_field(sec):
    kind = sec["kind"]
    if kind is None:
        raise ConfigurationError("missing required key", key="kind")
    if kind == "custom-sampled":
        if sec["samples"] is None:
            raise ConfigurationError("missing required key", key="samples")
        vals = _floats(sec["samples"], "samples")
        if len(vals) % 2:
            raise ConfigurationError("samples must be x B pairs", key="samples")
        xs, Bs = vals[0::2], vals[1::2]
        Bm = _num(sec, "B_minus") if sec["B_minus"] is not None else None
        Bp = _num(sec, "B_plus") if sec["B_plus"] is not None else None
        return FieldSpec.sampled(xs, Bs, Bm, Bp)
    if sec["B_plus"] is None:
        raise ConfigurationError("missing required key", key="B_plus")
    Bp = _num(sec, "B_plus")
    if kind == "constant":
        Bm = _num(sec, "B_minus") if sec["B_minus"] is not None else Bp
        if Bm != Bp:
            raise ConfigurationError("constant field needs B_minus == B_plus", key="B_minus")
        return FieldSpec.constant(Bp)
    if kind == "smooth-step":
        if sec["B_minus"] is None:
            raise ConfigurationError("missing required key", key="B_minus")
        return FieldSpec.smooth_step(_num(sec, "B_minus"), Bp, _num(sec, "center"), _num(sec, "width"))
    raise ConfigurationError(f"unknown field kind {kind!r}", key="kind")


def _parse_region(sec):
    kind = sec["region"]
    if kind is None or sec["region_params"] is None:
        raise ConfigurationError("indicator potential needs region and region_params",
                                 key="region" if kind is None else "region_params")
    p = _floats(sec["region_params"], "region_params")
    if kind == "rectangle" and len(p) == 4:
        return RegionSpec.rectangle(*p)
    if kind == "disc" and len(p) == 3:
        return RegionSpec.disc(*p)
    if kind == "polygon" and len(p) >= 6 and len(p) % 2 == 0:
        return RegionSpec.polygon(list(zip(p[0::2], p[1::2])))
    raise ConfigurationError(f"bad parameters for region {kind!r}", key="region_params")


def _parse_potential(sec):
    kind = sec["kind"]
    if kind == "zero":
        return make_potential("zero")
    if kind == "gaussian":
        xw = _num(sec, "xi_width") if sec["xi_width"] is not None else None
        return make_potential("gaussian", amplitude=_num(sec, "amplitude"), width=_num(sec, "width"),
                              x_center=_num(sec, "x_center"), xi_center=_num(sec, "xi_center"),
                              xi_width=xw)
    if kind == "power-law":
        if sec["m"] is None:
            raise ConfigurationError("missing required key", key="m")
        return make_potential("power-law", m=_num(sec, "m"), amplitude=_num(sec, "amplitude"),
                              x_center=_num(sec, "x_center"), xi_center=_num(sec, "xi_center"))
    if kind == "indicator":
        return make_potential("indicator", amplitude=_num(sec, "amplitude"), region=_parse_region(sec))
    raise ConfigurationError(f"unknown potential kind {kind!r}", key="kind")


def _parse_lambdas(sec):
    if sec["lambda_values"] is not None:
        lams = np.array(sorted(_floats(sec["lambda_values"], "lambda_values")))
    elif sec["lambda_grid"] is not None:
        v = _floats(sec["lambda_grid"], "lambda_grid")
        if len(v) != 3 or v[2] != int(v[2]) or v[2] < 1:
            raise ConfigurationError("lambda_grid is 'lambda_min lambda_max count'", key="lambda_grid")
        if not 0 < v[0] <= v[1]:
            raise ConfigurationError("lambda_grid needs 0 < lambda_min <= lambda_max", key="lambda_grid")
        lams = np.geomspace(v[0], v[1], int(v[2]))
    else:
        raise ConfigurationError("missing required key", key="lambda_grid")
    if lams.size == 0 or np.any(lams <= 0):
        raise ConfigurationError("lambdas must be positive", key="lambda_grid")
    return lams


def _parse_boxes(text, cap):
    boxes = []
    if text is None:
        return boxes
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        v = _floats(chunk, "boxes")
        if len(v) != 6 or v[4] != int(v[4]) or v[5] != int(v[5]):
            raise ConfigurationError("each box is 'x0 x1 y0 y1 nx ny'", key="boxes")
        x0, x1, y0, y1, nx, ny = v
        if not (x1 > x0 and y1 > y0):
            raise ConfigurationError("box needs x1 > x0 and y1 > y0", key="boxes")
        box = Box2D(0.5 * (x1 - x0), 0.5 * (y1 - y0), int(nx), int(ny), 0.5 * (x0 + x1), 0.5 * (y0 + y1))
        if box.size > cap:
            raise ConfigurationError(f"box has {box.size} unknowns, cap is {cap}", key="boxes")
        boxes.append(box)
    return boxes


def parse_config(text, out_override=None):
    """Validate a configuration document and fill in defaults."""
    secs = _read_sections(text)
    fs = _parse_field(secs["field"])
    V = _parse_potential(secs["potential"])
    g = secs["grid"]
    j = _num(g, "j", int)
    if j < 1:
        raise ConfigurationError("band index must be >= 1", key="j")
    j_max = max(_num(g, "j_max", int), j)
    n_k = _num(g, "n_k", int)
    k_min, k_max = _num(g, "k_min"), _num(g, "k_max")
    if n_k < 1 or (n_k > 1 and not k_max > k_min):
        raise ConfigurationError("band grid needs n_k >= 1 and k_max > k_min", key="n_k")
    band_h = _num(g, "band_h") if g["band_h"] is not None else 0.05 / math.sqrt(fs.B_plus)
    if not band_h > 0:
        raise ConfigurationError("band_h must be positive", key="band_h")
    if g["kernel_grid"] == "auto":
        kgrid = "auto"
    elif g["kernel_grid"] == "explicit":
        for key in ("kernel_k_min", "kernel_k_max", "kernel_n_k"):
            if g[key] is None:
                raise ConfigurationError("missing required key", key=key)
        kgrid = KGrid(_num(g, "kernel_k_min"), _num(g, "kernel_k_max"), _num(g, "kernel_n_k", int))
    else:
        raise ConfigurationError("kernel_grid must be auto or explicit", key="kernel_grid")
    oversample = _num(g, "oversample")
    max_nk = _num(g, "max_nk", int)
    if not oversample > 0 or max_nk < 2:
        raise ConfigurationError("oversample must be positive and max_nk >= 2", key="oversample")

    lam_sec = secs["lambda"]
    delta = _num(lam_sec, "delta")
    if not 0 < delta < 1:
        raise ConfigurationError(f"delta = {delta} must lie in (0, 1)", key="delta")
    lams = _parse_lambdas(lam_sec)
    pot = PotentialB(fs)
    width = gap_width(pot, j)
    if not width > 0:
        raise ConfigurationError(f"no spectral gap above band {j} (width {width})", key="j")
    upper = width
    if secs["gap"]["upper"] is not None:
        upper = _num(secs["gap"], "upper")
        if not 0 < upper <= width:
            raise ConfigurationError(f"gap upper bound must lie in (0, {width}]", key="upper")
    if lams.max() >= upper:
        raise ConfigurationError(f"lambda_max = {lams.max()} is not below the gap width {upper}",
                                 key="lambda_grid")

    o = secs["oracle"]
    cap = _num(o, "cap", int)
    if o["scheme"] not in SCHEMES:
        raise ConfigurationError(f"unknown scheme {o['scheme']!r}", key="scheme")
    enabled = _bool(o["enabled"], "enabled")
    boxes = _parse_boxes(o["boxes"], cap)
    if enabled and not boxes:
        raise ConfigurationError("oracle enabled without boxes", key="boxes")
    b_const = _num(secs["asympt"], "b_const") if secs["asympt"]["b_const"] is not None else fs.B_plus
    if not b_const > 0:
        raise ConfigurationError("b_const must be positive", key="b_const")

    out_dir = out_override or secs["output"]["dir"]
    ks = np.linspace(k_min, k_max, n_k) if n_k > 1 else np.array([k_min])
    cfg = RunConfig(fs, V, j, j_max, ks, band_h, kgrid, oversample, max_nk, lams, delta, upper,
                    enabled, boxes, o["scheme"], cap, _num(o, "refinement_tol", int), b_const, out_dir)
    cfg.echo = _echo(secs, cfg)
    return cfg


def _echo(secs, cfg):
    """Resolved configuration as ordered (section, key, value) text."""
    echo = {}
    for name, keys in secs.items():
        echo[name] = {k: v for k, v in keys.items() if v is not None}
    echo["field"]["x_plus"] = fmt(x_plus(cfg.field))
    echo["gap"]["upper"] = fmt(cfg.gap_upper)
    echo["gap"]["E_plus"] = fmt(cfg.field.B_plus * (2 * cfg.j - 1))
    echo["grid"]["band_h"] = fmt(cfg.band_h)
    echo["asympt"]["b_const"] = fmt(cfg.b_const)
    echo["lambda"]["resolved"] = " ".join(fmt(l) for l in cfg.lambdas)
    # the output location is not part of the result; leaving it out keeps
    # reports from different directories byte-identical
    echo.pop("output", None)
    return echo


def load_config(path, out_override=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}", key="config") from None
    return parse_config(text, out_override)


# -- stages --------------------------------------------------------------------

class Artifacts:
    """Tracks files written during a run for the manifest."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.files = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def write_csv(self, name, header, rows):
        with open(self.path(name), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
        self.files.append(name)

    def write_text(self, name, text):
        with open(self.path(name), "w", encoding="utf-8") as fh:
            fh.write(text)
        self.files.append(name)

    def manifest(self, status, message=""):
        lines = [f"status: {status}"]
        if message:
            lines.append(f"message: {message}")
        lines += [f"artifact: {f}" for f in self.files]
        with open(self.path("manifest.txt"), "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")


def stage_bands(cfg, art):
    bands = compute_bands(cfg.pot, cfg.band_ks, js=tuple(range(1, cfg.j_max + 1)),
                          h=cfg.band_h, vectors=True)
    rows = bands.to_rows()
    art.write_csv("bands.csv", BANDS_COLUMNS, rows)
    lo_ok = hi_ok = True
    for c, jj in enumerate(bands.js):
        E = bands.energies[:, c]
        lo_ok &= bool(np.all(E >= cfg.field.B_minus * (2 * jj - 1) * (1 - 1e-9)))
        hi_ok &= bool(np.all(E <= cfg.field.B_plus * (2 * jj - 1)))
    return {"bands": bands, "rows": rows, "confined": lo_ok and hi_ok}


def _kgrid(cfg):
    if cfg.kernel_grid == "auto":
        return auto_kgrid(cfg.potential, cfg.pot, cfg.j, cfg.lambdas, oversample=cfg.oversample,
                          band_h=cfg.band_h, max_nk=cfg.max_nk)
    return cfg.kernel_grid


def stage_effective(cfg, art):
    kg = _kgrid(cfg)
    op = build_effective(cfg.potential, cfg.pot, cfg.j, kg, band_h=cfg.band_h)
    curve = counting_curve(cfg.potential, cfg.pot, cfg.j, kg, cfg.lambdas, cfg.delta, op=op)
    art.write_csv("counting.csv", COUNTING_COLUMNS, curve.rows())
    ev = op.kernel_eigenvalues()
    sup = cfg.potential.sup_V
    slack = max(op.eps_quad, 1e-12 * sup + 1e-14)
    return {
        "k_grid": kg, "op": op, "curve": curve,
        "finite": finiteness_probe(None, None, cfg.j, kg, cfg.lambdas, curve=curve),
        "kernel_min": float(ev[0]) if ev.size else 0.0,
        "kernel_max": float(ev[-1]) if ev.size else 0.0,
        "kernel_ok": bool(ev.size == 0 or (ev[0] >= -slack and ev[-1] <= sup + slack)),
        "eps_quad": op.eps_quad,
    }


def oracle_intervals(cfg):
    E_plus = cfg.field.B_plus * (2 * cfg.j - 1)
    return [(E_plus + l, E_plus + cfg.gap_upper) for l in cfg.lambdas]


def stage_oracle(cfg, art):
    if not cfg.boxes:
        raise ConfigurationError("oracle needs at least one box", key="boxes")
    iv = oracle_intervals(cfg)
    if len(cfg.boxes) >= 2:
        rep = refinement_study(cfg.pot, cfg.potential, cfg.boxes, iv, cfg.scheme, cfg.cap,
                               cfg.refinement_tol)
        rows, flagged = rep.rows, rep.flagged
    else:
        rows, flagged = oracle_rows(cfg.pot, cfg.potential, cfg.boxes[0], iv, 0, cfg.scheme, cfg.cap), []
    art.write_csv("oracle.csv", ORACLE_COLUMNS, rows)
    return {"rows": rows, "flagged": flagged}


def _support_left_of(V, xp):
    if V.sup_V == 0:
        return True
    if not V.compact:
        return False
    ext = V.x_extent(1e-12 * V.sup_V)
    return ext is None or ext[1] <= xp


def stage_asympt(cfg, art, eff):
    curve = eff["curve"]
    V = cfg.potential
    xp = x_plus(cfg.field)
    out = {"fits": [], "constants": None, "x_plus": xp}
    fit_rows = []
    n_small = int(np.count_nonzero(curve.lambdas < 0.1))
    if V.kind == "power-law":
        if curve.lambdas.size >= 5:
            for edge in ("lower", "mid", "upper"):
                f = fit_volume_ratio(curve, V, xp, cfg.field.B_plus, edge=edge)
                out["fits"].append((edge, f))
                fit_rows.append([f"volume-ratio:{edge}", f.estimate, f.residual_norm, f.points_used]
                                + list(f.ratios))
    elif n_small >= 5:
        for edge in ("lower", "mid", "upper"):
            f = fit_sqrt_log(curve, edge=edge)
            out["fits"].append((edge, f))
            s = np.sqrt(np.abs(np.log(curve.lambdas)))
            counts = {"lower": curve.count_lower, "upper": curve.count_upper}.get(edge, curve.count_mid)
            ratios = counts / (f.estimate * s) if f.estimate > 0 else np.full(s.shape, math.nan)
            fit_rows.append([f"sqrt-log:{edge}", f.estimate, f.residual_norm, f.points_used] + list(ratios))
    if V.kind == "indicator":
        out["constants"] = corridor_constants(V.region, V.region, xp, cfg.field.B_plus, cfg.b_const)
    header = list(FIT_COLUMNS) + [f"ratio[{fmt(l)}]" for l in curve.lambdas]
    art.write_csv("fits.csv", header, fit_rows)
    return out


# -- verdicts and report -------------------------------------------------------

def verdicts(cfg, res):
    """List of (name, passed, detail)."""
    out = []
    if "bands" in res:
        out.append(("band confinement", res["bands"]["confined"], "B_minus(2j-1) <= E_j <= B_plus(2j-1)"))
    eff = res.get("effective")
    if eff is not None:
        out.append(("kernel spectral bound", eff["kernel_ok"],
                    f"eigenvalues in [{fmt(eff['kernel_min'])}, {fmt(eff['kernel_max'])}], "
                    f"eps_quad {fmt(eff['eps_quad'])}"))
        if _support_left_of(cfg.potential, x_plus(cfg.field)):
            out.append(("finiteness probe", eff["finite"], "support left of x_plus: counts bounded"))
    orc = res.get("oracle")
    if orc is not None and eff is not None:
        curve = eff["curve"]
        ok = True
        for r in orc["rows"]:
            i = int(np.argmin(np.abs(curve.lambdas - (r[1] - cfg.field.B_plus * (2 * cfg.j - 1)))))
            ok &= curve.count_lower[i] - ORACLE_SLACK <= r[5] <= curve.count_upper[i] + ORACLE_SLACK
        out.append(("oracle inside corridor", bool(ok), f"additive slack {ORACLE_SLACK}"))
    asy = res.get("asympt")
    if asy is not None:
        fits = dict(asy["fits"])
        if asy["constants"] is not None:
            cm, cp = asy["constants"]
            out.append(("C_minus < C_plus", bool(cm < cp), f"{fmt(cm)} < {fmt(cp)}"))
            if "mid" in fits and cm > 0:
                a = fits["mid"].estimate
                out.append(("sqrt-log sandwich", bool(0.5 * cm <= a <= 2 * cp),
                            f"0.5 C_minus <= {fmt(a)} <= 2 C_plus"))
        if cfg.potential.kind == "power-law" and "mid" in fits:
            f = fits["mid"]
            dev = [d for d in f.decade_deviation if math.isfinite(d)]
            mono = all(b <= a for a, b in zip(dev, dev[1:]))
            out.append(("volume ratio terminal", bool(0.7 <= f.estimate <= 1.3), f"ratio {fmt(f.estimate)}"))
            out.append(("volume ratio trend", bool(mono),
                        "per-decade |ratio - 1|: " + " ".join(fmt(d) for d in f.decade_deviation)))
    return out


def _table(header, rows):
    lines = ["  " + "  ".join(header)]
    for r in rows:
        lines.append("  " + "  ".join(v if isinstance(v, str) else fmt(v) for v in r))
    return lines


def emit_report(cfg, res, checks):
    """Deterministic plain-text report."""
    L = [f"gapcount {__version__} report", ""]
    L.append("configuration")
    for name, keys in cfg.echo.items():
        L.append(f"  [{name}]")
        L += [f"    {k} = {v}" for k, v in keys.items()]
    if "bands" in res:
        L += ["", "bands (k, j, E_j, gap, ratio)"]
        L += _table(BANDS_COLUMNS, res["bands"]["rows"])
    eff = res.get("effective")
    if eff is not None:
        kg = eff["k_grid"]
        L += ["", "effective operator",
              f"  k-grid: K_min {fmt(kg.K_min)}  K_max {fmt(kg.K_max)}  n_k {kg.n_k}",
              f"  eps_quad {fmt(eff['eps_quad'])}",
              f"  finiteness probe: {fmt(eff['finite'])}",
              "", "corridor counts (both edges)"]
        L += _table(COUNTING_COLUMNS, eff["curve"].rows())
    orc = res.get("oracle")
    if orc is not None:
        L += ["", "oracle"]
        L += _table(ORACLE_COLUMNS, orc["rows"])
        for a, b, diffs in orc["flagged"]:
            L.append(f"  unstable under refinement: ({fmt(a)}, {fmt(b)}) diffs {diffs}")
    asy = res.get("asympt")
    if asy is not None:
        L += ["", "asymptotics", f"  x_plus {fmt(asy['x_plus'])}"]
        for edge, f in asy["fits"]:
            L.append(f"  {f.model} [{edge}]: coefficient {fmt(f.estimate)}  residual_norm "
                     f"{fmt(f.residual_norm)}  points_used {f.points_used}"
                     + (f"  flags {','.join(f.flags)}" if f.flags else ""))
        if asy["constants"] is not None:
            cm, cp = asy["constants"]
            L.append(f"  C_minus {fmt(cm)}  C_plus {fmt(cp)}")
    L += ["", "verdicts"]
    for name, ok, detail in checks:
        L.append(f"  {'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return "\n".join(L) + "\n"


def run_pipeline(cfg, command):
    """Run one command; returns an exit status and always leaves a manifest."""
    if command not in COMMANDS:
        raise ConfigurationError(f"unknown command {command!r}", key="command")
    art = Artifacts(cfg.out_dir)
    res = {}
    try:
        if command in ("bands", "report"):
            res["bands"] = stage_bands(cfg, art)
        if command in ("effective", "asympt", "report"):
            res["effective"] = stage_effective(cfg, art)
        if command == "oracle" or (command == "report" and cfg.oracle_enabled):
            res["oracle"] = stage_oracle(cfg, art)
        if command in ("asympt", "report"):
            res["asympt"] = stage_asympt(cfg, art, res["effective"])
        status = EXIT_OK
        if command == "report":
            checks = verdicts(cfg, res)
            art.write_text("report.txt", emit_report(cfg, res, checks))
            if not all(ok for _, ok, _ in checks):
                status = EXIT_THRESHOLD
    except ConfigurationError as exc:
        art.manifest("configuration-error", str(exc))
        raise
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        art.manifest("numerical-error", str(exc))
        raise
    art.manifest("threshold-failure" if status == EXIT_THRESHOLD else "ok")
    return status


def main(argv=None):
    ap = argparse.ArgumentParser(prog="gapcount", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="INI configuration file")
    ap.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config, args.out)
        return run_pipeline(cfg, args.command)
    except ConfigurationError as exc:
        print(f"gapcount: configuration error ({exc.key}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"gapcount: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
