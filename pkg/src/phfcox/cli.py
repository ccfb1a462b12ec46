"""Command-line entry point: ``phfcox <subcommand> ...``.

Configuration comes from an optional JSON file (``--config``); every key in
it can be overridden by the flag of the same name. Exit codes: 0 success,
2 invalid input, 3 numerical failure. Errors are also written to stderr as a
single JSON object.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cox, cubical, fpca, imaging, survstats, tuning
from .surface import SurfaceGrid, pooled_grid_bounds, rasterize_surface, write_surfaces_csv

logger = logging.getLogger("phfcox")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3

CLINICAL_COLUMNS = ("subject_id", "time", "event", "sex", "age", "kps", "volume", "frontal")
COVARIATES = ("sex", "age", "kps", "volume")


class CliError(Exception):
    code = EXIT_INVALID


class NumericalFailure(CliError):
    code = EXIT_NUMERIC


# -- configuration -----------------------------------------------------------

# key: (type, default); each key doubles as a --flag
CONFIG_KEYS = {
    "volumes": (str, None),
    "diagrams": (str, None),
    "clinical": (str, None),
    "out": (str, None),
    "sigma_grid": (str, ",".join(str(s) for s in tuning.DEFAULT_SIGMAS)),
    "sigma_mode": (str, "full"),
    "threshold": (float, 0.90),
    "n_folds": (int, 10),
    "n_lambda": (int, 50),
    "lambda_ratio": (float, 1e-2),
    "resolution": (str, "50,50"),
    "pad": (float, 3.0),
    "dims": (str, "0,1,2"),
    "seed": (int, None),
    "workers": (int, 1),
}


def _floats(text) -> tuple[float, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def resolve_config(args, keys=CONFIG_KEYS) -> dict:
    """Defaults, then the JSON config file, then explicit flags."""
    cfg = {k: default for k, (_, default) in keys.items()}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise CliError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise CliError(f"config file {path} is not valid JSON: {exc}") from exc
        unknown = sorted(set(loaded) - set(keys))
        if unknown:
            raise CliError(f"unknown config keys: {unknown}")
        cfg.update(loaded)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def tuning_config(cfg: dict, topology: bool = True, interactions: bool = True) -> tuning.TuningConfig:
    if cfg.get("seed") is None:
        raise CliError("--seed is required")
    res = _ints(cfg["resolution"])
    if len(res) != 2:
        raise CliError("resolution must be two integers, e.g. 50,50")
    try:
        return tuning.TuningConfig(
            sigma_grid=_floats(cfg["sigma_grid"]), sigma_mode=cfg["sigma_mode"],
            threshold=float(cfg["threshold"]), n_folds=int(cfg["n_folds"]),
            n_lambda=int(cfg["n_lambda"]), lambda_ratio=float(cfg["lambda_ratio"]),
            resolution=res, pad=float(cfg["pad"]), interactions=interactions,
            topology=topology, seed=int(cfg["seed"]), workers=int(cfg["workers"]))
    except ValueError as exc:
        raise CliError(str(exc)) from exc


# -- clinical table ----------------------------------------------------------

@dataclass
class ClinicalRow:
    subject_id: str
    time: float
    event: int
    frontal: int
    covariates: dict = field(default_factory=dict)


def _number(text, column, sid, allow_empty=False):
    text = (text or "").strip()
    if text == "":
        if allow_empty:
            return None
        raise CliError(f"{sid}: column {column} is empty")
    if column == "sex" and text.upper() in ("M", "F"):
        return 1.0 if text.upper() == "M" else 0.0
    try:
        return float(text)
    except ValueError as exc:
        raise CliError(f"{sid}: column {column} is not numeric: {text!r}") from exc


def read_clinical(path, require_outcome: bool = True) -> list[ClinicalRow]:
    """Parse the clinical CSV. ``kps`` may be empty; other columns are required."""
    path = Path(path)
    if not path.exists():
        raise CliError(f"clinical table not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in ("subject_id", "frontal") + (("time", "event") if require_outcome else ())
                   if c not in header]
        if missing:
            raise CliError(f"clinical table lacks columns {missing}")
        extra = [c for c in header if c not in CLINICAL_COLUMNS]
        if extra:
            warnings.warn(f"ignoring unknown clinical columns {extra}", UserWarning, stacklevel=2)
        rows, seen = [], set()
        for rec in reader:
            sid = (rec["subject_id"] or "").strip()
            if not sid:
                raise CliError("clinical table has a row without subject_id")
            if sid in seen:
                raise CliError(f"duplicate subject_id {sid}")
            seen.add(sid)
            time = event = None
            if require_outcome:
                time = _number(rec["time"], "time", sid)
                event = _number(rec["event"], "event", sid)
                if not (math.isfinite(time) and time > 0):
                    raise CliError(f"{sid}: time must be positive")
                if event not in (0.0, 1.0):
                    raise CliError(f"{sid}: event must be 0 or 1")
            frontal = _number(rec["frontal"], "frontal", sid)
            if frontal not in (0.0, 1.0):
                raise CliError(f"{sid}: frontal must be 0 or 1")
            covs = {c: _number(rec.get(c), c, sid, allow_empty=True)
                    for c in COVARIATES if c in header}
            rows.append(ClinicalRow(sid, time, None if event is None else int(event),
                                    int(frontal), covs))
    if not rows:
        raise CliError("clinical table is empty")
    return rows


def usable_covariates(rows: list[ClinicalRow]) -> tuple[str, ...]:
    """Covariates present for every subject; partially missing ones are dropped."""
    names = []
    for c in COVARIATES:
        vals = [r.covariates.get(c) for r in rows]
        if all(v is None for v in vals):
            continue
        if any(v is None for v in vals):
            warnings.warn(f"covariate {c} has missing values; excluded", UserWarning, stacklevel=2)
            continue
        names.append(c)
    return tuple(names)


# -- diagrams ----------------------------------------------------------------

def diagrams_from_volume(path, raw: bool = False, construction: str = "V"):
    vol = imaging.load_label_volume(path)
    sdv = imaging.sedt3(vol)
    dgms = cubical.persistence_of(sdv, construction)
    if not raw:
        dgms = [cubical.regularize_infinite(d) for d in dgms]
    return vol.subject_id, dgms


def _volume_headers(directory) -> dict[str, Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise CliError(f"volume directory not found: {directory}")
    out = {}
    for header in sorted(directory.glob("*.json")):
        try:
            doc = json.loads(header.read_text())
        except json.JSONDecodeError:
            continue
        if isinstance(doc, dict) and doc.get("magic") == "LV1":
            out[str(doc.get("subject_id", header.stem))] = header
    return out


def collect_diagrams(cfg: dict, ids: list[str]) -> dict[str, list[cubical.PersistenceDiagram]]:
    """Regularized diagrams for ``ids`` from a diagram CSV or a volume directory."""
    if cfg.get("diagrams"):
        path = Path(cfg["diagrams"])
        if not path.exists():
            raise CliError(f"diagram file not found: {path}")
        table = cubical.read_diagrams_csv(path)
        table = {sid: [cubical.regularize_infinite(d) for d in dg] for sid, dg in table.items()}
    elif cfg.get("volumes"):
        headers = _volume_headers(cfg["volumes"])
        table = {}
        for sid in ids:
            if sid in headers:
                _, table[sid] = diagrams_from_volume(headers[sid])
    else:
        raise CliError("either --volumes or --diagrams is required")
    missing = [sid for sid in ids if sid not in table]
    if missing:
        raise CliError(f"no image data for subjects: {missing}")
    return {sid: table[sid] for sid in ids}


def build_dataset(rows, diagrams, dims, covariates) -> tuning.Dataset:
    subjects = []
    for r in rows:
        dg = {d.dim: d for d in diagrams[r.subject_id]} if diagrams else {}
        subjects.append(tuning.Subject(
            r.subject_id, {dim: dg.get(dim, cubical.PersistenceDiagram(dim, [])) for dim in dims},
            r.time if r.time is not None else 1.0, r.event if r.event is not None else 0,
            r.frontal, np.array([r.covariates[c] for c in covariates], dtype=np.float64)))
    return tuning.Dataset(subjects, tuple(dims), tuple(covariates))


# -- output helpers ----------------------------------------------------------

def _clean(obj):
    """JSON-safe copy: numpy to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def write_risks(path, ids, eta, high_mask=None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["subject_id", "eta", "group"])
        for i, sid in enumerate(ids):
            group = "" if high_mask is None else ("high" if high_mask[i] else "low")
            w.writerow([sid, repr(float(eta[i])), group])


def write_km_outputs(out: Path, time, event, high_mask) -> survstats.LogRankResult:
    time, event = np.asarray(time, dtype=np.float64), np.asarray(event, dtype=np.int64)
    hi, lo = np.asarray(high_mask, dtype=bool), ~np.asarray(high_mask, dtype=bool)
    if hi.all() or lo.all():
        lr = survstats.LogRankResult(0.0, 1.0)
    else:
        lr = survstats.log_rank_test(time[hi], event[hi], time[lo], event[lo])
    curves = {}
    if hi.any():
        curves["high"] = survstats.kaplan_meier(time[hi], event[hi])
    if lo.any():
        curves["low"] = survstats.kaplan_meier(time[lo], event[lo])
    survstats.write_km_csv(out / "km.csv", curves)
    (out / "km.svg").write_text(survstats.km_svg(curves, lr.p_value))
    write_json(out / "logrank.json", {"statistic": lr.statistic, "p_value": lr.p_value,
                                      "observed": lr.observed, "expected": lr.expected,
                                      "groups": ["high", "low"],
                                      "variance": lr.variance, "n_high": int(hi.sum()),
                                      "n_low": int(lo.sum())})
    return lr


def write_tuning_csv(path, records, dims) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"sigma{d}" for d in dims] + ["lambda", "p_value", "statistic"]
                   + [f"rank{d}" for d in dims] + ["degenerate", "split_degenerate"])
        for r in records:
            w.writerow([repr(s) for s in r.sigmas]
                       + ["" if r.lam is None else repr(r.lam), repr(r.p_value), repr(r.statistic)]
                       + [r.ranks.get(d, 0) for d in dims]
                       + [int(r.degenerate), int(r.split_degenerate)])


def _out_dir(cfg) -> Path:
    if not cfg.get("out"):
        raise CliError("--out is required")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands -------------------------------------------------------------

def cmd_sedt(args) -> int:
    vol = imaging.load_label_volume(args.volume)
    sdv = imaging.sedt3(vol)
    imaging.save_signed_distance(sdv, args.out)
    return EXIT_OK


def cmd_ph(args) -> int:
    sid, dgms = diagrams_from_volume(args.volume, raw=args.raw, construction=args.construction)
    cubical.write_diagram_file(args.out, sid, dgms)
    return EXIT_OK


def cmd_surface(args) -> int:
    path = Path(args.diagrams)
    if not path.exists():
        raise CliError(f"diagram file not found: {path}")
    if args.sigma <= 0:
        raise CliError("--sigma must be positive")
    table = cubical.read_diagrams_csv(path)
    table = {sid: [cubical.regularize_infinite(d) for d in dg] for sid, dg in table.items()}
    res = _ints(args.resolution)
    out = {sid: [] for sid in table}
    for dim in _ints(args.dims):
        pool = [dg[dim] for dg in table.values()]
        if not any(len(d) for d in pool):
            continue
        grid = pooled_grid_bounds(pool, args.sigma, res, args.pad)
        for sid, dg in table.items():
            out[sid].append(rasterize_surface(dg[dim], grid, args.sigma))
    write_surfaces_csv(args.out, out)
    return EXIT_OK


def _model_document(cfg, tcfg, result: tuning.TuningResult, dataset, covariates):
    best = result.best
    models = best.features.models if best.features else {}
    coefs = cox.functional_coefficients(best.fit, models) if models else {}
    return {
        "format": "phfcox-model-1",
        "config": {"sigma_grid": list(tcfg.sigma_grid), "sigma_mode": tcfg.sigma_mode,
                   "threshold": tcfg.threshold, "n_folds": tcfg.n_folds,
                   "n_lambda": tcfg.n_lambda, "lambda_ratio": tcfg.lambda_ratio,
                   "resolution": list(tcfg.resolution), "pad": tcfg.pad,
                   "interactions": tcfg.interactions, "topology": tcfg.topology,
                   "seed": tcfg.seed, "dims": list(dataset.dims)},
        "clinical_covariates": list(covariates),
        "tuning": result.to_dict(),
        "cox": best.fit.to_dict(),
        "cv": None if best.cv is None else {"lambdas": best.cv.lambdas,
                                            "deviance": best.cv.deviance,
                                            "lambda_best": best.cv.lambda_best,
                                            "n_folds": best.cv.n_folds},
        "fpca": {str(d): m.to_dict() for d, m in models.items()},
        "functional_coefficients": {str(d): {k: v for k, v in c.items()} for d, c in coefs.items()},
        "logrank": {"statistic": best.logrank.statistic, "p_value": best.logrank.p_value},
        "n_subjects": len(dataset),
        "n_events": int(dataset.event.sum()),
    }


def cmd_fit(args) -> int:
    cfg = resolve_config(args)
    topology = not args.no_topology
    tcfg = tuning_config(cfg, topology=topology, interactions=not args.no_interactions)
    if not cfg.get("clinical"):
        raise CliError("--clinical is required")
    out = _out_dir(cfg)
    rows = read_clinical(cfg["clinical"])
    covariates = usable_covariates(rows)
    dims = _ints(cfg["dims"])
    diagrams = collect_diagrams(cfg, [r.subject_id for r in rows]) if topology else None
    dataset = build_dataset(rows, diagrams, dims, covariates)
    try:
        result = tuning.sigma_grid_search(dataset, tcfg)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"linear algebra failure: {exc}") from exc
    best = result.best
    ok = np.isfinite(best.risks)
    high = np.zeros(len(dataset), dtype=bool)
    high[np.flatnonzero(ok)[best.split.high]] = True
    write_json(out / "model.json", _model_document(cfg, tcfg, result, dataset, covariates))
    write_risks(out / "risks.csv", dataset.ids, best.risks, high)
    write_km_outputs(out, dataset.time[ok], dataset.event[ok], high[ok])
    if args.tuning_csv:
        write_tuning_csv(out / "tuning.csv", result.records, dims)
    return EXIT_OK


def _load_model(path):
    path = Path(path)
    if not path.exists():
        raise CliError(f"model file not found: {path}")
    doc = json.loads(path.read_text())
    if doc.get("format") != "phfcox-model-1":
        raise CliError(f"{path} is not a phfcox model file")
    return doc


def predict_linear(doc, dataset: tuning.Dataset) -> np.ndarray:
    """Risk scores from a frozen model: stored grids, FPCA bases and coefficients."""
    models = {int(d): fpca.FpcaModel.from_dict(m) for d, m in doc["fpca"].items()}
    scores = {}
    for dim, model in sorted(models.items()):
        surfaces = [rasterize_surface(s.diagrams[dim], model.grid, model.sigma)
                    for s in dataset.subjects]
        scores[dim] = fpca.project_many(surfaces, model)
    design = cox.build_design(scores, dataset.frontal, dataset.clinical, dataset.clinical_names,
                              dataset.ids, interactions=doc["config"]["interactions"])
    stored = doc["cox"]["coefficients"]
    if [c["name"] for c in stored] != design.names:
        raise CliError("model columns do not match the rebuilt design")
    coef = np.array([c["value"] for c in stored], dtype=np.float64)
    return design.X @ coef


def cmd_predict(args) -> int:
    cfg = resolve_config(args)
    doc = _load_model(args.model)
    if not cfg.get("clinical"):
        raise CliError("--clinical is required")
    out = _out_dir(cfg)
    rows = read_clinical(cfg["clinical"], require_outcome=False)
    covariates = tuple(doc["clinical_covariates"])
    for c in covariates:
        if any(r.covariates.get(c) is None for r in rows):
            raise CliError(f"model needs covariate {c} for every subject")
    dims = tuple(int(d) for d in doc["config"]["dims"])
    topology = bool(doc["fpca"])
    diagrams = collect_diagrams(cfg, [r.subject_id for r in rows]) if topology else None
    dataset = build_dataset(rows, diagrams, dims, covariates)
    eta = predict_linear(doc, dataset)
    write_risks(out / "predictions.csv", dataset.ids, eta)
    return EXIT_OK


def cmd_km(args) -> int:
    rows = {r.subject_id: r for r in read_clinical(args.clinical)}
    path = Path(args.risks)
    if not path.exists():
        raise CliError(f"risk file not found: {path}")
    ids, eta = [], []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            ids.append(rec["subject_id"])
            eta.append(float(rec["eta"]))
    missing = [s for s in ids if s not in rows]
    if missing:
        raise CliError(f"risk subjects missing from clinical table: {missing}")
    eta = np.array(eta)
    ok = np.isfinite(eta)
    split = survstats.median_risk_split(eta[ok])
    high = np.zeros(ok.sum(), dtype=bool)
    high[split.high] = True
    time = np.array([rows[s].time for s, k in zip(ids, ok) if k])
    event = np.array([rows[s].event for s, k in zip(ids, ok) if k])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_km_outputs(out, time, event, high)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .simulate import SimConfig, run_simulation

    if args.seed is None:
        raise CliError("--seed is required")
    if args.n_datasets < 1:
        raise CliError("--n-datasets must be at least 1")
    cfg = SimConfig(n=args.n, n_datasets=args.n_datasets, sigma=args.sigma,
                    threshold=args.threshold, n_folds=args.n_folds, seed=args.seed,
                    signal=not args.null, workers=args.workers)

    def progress(r):
        logger.info("dataset %d: %s", r.index, f"p={r.p_value:.4g}" if r.ok else r.error)

    report = run_simulation(cfg, progress)
    report.write(args.out)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_config_flags(p):
    p.add_argument("--config", help="JSON file with any of the keys below")
    p.add_argument("--volumes", help="directory of LV1 volumes (*.json + *.raw)")
    p.add_argument("--diagrams", help="diagram CSV (subject_id,dim,birth,death) instead of volumes")
    p.add_argument("--clinical", help="clinical CSV: " + ",".join(CLINICAL_COLUMNS))
    p.add_argument("--out", help="output directory")
    p.add_argument("--sigma-grid", dest="sigma_grid", help="comma-separated kernel widths")
    p.add_argument("--sigma-mode", dest="sigma_mode", choices=("full", "shared"))
    p.add_argument("--threshold", type=float, help="FPCA variance threshold C")
    p.add_argument("--n-folds", dest="n_folds", type=int)
    p.add_argument("--n-lambda", dest="n_lambda", type=int)
    p.add_argument("--lambda-ratio", dest="lambda_ratio", type=float)
    p.add_argument("--resolution", help="surface grid cells, e.g. 50,50")
    p.add_argument("--pad", type=float, help="grid padding in kernel widths")
    p.add_argument("--dims", help="homology dimensions, e.g. 0,1,2")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phfcox", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sedt", help="signed distance transform of an LV1 volume")
    p.add_argument("volume")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sedt)

    p = sub.add_parser("ph", help="persistence diagrams of an LV1 volume")
    p.add_argument("volume")
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true", help="keep infinite deaths")
    p.add_argument("--construction", choices=("V", "T"), default="V")
    p.set_defaults(func=cmd_ph)

    p = sub.add_parser("surface", help="persistence surfaces from a diagram CSV")
    p.add_argument("diagrams")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resolution", default="50,50")
    p.add_argument("--pad", type=float, default=3.0)
    p.add_argument("--dims", default="0,1,2")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("fit", help="tune, fit and evaluate the survival model")
    _add_config_flags(p)
    p.add_argument("--no-topology", action="store_true", help="clinical covariates only")
    p.add_argument("--no-interactions", action="store_true")
    p.add_argument("--tuning-csv", action="store_true", help="also write tuning.csv")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="risk scores from a saved model")
    _add_config_flags(p)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("km", help="median split, Kaplan-Meier curves and log-rank test")
    p.add_argument("--risks", required=True, help="CSV with subject_id,eta")
    p.add_argument("--clinical", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_km)

    p = sub.add_parser("simulate", help="synthetic two-group study")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-datasets", dest="n_datasets", type=int, default=50)
    p.add_argument("--n", type=int, default=140)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--threshold", type=float, default=0.90)
    p.add_argument("--n-folds", dest="n_folds", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--null", action="store_true", help="no planted hazard difference")
    p.set_defaults(func=cmd_simulate)
    return parser


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (cox.DegenerateSurvivalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _fail(exc, EXIT_NUMERIC)
    except CliError as exc:
        return _fail(exc, exc.code)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        return _fail(exc, EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
