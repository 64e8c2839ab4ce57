"""FastAPI service wrapping the design library.

The handler functions are plain request-model to response-model functions;
the CLI calls them in-process, and the FastAPI routes expose the same
contracts over HTTP.  Library errors surface as 422 responses whose body
names the exception class, so clients can map failures without parsing
messages.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, analytic, metrics, optimizer
from ..designs import foldover, paley_conference, validate_conference
from ..errors import ComarsError, FactorMismatch, UnexpectedCorrelationValue, ValidationError
from . import schemas

app = FastAPI(title="comars", version=__version__)


def _report_payload(report: metrics.AliasReport) -> schemas.AliasReportPayload:
    return schemas.AliasReportPayload(**metrics.report_to_dict(report))


def handle_generate(req: schemas.GenerateRequest) -> schemas.DesignPayload:
    if (req.order is None) == (req.entries is None):
        raise ValidationError("give exactly one design source: order or entries")
    if req.order is not None:
        design = paley_conference(req.order)
    else:
        design = validate_conference(req.entries)
    if req.factors is not None:
        design = design.drop_columns(req.factors)
    return schemas.DesignPayload(entries=design.entries.tolist(), runs=design.n, factors=design.m)


def handle_optimize(req: schemas.OptimizeRequest) -> schemas.OptimizeResponse:
    parents = [foldover(validate_conference(req.conference))]
    if req.conference2 is not None:
        parents.append(foldover(validate_conference(req.conference2)))
    config = optimizer.SearchConfig(
        objective=req.objective,
        restarts=req.restarts,
        seed=req.seed,
        max_cc_passes=req.max_cc_passes,
    )
    result = optimizer.optimize_pairings(parents, req.n0, config)
    design = result.design
    report = metrics.alias_report(design.entries, n=design.n, n0=design.n0)
    grid = analytic.twofi_value_grid(design.n)
    return schemas.OptimizeResponse(
        design=schemas.DesignPayload(
            entries=design.entries.tolist(), runs=design.runs, factors=design.m
        ),
        state=schemas.LowerStatePayload(
            perm=list(result.state.perm), signs=list(result.state.signs)
        ),
        pairing=list(result.pairing),
        objective=schemas.ObjectivePayload(
            kind=result.objective.kind,
            ssq=round(report.ssq_2fi, 6),
            f_counts=[report.f_vector[value] for value in grid],
            grid=[round(value, 6) for value in grid],
        ),
        cc_bound_hit=result.cc_bound_hit,
        report=_report_payload(report),
    )


def handle_evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    entries = np.array(req.entries, dtype=np.int64)
    center = metrics.count_center_runs(entries)
    if req.n0 is not None and req.n0 != center:
        raise ValidationError(f"requested n0={req.n0} but the design has {center} all-zero rows")
    n = req.n
    inferred = False
    if n is None:
        n = metrics.infer_parent_run_size(entries)
        inferred = n is not None
    if req.check_theory and n is None:
        raise ValidationError("theory checks need the parent run size n; it could not be inferred")
    violations = metrics.check_theory(entries, n, center) if req.check_theory else []
    try:
        report = metrics.alias_report(entries, n=n, n0=center)
    except UnexpectedCorrelationValue:
        # off the theoretical grid: a hard error only when the caller pinned n
        if not (req.check_theory or inferred):
            raise
        report = metrics.alias_report(entries, n=None, n0=center)
    return schemas.EvaluateResponse(
        report=_report_payload(report), n_inferred=inferred, violations=violations
    )


def _summary(entries: np.ndarray, n0: int) -> schemas.DesignSummary:
    center = metrics.count_center_runs(entries)
    if n0 != center:
        raise ValidationError(f"requested n0={n0} but the design has {center} all-zero rows")
    qq = metrics.class_correlations(entries)[metrics.PairClass.QQ]
    q2, q3, mx = metrics.quartile_summary(entries)
    return schemas.DesignSummary(
        runs=entries.shape[0],
        m=entries.shape[1],
        n0=n0,
        ssq_2fi=round(metrics.ssq_2fi(entries), 6),
        ssq_all_so=round(metrics.ssq_all_second_order(entries), 6),
        quartiles=schemas.Quartiles(q2=round(q2, 6), q3=round(q3, 6), max=round(mx, 6)),
        qq_max_abs=round(float(np.max(np.abs(qq))) if qq.size else 0.0, 6),
        d_criterion=round(metrics.d_criterion(entries), 6),
        quadratic_ds=round(metrics.quadratic_ds_criterion(entries), 6),
    )


def handle_compare(req: schemas.CompareRequest) -> schemas.CompareResponse:
    a = np.array(req.design_a, dtype=np.int64)
    b = np.array(req.design_b, dtype=np.int64)
    if a.ndim != 2 or b.ndim != 2:
        raise ValidationError("designs must be rectangular matrices")
    if a.shape[1] != b.shape[1]:
        raise FactorMismatch(f"designs have {a.shape[1]} and {b.shape[1]} factors")
    sa = _summary(a, req.n0_a)
    sb = _summary(b, req.n0_b)
    return schemas.CompareResponse(
        a=sa,
        b=sb,
        d_ratio=round(sa.d_criterion / sb.d_criterion, 6),
        relative_d_efficiency=round(sa.quadratic_ds / sb.quadratic_ds, 6),
    )


@app.exception_handler(ComarsError)
async def comars_error_handler(_: Request, exc: ComarsError) -> JSONResponse:
    body = schemas.ErrorBody(error=type(exc).__name__, message=str(exc))
    return JSONResponse(status_code=422, content=body.model_dump())


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/generate", response_model=schemas.DesignPayload)
def generate(req: schemas.GenerateRequest) -> schemas.DesignPayload:
    return handle_generate(req)


@app.post("/optimize", response_model=schemas.OptimizeResponse)
def optimize_endpoint(req: schemas.OptimizeRequest) -> schemas.OptimizeResponse:
    return handle_optimize(req)


@app.post("/evaluate", response_model=schemas.EvaluateResponse)
def evaluate(req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    return handle_evaluate(req)


@app.post("/compare", response_model=schemas.CompareResponse)
def compare(req: schemas.CompareRequest) -> schemas.CompareResponse:
    return handle_compare(req)
