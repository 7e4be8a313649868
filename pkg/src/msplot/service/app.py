"""HTTP service exposing the core pipelines.

All endpoints accept curve data as long-CSV text (the same layout the CLI
reads) and return JSON, or SVG for the plot endpoints.  Input problems map
to 400, numerical degeneracies to 422.

Run with::

    uvicorn msplot.service:app
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .. import __version__
from ..dataio import format_long_csv, format_truth_csv, parse_long_csv
from ..errors import InputError, NumericalError
from ..evalbench import run_benchmark
from ..functional import array_summaries, summarize_sample
from ..plotout import emit_msplot, emit_msplot_array, emit_outliergram
from ..robustdet import DetectorConfig, detect_outliers
from ..simulate import ModelSpec, model_sample
from .schemas import (
    BenchRequest,
    BenchResponse,
    CurveResult,
    DetectRequest,
    DetectResponse,
    HealthResponse,
    MsPlotRequest,
    OutlyingnessRequest,
    OutlyingnessResponse,
    PlotRequest,
    RateRow,
    SimulateRequest,
    SimulateResponse,
)

SVG_MEDIA_TYPE = "image/svg+xml"


def create_app() -> FastAPI:
    app = FastAPI(
        title="msplot",
        version=__version__,
        description="Magnitude-shape outlyingness analytics for functional data.",
    )

    @app.exception_handler(InputError)
    async def _input_error(_: Request, exc: InputError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(NumericalError)
    async def _numerical_error(_: Request, exc: NumericalError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/outlyingness", response_model=OutlyingnessResponse)
    def outlyingness(req: OutlyingnessRequest) -> OutlyingnessResponse:
        sample = parse_long_csv(req.curves_csv)
        summary = summarize_sample(sample, n_directions=req.directions, seed=req.seed)
        curves = [
            CurveResult(
                curve_id=sample.ids[i],
                mo=[float(v) for v in summary.mo[i]],
                vo=float(summary.vo[i]),
                fo=float(summary.fo[i]),
            )
            for i in range(sample.n)
        ]
        return OutlyingnessResponse(p=sample.p, curves=curves)

    @app.post("/detect", response_model=DetectResponse)
    def detect(req: DetectRequest) -> DetectResponse:
        sample = parse_long_csv(req.curves_csv)
        config = DetectorConfig(
            method=req.method,
            quantile=req.quantile,
            inflation=req.inflation,
            n_directions=req.directions,
            cutoff_mode=req.cutoff_mode,
            seed=req.seed,
        )
        summary, detection = detect_outliers(sample, config)
        curves = [
            CurveResult(
                curve_id=sample.ids[i],
                mo=[float(v) for v in summary.mo[i]],
                vo=float(summary.vo[i]),
                fo=float(summary.fo[i]),
                srmd=None if detection.srmd is None else float(detection.srmd[i]),
                flagged=bool(detection.flags[i]),
            )
            for i in range(sample.n)
        ]
        return DetectResponse(
            p=sample.p, method=detection.method, cutoff=detection.cutoff, curves=curves
        )

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        spec = ModelSpec(model_id=req.model, n=req.n, c=req.c, m=req.m, seed=req.seed)
        labeled = model_sample(spec)
        return SimulateResponse(
            curves_csv=format_long_csv(labeled.sample),
            truth_csv=format_truth_csv(labeled.sample.ids, labeled.truth),
        )

    @app.post("/bench", response_model=BenchResponse)
    def bench(req: BenchRequest) -> BenchResponse:
        spec = ModelSpec(model_id=req.model, n=req.n, c=req.c, m=req.m, seed=req.seed)
        config = DetectorConfig(method=req.method, quantile=req.quantile)
        rates = run_benchmark(spec, config, reps=req.reps, seed=req.seed)
        rows = [
            RateRow(rep=r, p_c=float(pc), p_f=float(pf))
            for r, (pc, pf) in enumerate(zip(rates.p_c, rates.p_f))
        ]
        return BenchResponse(rates=rows, summary=rates.statistics())

    @app.post("/plots/msplot")
    def plot_msplot(req: MsPlotRequest) -> Response:
        sample = parse_long_csv(req.curves_csv)
        detection = None
        if req.detect:
            config = DetectorConfig(
                method=req.method,
                quantile=req.quantile,
                inflation=req.inflation,
                n_directions=req.directions,
                seed=req.seed,
            )
            summary, detection = detect_outliers(sample, config)
        else:
            summary = summarize_sample(
                sample, n_directions=req.directions, seed=req.seed
            )
        mode = req.mode if sample.p == 1 else "norm"
        doc = emit_msplot(summary, detection, mode=mode, fmt="svg", ids=sample.ids)
        return Response(content=doc.payload, media_type=SVG_MEDIA_TYPE)

    @app.post("/plots/array")
    def plot_array(req: PlotRequest) -> Response:
        sample = parse_long_csv(req.curves_csv)
        marginals, joints = array_summaries(
            sample, n_directions=req.directions, seed=req.seed
        )
        doc = emit_msplot_array(marginals, joints)
        return Response(content=doc.payload, media_type=SVG_MEDIA_TYPE)

    @app.post("/plots/outliergram")
    def plot_outliergram(req: PlotRequest) -> Response:
        sample = parse_long_csv(req.curves_csv)
        summary = summarize_sample(sample, n_directions=req.directions, seed=req.seed)
        doc = emit_outliergram(summary, ids=sample.ids)
        return Response(content=doc.payload, media_type=SVG_MEDIA_TYPE)

    return app


app = create_app()
