"""HTTP service exposing the toolkit: minimality and extremality verdicts,
additive-face enumeration, and plot data.

Verdict responses follow one shape everywhere:

* ``verdict``: MINIMAL, NOT-MINIMAL, EXTREME, or NOT-EXTREME (FACET is
  accepted as a synonym of EXTREME on input paths but never emitted, the
  two are equivalent here).
* ``method``: which decision procedure produced the verdict,
  "finite-restriction" (kernel of the tight-relation system on a finite
  grid) or "reduction-pipeline" (the step-by-step perturbation-space
  reduction).
* ``m``: grid refinement factor actually used (1 means the function's own
  breakpoint grid or a bare grid document used natively).
* ``certificate``: present exactly when the verdict is NOT-EXTREME; a grid
  perturbation document plus a verified epsilon such that both
  pi + eps*pert and pi - eps*pert are minimal.
* ``violated``: the failed minimality condition on NOT-MINIMAL.

Extremality routing by document kind: two-row piecewise linear documents
support both methods; the default method "both" runs the reduction pipeline
and cross-checks it against the finite-restriction oracle, failing loudly
(HTTP 500) on disagreement, and reports the pipeline's result.  One-row and
bare grid documents are decided by the finite method only; asking them for
the pipeline is an input error, and method "both" degrades to the finite
check.  Bare grid documents are decided at their own level, so their
verdicts speak about the finite group problem, not a continuous function.

Input errors (malformed documents, missing f, bad m) map to HTTP 400;
internal aborts (pipeline incomplete, cross-check disagreement, a
certificate that fails verification) map to HTTP 500.
"""
from __future__ import annotations

import time
from fractions import Fraction
from typing import Literal, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .documents import (
    DocumentError,
    ParsedFunction,
    format_fraction,
    grid_to_document,
    parse_function_document,
)
from .groups import (
    FiniteProblem,
    extremality_kernel,
    finite_minimality,
)
from .plotting import density_svg, values_csv, values_svg
from .pwl import GridFunction
from .reduction import PipelineError, run_pipeline, verify_certificate
from .tuples import classify_kinds, enumerate_additive

app = FastAPI(title="groupcut", version="0.1.0")

_CONDITION_NAMES = {
    "origin": "origin",
    "nonnegative": "nonnegativity",
    "subadditive": "subadditivity",
    "symmetric": "symmetry",
}


class FunctionRequest(BaseModel):
    function: dict


class ExtremalityRequest(BaseModel):
    function: dict
    m: int = 3
    method: Literal["both", "finite", "pipeline"] = "both"


class CertificateModel(BaseModel):
    perturbation: dict
    epsilon: str


class VerdictModel(BaseModel):
    verdict: Literal["MINIMAL", "NOT-MINIMAL", "EXTREME", "NOT-EXTREME", "FACET"]
    method: Literal["finite-restriction", "reduction-pipeline"]
    m: int
    certificate: Optional[CertificateModel] = None
    violated: Optional[str] = None
    timing: float


@app.exception_handler(DocumentError)
def _on_document_error(request: Request, exc: DocumentError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(ValueError)
def _on_value_error(request: Request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.exception_handler(PipelineError)
def _on_pipeline_error(request: Request, exc: PipelineError) -> JSONResponse:
    return JSONResponse(status_code=500, content={"detail": str(exc)})


def _native_problem(parsed: ParsedFunction) -> FiniteProblem:
    """The function on its own grid (pwl restricted with m = 1)."""
    if parsed.kind == "pwl2":
        return FiniteProblem.from_pwl(parsed.fn, 1)
    if parsed.kind == "pwl1":
        return FiniteProblem.from_pwl1(parsed.fn, 1)
    return FiniteProblem.from_grid(parsed.fn, parsed.f_index())


def _epsilon_for(problem: FiniteProblem, pert: GridFunction) -> Fraction:
    """Largest dyadic eps in [2^-20, 1] keeping pi +- eps*pert minimal.

    A nonzero kernel vector always admits one: it preserves every tight
    relation exactly, and small multiples cannot break strict inequalities.
    """
    eps = Fraction(1)
    for _ in range(21):
        plus = FiniteProblem.from_grid(
            problem.values.combined(pert, eps), problem.f_index
        )
        minus = FiniteProblem.from_grid(
            problem.values.combined(pert, -eps), problem.f_index
        )
        if finite_minimality(plus).minimal and finite_minimality(minus).minimal:
            return eps
        eps = eps / 2
    raise PipelineError("kernel vector failed epsilon search down to 2^-20")


def _certificate_model(pert: GridFunction, eps: Fraction) -> CertificateModel:
    return CertificateModel(
        perturbation=grid_to_document(pert, name="perturbation"),
        epsilon=format_fraction(eps),
    )


def _not_minimal(violated: str, m: int, t0: float) -> VerdictModel:
    return VerdictModel(
        verdict="NOT-MINIMAL",
        method="finite-restriction",
        m=m,
        violated=_CONDITION_NAMES.get(violated, violated),
        timing=time.perf_counter() - t0,
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/minimality", response_model=VerdictModel, response_model_exclude_none=True)
def minimality(req: FunctionRequest) -> VerdictModel:
    t0 = time.perf_counter()
    parsed = parse_function_document(req.function)
    report = finite_minimality(_native_problem(parsed))
    if not report.minimal:
        return _not_minimal(report.violated, 1, t0)
    return VerdictModel(
        verdict="MINIMAL",
        method="finite-restriction",
        m=1,
        timing=time.perf_counter() - t0,
    )


def _finite_extremality(
    parsed: ParsedFunction, m: int, t0: float
) -> VerdictModel:
    if parsed.kind == "pwl2":
        problem = FiniteProblem.from_pwl(parsed.fn, m)
    elif parsed.kind == "pwl1":
        problem = FiniteProblem.from_pwl1(parsed.fn, m)
    else:
        problem = _native_problem(parsed)
        m = 1
    kernel = extremality_kernel(problem)
    if kernel.dimension == 0:
        return VerdictModel(
            verdict="EXTREME",
            method="finite-restriction",
            m=m,
            timing=time.perf_counter() - t0,
        )
    pert = kernel.basis[0]
    eps = _epsilon_for(problem, pert)
    return VerdictModel(
        verdict="NOT-EXTREME",
        method="finite-restriction",
        m=m,
        certificate=_certificate_model(pert, eps),
        timing=time.perf_counter() - t0,
    )


def _pipeline_extremality(
    parsed: ParsedFunction, m: int, t0: float
) -> VerdictModel:
    result = run_pipeline(parsed.fn, m)
    if result.verdict == "EXTREME":
        return VerdictModel(
            verdict="EXTREME",
            method="reduction-pipeline",
            m=m,
            timing=time.perf_counter() - t0,
        )
    ok, eps = verify_certificate(parsed.fn, result.certificate, m)
    if not ok:
        raise PipelineError("pipeline certificate failed verification")
    return VerdictModel(
        verdict="NOT-EXTREME",
        method="reduction-pipeline",
        m=m,
        certificate=_certificate_model(result.certificate, eps),
        timing=time.perf_counter() - t0,
    )


@app.post(
    "/extremality", response_model=VerdictModel, response_model_exclude_none=True
)
def extremality(req: ExtremalityRequest) -> VerdictModel:
    t0 = time.perf_counter()
    parsed = parse_function_document(req.function)
    if parsed.kind in ("pwl2", "pwl1") and req.m < 3:
        raise DocumentError(
            f"extremality of a piecewise linear function needs m >= 3, got {req.m}"
        )
    if parsed.kind != "pwl2" and req.method == "pipeline":
        raise DocumentError(
            "the reduction pipeline needs a two-row piecewise linear document"
        )
    report = finite_minimality(_native_problem(parsed))
    if not report.minimal:
        return _not_minimal(report.violated, 1, t0)
    if parsed.kind != "pwl2" or req.method == "finite":
        return _finite_extremality(parsed, req.m, t0)
    if req.method == "pipeline":
        return _pipeline_extremality(parsed, req.m, t0)
    finite = _finite_extremality(parsed, req.m, time.perf_counter())
    pipeline = _pipeline_extremality(parsed, req.m, t0)
    if finite.verdict != pipeline.verdict:
        raise PipelineError(
            f"method disagreement at m={req.m}: finite-restriction says "
            f"{finite.verdict}, reduction-pipeline says {pipeline.verdict}"
        )
    return pipeline


def _face_dict(face) -> dict:
    return {"kind": face.kind.label, "x": face.ax, "y": face.ay}


@app.post("/faces")
def additive_faces(req: FunctionRequest) -> dict:
    parsed = parse_function_document(req.function)
    if parsed.kind != "pwl2":
        raise DocumentError(
            "additive faces need a two-row piecewise linear document"
        )
    tuples = enumerate_additive(parsed.fn)
    q = parsed.fn.q
    out = []
    for tau in tuples:
        out.append(
            {
                "faces": [_face_dict(f) for f in tau.faces],
                "sigma": list(tau.sigma),
                "t": [format_fraction(Fraction(u, q)) for u in tau.t_units],
                "class": classify_kinds(tau),
            }
        )
    census = {str(k): v for k, v in sorted(tuples.census().items())}
    return {"q": q, "count": len(out), "census": census, "tuples": out}


@app.post("/plot")
def plot(req: FunctionRequest) -> dict:
    parsed = parse_function_document(req.function)
    files = {
        "values.csv": values_csv(parsed),
        "values.svg": values_svg(parsed),
    }
    if parsed.f is not None:
        files["density.svg"] = density_svg(parsed)
    return {"files": files}
