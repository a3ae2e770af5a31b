"""FastAPI service exposing the sieve cache and every comparison table.

The service owns a HistogramStore (disk + memory) so expensive sieve runs
are shared across requests; all statistics endpoints are cheap reads of a
cached histogram.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse

from .. import analytic, census, charfn
from ..cache import HistogramStore
from ..errors import CacheError, CacheMissError, EkstatError
from ..sieve import DIM
from . import schemas


def _status_for(exc: EkstatError) -> int:
    if isinstance(exc, CacheMissError):
        return 404
    if isinstance(exc, CacheError):
        return 500
    return 400


def create_app(cache_dir=None, memory_slots: int = 16) -> FastAPI:
    app = FastAPI(title="ekstat", version="0.1.0",
                  description="Exact and predicted statistics of the number of "
                              "prime factors of n-1 on classes omega(n) = k")
    store = HistogramStore(cache_dir, memory_slots=memory_slots)
    app.state.store = store
    configs: dict[int, analytic.EulerProductConfig] = {}

    def cfg_for(prime_cutoff: int) -> analytic.EulerProductConfig:
        cfg = configs.get(prime_cutoff)
        if cfg is None:
            cfg = analytic.make_config(prime_cutoff=prime_cutoff)
            configs[prime_cutoff] = cfg
        return cfg

    def histogram(req: schemas.HistogramParams, rebuild: bool = False):
        return store.get(req.x, req.w, build=req.build,
                         segment_len=req.segment_len, threads=req.threads,
                         rebuild=rebuild)

    @app.exception_handler(EkstatError)
    def ekstat_error_handler(_, exc: EkstatError):
        return JSONResponse(status_code=_status_for(exc),
                            content={"detail": str(exc),
                                     "kind": type(exc).__name__})

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sieve", response_model=schemas.SieveResponse)
    def sieve(req: schemas.SieveRequest):
        hist, built, elapsed, path = histogram(req, rebuild=req.rebuild)
        meta = schemas.HistogramMeta(x=hist.x, w=hist.w, total=hist.total,
                                     cache_path=str(path), built=built,
                                     elapsed_seconds=elapsed)
        return schemas.SieveResponse(meta=meta)

    @app.post("/counts", response_model=schemas.CountsResponse)
    def counts(req: schemas.CountsRequest):
        hist, _, _, _ = histogram(req)
        rows = []
        for k in req.k_list:
            total = census.pi_k(hist, k)
            if total == 0:
                continue
            marginal = hist.counts[k].sum(axis=1)
            top = req.ell_max if req.ell_max is not None else int(
                np.flatnonzero(marginal)[-1])
            for ell in range(top + 1):
                rows.append(schemas.CountsRow(
                    k=k, ell=ell, pi_k=total,
                    pi_k_ell=census.pi_k_ell(hist, k, ell)))
        meta = {"command": "counts", "x": hist.x, "w": hist.w,
                "k_list": req.k_list}
        return schemas.CountsResponse(meta=meta, rows=rows)

    @app.post("/ekdist", response_model=schemas.EkDistResponse)
    def ekdist(req: schemas.EkDistRequest):
        hist, _, _, _ = histogram(req)
        rows = []
        for k in req.k_list:
            if census.pi_k(hist, k) == 0:
                continue
            dist = census.ek_distribution(hist, k, truncated=req.truncated,
                                          center=req.center)
            tail = census.d_k(hist, k, req.C)
            for y, cdf in dist.cdf_points:
                gauss = analytic.phi(y)
                rows.append(schemas.EkDistRow(
                    k=k, y=y, empirical_cdf=cdf, phi=gauss,
                    abs_deviation=abs(cdf - gauss),
                    ks_distance=dist.ks_distance, d_k=tail))
        meta = {"command": "ekdist", "x": hist.x, "w": hist.w,
                "C": req.C, "truncated": req.truncated, "center": req.center}
        return schemas.EkDistResponse(meta=meta, rows=rows)

    @app.post("/locallaw", response_model=schemas.LocalLawResponse)
    def locallaw(req: schemas.LocalLawRequest):
        hist, _, _, _ = histogram(req)
        cfg = cfg_for(req.prime_cutoff)
        rows = []
        for k in req.k_list:
            total = census.pi_k(hist, k)
            if total == 0:
                continue
            anchor = (float(total) if req.anchor == "empirical"
                      else analytic.predict_pi_k(hist.x, k, cfg).value)
            for ell in range(req.ell_max + 1):
                emp = census.pi_k_ell(hist, k, ell)
                pred = analytic.predict_pi_k_ell(anchor, hist.x, hist.w, k,
                                                 ell, cfg)
                pred_t = analytic.predict_pi_k_ell_taylor(anchor, hist.x,
                                                          hist.w, k, ell, cfg)
                rows.append(schemas.LocalLawRow(
                    k=k, ell=ell, empirical=emp,
                    predicted=pred, predicted_taylor=pred_t,
                    rel_deviation=abs(emp - pred) / max(emp, 1.0),
                    rel_deviation_taylor=abs(emp - pred_t) / max(emp, 1.0)))
        meta = {"command": "locallaw", "x": hist.x, "w": hist.w,
                "anchor": req.anchor, "prime_cutoff": req.prime_cutoff}
        return schemas.LocalLawResponse(meta=meta, rows=rows)

    @app.post("/charfn", response_model=schemas.CharFnResponse)
    def charfn_table(req: schemas.CharFnRequest):
        hist, _, _, _ = histogram(req)
        cfg = cfg_for(req.prime_cutoff)
        poly = charfn.gen_polynomial(hist, req.k)
        T = analytic.iterated_log2(hist.w)
        pk = poly.mass
        be = charfn.berry_esseen_integral(poly, T, pk)
        ts = np.linspace(-math.sqrt(T), math.sqrt(T), req.t_count)
        samples = charfn.charfn_samples(poly, T, [float(t) for t in ts],
                                        with_xi=req.with_xi, cfg=cfg)
        rows = [schemas.CharFnRow(
            t=s.t, exact_re=s.exact.real, exact_im=s.exact.imag,
            predicted_re=s.predicted.real, predicted_im=s.predicted.imag,
            abs_error=abs(s.exact - s.predicted), T=T, berry_esseen=be)
            for s in samples]
        meta = {"command": "charfn", "x": hist.x, "w": hist.w, "k": req.k,
                "pi_k": pk, "T": T, "berry_esseen": be,
                "with_xi": req.with_xi}
        return schemas.CharFnResponse(meta=meta, rows=rows)

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(req: schemas.PredictRequest):
        hist, _, _, _ = histogram(req)
        cfg = cfg_for(req.prime_cutoff)
        rows = []
        for k in req.k_list:
            if not 1 <= k < DIM:
                continue
            emp = census.pi_k(hist, k)
            pred = analytic.predict_pi_k(hist.x, k, cfg)
            report = analytic.PredictionReport.build(
                f"pi_{k}({hist.x})", float(emp), pred.main, pred.correction)
            rows.append(schemas.PredictRow(
                k=k, empirical=emp, main_term=report.main_term,
                correction=report.correction, predicted=pred.value,
                relative_deviation=report.relative_deviation,
                range_warning=pred.range_warning))
        meta = {"command": "predict", "x": hist.x, "w": hist.w,
                "prime_cutoff": req.prime_cutoff}
        return schemas.PredictResponse(meta=meta, rows=rows)

    return app
