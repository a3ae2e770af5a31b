"""Request/response models of the query service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..sieve import DEFAULT_SEGMENT_LEN, MIN_SEGMENT_LEN, X_MAX

DEFAULT_K_LIST = list(range(1, 9))


class HistogramParams(BaseModel):
    x: int = Field(ge=2, le=X_MAX)
    w: int = Field(ge=2)
    segment_len: int = Field(default=DEFAULT_SEGMENT_LEN, ge=MIN_SEGMENT_LEN)
    threads: int = Field(default=1, ge=1)
    build: bool = True


class SieveRequest(HistogramParams):
    rebuild: bool = False


class HistogramMeta(BaseModel):
    x: int
    w: int
    total: int
    cache_path: str
    built: bool
    elapsed_seconds: float


class SieveResponse(BaseModel):
    meta: HistogramMeta


class CountsRequest(HistogramParams):
    k_list: list[int] = Field(default_factory=lambda: list(DEFAULT_K_LIST))
    ell_max: int | None = Field(default=None, ge=0, le=63)


class CountsRow(BaseModel):
    k: int
    ell: int
    pi_k: int
    pi_k_ell: int


class CountsResponse(BaseModel):
    meta: dict
    rows: list[CountsRow]


class EkDistRequest(HistogramParams):
    k_list: list[int] = Field(default_factory=lambda: list(DEFAULT_K_LIST))
    C: float = 10.0
    truncated: bool = False
    center: Literal["x", "w"] = "x"


class EkDistRow(BaseModel):
    k: int
    y: float
    empirical_cdf: float
    phi: float
    abs_deviation: float
    ks_distance: float
    d_k: int


class EkDistResponse(BaseModel):
    meta: dict
    rows: list[EkDistRow]


class LocalLawRequest(HistogramParams):
    k_list: list[int] = Field(default_factory=lambda: [2, 3])
    ell_max: int = Field(default=30, ge=0, le=40)
    prime_cutoff: int = Field(default=10 ** 5, ge=10 ** 3)
    anchor: Literal["empirical", "analytic"] = "empirical"


class LocalLawRow(BaseModel):
    k: int
    ell: int
    empirical: int
    predicted: float
    predicted_taylor: float
    rel_deviation: float
    rel_deviation_taylor: float


class LocalLawResponse(BaseModel):
    meta: dict
    rows: list[LocalLawRow]


class CharFnRequest(HistogramParams):
    k: int = Field(default=3, ge=1, le=63)
    t_count: int = Field(default=41, ge=3, le=4001)
    with_xi: bool = True
    prime_cutoff: int = Field(default=10 ** 5, ge=10 ** 3)


class CharFnRow(BaseModel):
    t: float
    exact_re: float
    exact_im: float
    predicted_re: float
    predicted_im: float
    abs_error: float
    T: float
    berry_esseen: float


class CharFnResponse(BaseModel):
    meta: dict
    rows: list[CharFnRow]


class PredictRequest(HistogramParams):
    k_list: list[int] = Field(default_factory=lambda: list(DEFAULT_K_LIST))
    prime_cutoff: int = Field(default=10 ** 5, ge=10 ** 3)


class PredictRow(BaseModel):
    k: int
    empirical: int
    main_term: float
    correction: float
    predicted: float
    relative_deviation: float
    range_warning: bool


class PredictResponse(BaseModel):
    meta: dict
    rows: list[PredictRow]
