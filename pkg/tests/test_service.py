import math

import pytest
from fastapi.testclient import TestClient

from ekstat import census
from ekstat.service import create_app
from ekstat.sieve import SieveConfig, build_histogram, save_histogram


@pytest.fixture()
def client(tmp_path):
    app = create_app(cache_dir=tmp_path / "cache")
    with TestClient(app) as c:
        yield c


def test_health(client):
    assert client.get("/health").json() == {"status": "ok"}


def test_sieve_builds_then_reuses(client, tmp_path):
    body = {"x": 1000, "w": 100}
    first = client.post("/sieve", json=body).json()["meta"]
    assert first["built"] is True
    assert first["total"] == 999
    assert (tmp_path / "cache" / "ekh_x1000_w100.bin").exists()
    second = client.post("/sieve", json=body).json()["meta"]
    assert second["built"] is False
    rebuilt = client.post("/sieve", json=dict(body, rebuild=True)).json()["meta"]
    assert rebuilt["built"] is True


def test_counts_match_census(client):
    data = client.post("/counts", json={"x": 1000, "w": 100,
                                        "k_list": [1, 2, 3]}).json()
    hist = build_histogram(SieveConfig(x=1000, w=100))
    for row in data["rows"]:
        assert row["pi_k"] == census.pi_k(hist, row["k"])
        assert row["pi_k_ell"] == census.pi_k_ell(hist, row["k"], row["ell"])
    ks = {row["k"] for row in data["rows"]}
    assert ks == {1, 2, 3}


def test_counts_skips_empty_classes(client):
    data = client.post("/counts", json={"x": 10, "w": 10,
                                        "k_list": [1, 2, 5]}).json()
    assert {row["k"] for row in data["rows"]} == {1, 2}


def test_ekdist_monotone_cdf(client):
    data = client.post("/ekdist", json={"x": 2000, "w": 1000,
                                        "k_list": [2], "C": 10.0}).json()
    cdf = [row["empirical_cdf"] for row in data["rows"]]
    assert cdf == sorted(cdf)
    assert cdf[-1] == 1.0
    assert all(row["d_k"] == 0 for row in data["rows"])


def test_locallaw_k1_ell0_prediction_vanishes(client):
    data = client.post("/locallaw", json={"x": 1000, "w": 100, "k_list": [1],
                                          "ell_max": 2}).json()
    first = data["rows"][0]
    assert first["k"] == 1 and first["ell"] == 0
    assert first["predicted"] == 0.0


def test_charfn_prediction_matches_at_t0(client):
    data = client.post("/charfn", json={"x": 2000, "w": 100, "k": 2,
                                        "t_count": 5}).json()
    mid = data["rows"][2]
    assert mid["t"] == 0.0
    assert mid["abs_error"] <= 1e-6 * data["meta"]["pi_k"]
    assert data["meta"]["berry_esseen"] > 0.0
    assert data["meta"]["T"] == pytest.approx(math.log(math.log(100)))


def test_predict_k1_main_term(client):
    data = client.post("/predict", json={"x": 1000, "w": 100,
                                         "k_list": [1, 2]}).json()
    row = data["rows"][0]
    assert row["main_term"] == pytest.approx(1000 / math.log(1000), rel=1e-12)
    assert row["correction"] == 0.0
    assert not row["range_warning"]


def test_cache_miss_404(client):
    resp = client.post("/counts", json={"x": 777, "w": 77, "build": False})
    assert resp.status_code == 404
    assert resp.json()["kind"] == "CacheMissError"


def test_validation_422(client):
    resp = client.post("/ekdist", json={"x": 1000, "w": 100, "center": "zzz"})
    assert resp.status_code == 422


def test_domain_error_400(client):
    resp = client.post("/charfn", json={"x": 1000, "w": 10, "k": 2})
    assert resp.status_code == 400
    assert resp.json()["kind"] == "DomainError"


def test_corrupt_cache_500(tmp_path):
    cache = tmp_path / "cache"
    cache.mkdir()
    hist = build_histogram(SieveConfig(x=500, w=50))
    path = cache / "ekh_x500_w50.bin"
    save_histogram(hist, path)
    blob = bytearray(path.read_bytes())
    blob[200] ^= 0xFF
    path.write_bytes(bytes(blob))
    with TestClient(create_app(cache_dir=cache)) as client:
        resp = client.post("/counts", json={"x": 500, "w": 50})
        assert resp.status_code == 500
        assert resp.json()["kind"] == "CacheChecksumError"
