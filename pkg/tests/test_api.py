import math

import pytest


def test_root(client):
    response = client.get("/")
    assert response.status_code == 200
    assert response.json()["schema"] == "sparse-mahler/1"


def test_health(client):
    assert client.get("/health").json() == {"status": "healthy"}


class TestMeasureRoutes:
    def test_measure(self, client):
        response = client.post("/api/v1/measure", json={"poly": "z^2+5*z+1"})
        assert response.status_code == 200
        data = response.json()
        assert data["method"] == "roots"
        assert data["M"] == pytest.approx(4.7913, abs=1e-4)
        assert data["m"] == pytest.approx(math.log(data["M"]))

    def test_syntax_error_is_422_with_code(self, client):
        response = client.post("/api/v1/measure", json={"poly": "1 + * z"})
        assert response.status_code == 422
        detail = response.json()["detail"]
        assert detail["code"] == "syntax_error"
        assert "4" in detail["message"]

    def test_unknown_method_rejected(self, client):
        assert client.post("/api/v1/measure", json={"poly": "z+2", "method": "newton"}).status_code == 422

    def test_measure_multi(self, client):
        response = client.post("/api/v1/measure-multi", json={"poly": "1 + x1 + x2", "budget": 2 ** 14, "seed": 3})
        assert response.status_code == 200
        assert response.json()["m"] == pytest.approx(0.3230659472, abs=0.05)

    def test_boyd_lawton(self, client):
        response = client.post("/api/v1/boyd-lawton", json={"poly": "1 + x1 + x2", "ns": [2, 5]})
        assert response.status_code == 200
        data = response.json()
        assert [row["n"] for row in data["rows"]] == [2, 5]
        assert data["rows"][0]["m"] == pytest.approx(0.0, abs=1e-9)
        assert data["safe_index"]["threshold"] == 1.0

    def test_boyd_lawton_rejects_unsorted(self, client):
        response = client.post("/api/v1/boyd-lawton", json={"poly": "1 + x1 + x2", "ns": [5, 2]})
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "invalid_argument"


class TestCyclotomicRoutes:
    def test_cyclo(self, client):
        data = client.post("/api/v1/cyclo", json={"poly": "z^3 - 2*z^2 + 2*z - 1"}).json()
        assert data["is_cyclotomic_product"]
        assert data["factorization"]["factors"] == [{"n": 1, "mult": 1}, {"n": 6, "mult": 1}]

    def test_not_cyclotomic(self, client):
        data = client.post("/api/v1/cyclo", json={"poly": "z^2 - z - 1"}).json()
        assert not data["is_cyclotomic_product"]

    @pytest.mark.parametrize("n,phi_at_one,degree", [(1, 0, 1), (6, 1, 2), (9, 3, 6)])
    def test_phi(self, client, n, phi_at_one, degree):
        data = client.get(f"/api/v1/cyclo/phi/{n}").json()
        assert (data["phi_at_one"], data["degree"]) == (phi_at_one, degree)

    def test_phi_out_of_range(self, client):
        assert client.get("/api/v1/cyclo/phi/0").status_code == 422


class TestBoundsRoutes:
    def test_verify(self, client):
        data = client.post("/api/v1/bounds/verify", json={"poly": "z^3+z+1"}).json()
        assert data["satisfied"]
        assert data["lower_bound_log"] == pytest.approx(math.log(0.5))

    def test_verify_zero_polynomial(self, client):
        response = client.post("/api/v1/bounds/verify", json={"poly": "z - z"})
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "zero_polynomial"

    def test_proof_chain(self, client):
        data = client.post("/api/v1/bounds/proof-chain", json={"poly": "z^4 + z^2 + 3*z^3"}).json()
        assert data["z_power"] == 2
        assert [step["poly_text"] for step in data["chain"]] == ["(2*z + 3)/2"]

    def test_formulas(self, client):
        data = client.get("/api/v1/bounds/formulas/3", params={"b": 1.0}).json()
        assert (data["height_cap"], data["tuple_count_cap"]) == (2, 125)
        assert data["extremal_ratio"] == "1"

    def test_formulas_reject_k1(self, client):
        assert client.get("/api/v1/bounds/formulas/1").status_code == 422


class TestCensusRoutes:
    def test_construct(self, client):
        data = client.post("/api/v1/census/construct", json={"s": 2, "t": 2, "m": 3, "l": 5}).json()
        assert data["exponents"] == [8, 5, 3]
        assert data["kind"] == "sc_member"

    def test_construct_precondition(self, client):
        response = client.post("/api/v1/census/construct", json={"s": 2, "t": 2, "m": 2, "l": 3})
        assert response.status_code == 422
        assert response.json()["detail"]["code"] == "construction_precondition"

    def test_search_sc(self, client):
        data = client.post("/api/v1/census/search-sc", json={"k": 5, "max_degree": 8}).json()
        found = {tuple(member["exponents"]) for member in data["members"]}
        assert {(4, 3, 2, 1), (6, 4, 3, 2)} <= found

    def test_search_sc_degree_below_k(self, client):
        assert client.post("/api/v1/census/search-sc", json={"k": 6, "max_degree": 3}).status_code == 422
