import pytest
from fastapi.testclient import TestClient

from gract import (IndexConfig, TrajectoryIndex, gen_synthetic,
                   write_pings_csv)
from gract.service.app import create_app


@pytest.fixture(scope="module")
def dataset():
    return gen_synthetic(12, 90, 128, 128, seed=21)


@pytest.fixture(scope="module")
def index(dataset):
    return TrajectoryIndex.build(dataset, IndexConfig(period=16))


@pytest.fixture()
def client(index):
    return TestClient(create_app({"fleet": index}))


def test_list_indexes(client):
    data = client.get("/indexes").json()
    assert [d["name"] for d in data] == ["fleet"]
    assert data[0]["num_objects"] == 12
    assert data[0]["mode"] == "gract"


def test_position_query(client, index, dataset):
    obj = dataset.object_ids[3]
    resp = client.post("/indexes/fleet/query/position",
                       json={"object": obj, "t": 40})
    assert resp.status_code == 200
    body = resp.json()
    expected = index.position(obj, 40)
    got = body["cell"]
    assert (got["x"], got["y"]) == expected
    assert body["stats"]["symbols_processed"] >= 0


def test_trajectory_query(client, index, dataset):
    obj = dataset.object_ids[0]
    resp = client.post("/indexes/fleet/query/trajectory",
                       json={"object": obj, "ts": 5, "te": 9})
    points = resp.json()["points"]
    assert [p["t"] for p in points] == [5, 6, 7, 8, 9]
    expected = index.trajectory(obj, 5, 9)
    for p, (t, cell) in zip(points, expected):
        got = (p["cell"]["x"], p["cell"]["y"]) if p["cell"] else None
        assert got == cell


def test_slice_query(client, index):
    resp = client.post("/indexes/fleet/query/slice",
                       json={"rect": {"x1": 0, "y1": 0, "x2": 127, "y2": 127},
                             "t": 30})
    results = resp.json()["results"]
    expected = index.time_slice(
        __import__("gract").CellRect(0, 0, 127, 127), 30)
    assert len(results) == len(expected)
    assert [r["object"] for r in results] == [o for o, _ in expected]


def test_interval_query(client, index):
    from gract import CellRect
    resp = client.post("/indexes/fleet/query/interval",
                       json={"rect": {"x1": 10, "y1": 10, "x2": 80, "y2": 80},
                             "ts": 10, "te": 40})
    assert resp.json()["objects"] == index.time_interval(
        CellRect(10, 10, 80, 80), 10, 40)


def test_stats_endpoint(client, index):
    resp = client.get("/indexes/fleet/stats")
    body = resp.json()
    assert body["total_bytes"] == index.stats_report().total_bytes
    assert body["mode"] == "gract"
    assert 0 < body["ratio"] < 1


def test_unknown_index_404(client):
    assert client.get("/indexes/nope/stats").status_code == 404
    resp = client.post("/indexes/nope/query/position",
                       json={"object": "x", "t": 0})
    assert resp.status_code == 404


def test_unknown_object_404(client):
    resp = client.post("/indexes/fleet/query/position",
                       json={"object": "ghost", "t": 0})
    assert resp.status_code == 404


def test_instant_out_of_range_400(client, dataset):
    resp = client.post("/indexes/fleet/query/position",
                       json={"object": dataset.object_ids[0], "t": 10**6})
    assert resp.status_code == 400


def test_malformed_body_422(client):
    resp = client.post("/indexes/fleet/query/position", json={"object": "x"})
    assert resp.status_code == 422


def test_load_and_build_endpoints(tmp_path, index, dataset):
    app = create_app()
    client = TestClient(app)
    idx_path = tmp_path / "a.idx"
    index.save(str(idx_path))
    resp = client.post("/indexes/load",
                       json={"name": "loaded", "path": str(idx_path)})
    assert resp.status_code == 200
    assert resp.json()["num_instants"] == index.num_instants

    csv_path = tmp_path / "fleet.csv"
    write_pings_csv(dataset, csv_path.as_posix())
    resp = client.post("/indexes/build",
                       json={"name": "built", "input_path": str(csv_path),
                             "period": 16, "mode": "scdc"})
    assert resp.status_code == 200
    assert resp.json()["mode"] == "scdc"
    names = {d["name"] for d in client.get("/indexes").json()}
    assert names == {"loaded", "built"}

    obj = dataset.object_ids[2]
    a = client.post("/indexes/loaded/query/position",
                    json={"object": obj, "t": 33}).json()["cell"]
    b = client.post("/indexes/built/query/position",
                    json={"object": obj, "t": 33}).json()["cell"]
    assert a == b

    resp = client.post("/indexes/load",
                       json={"name": "x", "path": str(tmp_path / "nope.idx")})
    assert resp.status_code == 404
