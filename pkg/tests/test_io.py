import numpy as np
import pytest

from helpers import random_latent_dag
from latentpag import fixtures as F
from latentpag.graph import LatentDag, Role
from latentpag.io import (
    DataError,
    default_names,
    format_pag,
    read_covariance,
    read_dag,
    read_data,
    read_pag,
    write_dag,
    write_matrix,
    write_pag,
)
from latentpag.simbench import random_weighted_dag


def same_dag(a: LatentDag, b: LatentDag) -> bool:
    if a.roles != b.roles or sorted(a.directed_edges()) != sorted(b.directed_edges()):
        return False
    if a.weights is None or b.weights is None:
        return a.weights is None and b.weights is None
    return np.array_equal(a.weights, b.weights)


class TestPagFiles:
    @pytest.mark.parametrize("factory, edges", [
        (F.six_variables, F.SIX_VARIABLES_PAG),
        (F.five_variables, F.FIVE_VARIABLES_RFCI_PAG),
        (F.latent_collider, F.LATENT_COLLIDER_PAG),
    ])
    def test_round_trip(self, tmp_path, factory, edges):
        fx = factory()
        g = fx.pag(edges)
        write_pag(tmp_path / "g.csv", g, fx.names)
        back, names = read_pag(tmp_path / "g.csv")
        assert back == g and names == list(fx.names)

    def test_layout(self):
        g = F.parse_pag("X1 o-> X2", ["X1", "X2"])
        assert format_pag(g) == "X1,X2\n0,2\n1,0\n"

    def test_default_names(self):
        assert default_names(3) == ["X1", "X2", "X3"]

    @pytest.mark.parametrize("text", [
        "a,b\n0,1\n",
        "a,b\n0,1\n1,0,0\n",
        "a,b\n0,x\n1,0\n",
        "a,b\n0,1\n0,0\n",  # only one endpoint carries a mark
        "a,b\n1,0\n0,0\n",  # nonzero diagonal
        "a,b\n0,7\n1,0\n",
    ])
    def test_malformed(self, tmp_path, text):
        (tmp_path / "g.csv").write_text(text)
        with pytest.raises(DataError):
            read_pag(tmp_path / "g.csv")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_pag(tmp_path / "nope.csv")


class TestDagFiles:
    @pytest.mark.parametrize("seed", range(25))
    def test_round_trip_random(self, tmp_path, seed):
        d = random_latent_dag(seed, max_vertices=9, with_selection=True)
        write_dag(tmp_path / "d.txt", d)
        back, names = read_dag(tmp_path / "d.txt")
        assert names is None and same_dag(back, d)

    @pytest.mark.parametrize("seed", range(10))
    def test_round_trip_weights_exact(self, tmp_path, seed):
        _, d = random_weighted_dag(12, 2.0, seed)
        write_dag(tmp_path / "d.txt", d)
        back, _ = read_dag(tmp_path / "d.txt")
        assert same_dag(back, d)

    def test_names(self, tmp_path):
        fx = F.six_variables()
        labels = list(fx.names) + ["L1", "L2"]
        write_dag(tmp_path / "d.txt", fx.dag, labels)
        back, names = read_dag(tmp_path / "d.txt")
        assert names == labels and same_dag(back, fx.dag)

    def test_comments_and_default_roles(self, tmp_path):
        (tmp_path / "d.txt").write_text("# chain\np 3\n\nedge 0 1  # first\nedge 1 2\nrole 2 latent\n")
        d, _ = read_dag(tmp_path / "d.txt")
        assert d.roles == (Role.OBSERVED, Role.OBSERVED, Role.LATENT)
        assert sorted(d.directed_edges()) == [(0, 1), (1, 2)]

    @pytest.mark.parametrize("text", [
        "edge 0 1\n",
        "p 2\nedge 0 2\n",
        "p 2\nedge 0 1\nedge 1 0\n",
        "p 2\nrole 0 hidden\n",
        "p 3\nedge 0 1 0.5\nedge 1 2\n",
        "p 2\nedge 0 1 abc\n",
        "p 2\nname 0 a\n",
        "p x\n",
        "p 2\nfrobnicate\n",
    ])
    def test_malformed(self, tmp_path, text):
        (tmp_path / "d.txt").write_text(text)
        with pytest.raises(DataError):
            read_dag(tmp_path / "d.txt")


class TestTables:
    def test_data_round_trip(self, tmp_path):
        x = np.random.default_rng(0).normal(size=(7, 3))
        write_matrix(tmp_path / "x.csv", ["a", "b", "c"], x)
        names, back = read_data(tmp_path / "x.csv")
        assert names == ["a", "b", "c"] and np.array_equal(back, x)

    def test_covariance(self, tmp_path):
        write_matrix(tmp_path / "c.csv", ["a", "b"], np.eye(2))
        names, c = read_covariance(tmp_path / "c.csv")
        assert names == ["a", "b"] and np.array_equal(c, np.eye(2))

    @pytest.mark.parametrize("text, reader", [
        ("a,b\n1,2\n", read_data),
        ("a,b\n1,2\n3\n", read_data),
        ("a,a\n1,2\n3,4\n", read_data),
        ("a,b\n1,nan\n3,4\n", read_data),
        ("a,b\n1,q\n3,4\n", read_data),
        ("a,b\n1,0\n", read_covariance),
        ("a,b\n1,0\n0,1\n0,0\n", read_covariance),
    ])
    def test_malformed(self, tmp_path, text, reader):
        (tmp_path / "t.csv").write_text(text)
        with pytest.raises(DataError):
            reader(tmp_path / "t.csv")
