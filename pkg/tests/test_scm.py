import numpy as np
import pytest

from evenif.errors import ScmConfigError
from evenif.scm import Scm, ScmNode, independent_scm, load_scm
from evenif import synth


def chain_scm():
    return Scm((
        ScmNode("x1"),
        ScmNode("x2", parents=("x1",), weights=(0.5,)),
    ))


def test_root_abduction_is_identity():
    scm = independent_scm(["a", "b", "c"])
    x = np.array([1.0, -2.0, 0.3])
    assert np.array_equal(scm.abduct(x), x)


def test_chain_abduction_hand_value():
    scm = chain_scm()
    u = scm.abduct(np.array([1.0, 0.7]))
    assert u == pytest.approx([1.0, 0.2])


def test_push_abduct_roundtrip_random():
    rng = np.random.default_rng(0)
    scm = synth.adult_scm()
    for _ in range(25):
        u = rng.normal(size=len(scm))
        assert np.allclose(scm.abduct(scm.push(u)), u, atol=1e-12)
        x = rng.normal(size=len(scm))
        assert np.allclose(scm.push(scm.abduct(x)), x, atol=1e-12)


def test_intervention_hand_value():
    scm = chain_scm()
    out = scm.process_semifactual(np.array([1.0, 0.7]), {0: 2.0})
    # u2 = 0.2; new x2 = 0.5 * 2.0 + 0.2
    assert out == pytest.approx([2.0, 1.2])


def test_identity_intervention_is_noop():
    scm = chain_scm()
    x = np.array([1.0, 0.7])
    assert np.allclose(scm.process_semifactual(x, {0: 1.0, 1: 0.7}), x)


def test_independent_scm_is_substitution():
    scm = independent_scm(["a", "b"])
    out = scm.process_semifactual(np.array([1.0, 2.0]), {0: 5.0})
    assert out == pytest.approx([5.0, 2.0])


def test_unknown_intervention_index_rejected():
    with pytest.raises(ScmConfigError):
        chain_scm().process_semifactual(np.array([1.0, 0.7]), {7: 0.0})


def test_cycle_rejected():
    with pytest.raises(ScmConfigError, match="cycle"):
        Scm((
            ScmNode("a", parents=("b",), weights=(1.0,)),
            ScmNode("b", parents=("a",), weights=(1.0,)),
        ))
    with pytest.raises(ScmConfigError):
        Scm((ScmNode("a", parents=("a",), weights=(1.0,)),))


def test_unknown_parent_rejected():
    with pytest.raises(ScmConfigError, match="unknown parent"):
        Scm((ScmNode("a", parents=("zz",), weights=(1.0,)),))


def test_config_roundtrip(tmp_path):
    scm = synth.compas_scm()
    path = tmp_path / "scm.json"
    scm.save(path)
    loaded = load_scm(path)
    assert loaded.to_dict() == scm.to_dict()
    assert loaded.names == ["age", "sex", "race", "priors_count"]


def test_builtin_configs_are_valid():
    adult = synth.adult_scm()
    assert adult.names == [f.name for f in synth.adult_schema().features]
    compas = synth.compas_scm()
    assert compas.names == [f.name for f in synth.compas_schema().features]


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(2)
    scm = synth.adult_scm()
    x = rng.uniform(0, 1, size=len(scm))
    for subset in ([1], [5], [1, 5]):
        J = scm.jacobian(subset)
        base_vals = np.array([x[j] for j in subset])
        step = 1e-6
        for col, node in enumerate(subset):
            hi = dict(zip(subset, base_vals)); hi[node] = base_vals[col] + step
            lo = dict(zip(subset, base_vals)); lo[node] = base_vals[col] - step
            fd = (scm.process_semifactual(x, hi) - scm.process_semifactual(x, lo)) / (2 * step)
            assert np.allclose(J[:, col], fd, atol=1e-8)


def test_input_jacobian_identity_without_interventions():
    scm = synth.adult_scm()
    assert np.allclose(scm.input_jacobian([]), np.eye(len(scm)))


def test_input_jacobian_kills_intervened_rows():
    scm = chain_scm()
    J = scm.input_jacobian([0])
    # intervened root: row zero; child keeps its own input and loses the
    # parent's contribution through abduction
    assert np.allclose(J, [[0.0, 0.0], [-0.5, 1.0]])


def _random_dag(rng, n, shape):
    nodes = [ScmNode("n0")]
    for i in range(1, n):
        if shape == "chain":
            parents = (f"n{i-1}",)
        else:  # diamond-ish: attach to up to two earlier nodes
            k = int(rng.integers(1, min(i, 2) + 1))
            idx = rng.choice(i, size=k, replace=False)
            parents = tuple(f"n{j}" for j in sorted(idx))
        weights = tuple(float(w) for w in rng.uniform(0.2, 1.0, size=len(parents))
                        * rng.choice([-1.0, 1.0], size=len(parents)))
        nodes.append(ScmNode(f"n{i}", parents=parents, weights=weights,
                             intercept=float(rng.normal(0, 0.2))))
    return Scm(tuple(nodes))


def test_sink_intervention_equals_substitution_exactly():
    # the intervened node has no descendants: propagation adds nothing
    scm = chain_scm()
    x = np.array([1.0, 0.7])
    out = scm.process_semifactual(x, {1: 2.5})
    assert np.array_equal(out, np.array([1.0, 2.5]))


def test_structural_change_never_smaller_than_substitution():
    """Total absolute change through the causal push is at least the
    substitution's own change, strictly larger when an intervened node has
    downstream descendants that move."""
    rng = np.random.default_rng(7)
    for trial in range(300):
        n = int(rng.integers(2, 6))
        scm = _random_dag(rng, n, "chain" if trial % 2 == 0 else "diamond")
        x = rng.normal(size=n)
        k = int(rng.integers(1, n))
        targets = rng.choice(n, size=k, replace=False)
        interventions = {int(j): float(x[j] + rng.normal(0, 1)) for j in targets}
        out = scm.process_semifactual(x, interventions)
        sub = x.copy()
        for j, v in interventions.items():
            sub[j] = v
        causal_change = np.abs(out - x).sum()
        subst_change = np.abs(sub - x).sum()
        assert causal_change >= subst_change - 1e-12
