import numpy as np
import pytest

import ManifoldLens.curvature as cv
import ManifoldLens.synth as synth
import ManifoldLens.tangent as tg
from ManifoldLens.errors import FormatError, ParameterError


def test_same_seed_same_points():
    spec = synth.SynthSpec("sphere", d=2, D=5, n=101, rho=0.3, seed=42)
    a = synth.sample(spec)
    b = synth.sample(spec)
    assert np.array_equal(a.points, b.points)
    c = synth.sample(synth.SynthSpec("sphere", d=2, D=5, n=101, rho=0.3, seed=43))
    assert not np.array_equal(a.points, c.points)


def test_base_point_is_embedded_origin():
    spec = synth.SynthSpec("graph", d=2, D=6, n=50, rho=0.2, hessians=[[[1.0, 0.0], [0.0, -1.0]]], seed=1)
    patch = synth.sample(spec)
    emb = synth.embedding_for(spec)
    assert patch.base_index == 0
    assert np.allclose(patch.base, emb.offset)
    assert patch.label == "graph"
    assert patch.source == "synth:graph:1"


def test_embedding_rotation_is_orthogonal():
    q = synth.random_orthogonal(7, np.random.default_rng(0))
    assert np.allclose(q @ q.T, np.eye(7), atol=1e-12)


def test_sphere_points_lie_on_the_sphere():
    spec = synth.SynthSpec("sphere", d=3, D=6, n=200, rho=0.5, radius=2.0, seed=3)
    patch = synth.sample_sphere(spec)
    center = synth.embedding_for(spec).apply(np.array([[0.0, 0.0, 0.0, -2.0]]))[0]
    dist = np.linalg.norm(patch.points - center, axis=1)
    assert np.allclose(dist, 2.0, atol=1e-12)
    # geodesic distance from the base never exceeds rho
    angles = np.arccos(np.clip((patch.points - center) @ (patch.base - center) / 4.0, -1.0, 1.0))
    assert np.max(2.0 * angles) <= 0.5 + 1e-9


def test_flat_points_span_d_dimensions():
    spec = synth.SynthSpec("flat", d=4, D=9, n=100, rho=1.0, seed=0)
    spectrum = tg.pca_spectrum(synth.sample_flat(spec))
    assert np.count_nonzero(spectrum.eigenvalues) == 4


def test_antithetic_pairs_keep_the_mean_at_the_base():
    spec = synth.SynthSpec("flat", d=3, D=5, n=64, rho=1.0, seed=9)
    patch = synth.sample_flat(spec)
    assert np.allclose(patch.points.mean(axis=0), patch.base, atol=1e-12)


def test_noise_stream_perturbs_slightly():
    clean = synth.sample(synth.SynthSpec("flat", d=2, D=4, n=60, rho=1.0, seed=5))
    noisy = synth.sample(synth.SynthSpec("flat", d=2, D=4, n=60, rho=1.0, seed=5, noise=1e-6))
    diff = np.abs(clean.points - noisy.points)
    assert 0.0 < diff.max() < 1e-4


def test_sphere_oracle():
    oracle = synth.oracle_for(synth.SynthSpec("sphere", d=2, D=4, n=10, rho=0.1, radius=2.0))
    assert oracle.dimension == 2
    assert oracle.sectional == [pytest.approx(0.25)]
    assert oracle.riemann == [pytest.approx(-0.25)]


def test_graph_oracle_single_normal():
    spec = synth.SynthSpec("graph", d=2, D=4, n=10, rho=0.1, hessians=[[[2.0, 0.0], [0.0, 3.0]]])
    assert synth.oracle_for(spec).sectional == [pytest.approx(6.0)]


def test_graph_oracle_two_normals_cancel():
    hess = np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])])
    spec = synth.SynthSpec("graph", d=2, D=5, n=10, rho=0.1, hessians=hess)
    assert synth.oracle_for(spec).sectional == [pytest.approx(0.0)]


def test_flat_oracle_is_zero():
    oracle = synth.oracle_for(synth.SynthSpec("flat", d=3, D=5, n=20, rho=1.0))
    assert oracle.sectional == [0.0, 0.0, 0.0]
    assert oracle.riemann == [0.0] * 6
    assert oracle.to_dict()["dimension"] == 3


def test_patch_too_large_for_sphere():
    spec = synth.SynthSpec("sphere", d=2, D=4, n=20, rho=2.0, radius=1.0)
    with pytest.raises(ParameterError) as exc:
        synth.sample(spec)
    assert "too large" in str(exc.value)


def test_spec_validation():
    bad = [
        synth.SynthSpec("flat", d=4, D=4, n=100, rho=1.0),
        synth.SynthSpec("flat", d=3, D=5, n=5, rho=1.0),
        synth.SynthSpec("flat", d=2, D=5, n=50, rho=0.0),
        synth.SynthSpec("flat", d=2, D=5, n=50, rho=1.0, noise=-1.0),
        synth.SynthSpec("graph", d=2, D=5, n=50, rho=0.1),
        synth.SynthSpec("graph", d=2, D=5, n=50, rho=0.1, hessians=[[[0.0, 1.0], [2.0, 0.0]]]),
        synth.SynthSpec("graph", d=2, D=3, n=50, rho=0.1, hessians=np.ones((2, 2, 2))),
        synth.SynthSpec("sphere", d=2, D=5, n=50, rho=0.1, radius=-1.0),
    ]
    for spec in bad:
        with pytest.raises(ParameterError):
            spec.validate()


def test_sampler_rejects_other_kind():
    with pytest.raises(ParameterError):
        synth.sample_flat(synth.SynthSpec("sphere", d=2, D=4, n=20, rho=0.1))


def test_unknown_kind():
    with pytest.raises(ValueError):
        synth.SynthSpec("torus", d=2, D=4, n=20, rho=0.1)


def test_spec_to_dict():
    spec = synth.SynthSpec("sphere", d=2, D=4, n=20, rho=0.1, radius=3.0, seed=7)
    data = spec.to_dict()
    assert data["kind"] == "sphere"
    assert data["radius"] == 3.0
    assert data["seed"] == 7
    assert "hessians" not in data


def test_parse_hessians():
    hess = synth.parse_hessians(["2,0;0,3", "1 1; 1 -1"], 2)
    assert hess.shape == (2, 2, 2)
    assert hess[0].tolist() == [[2.0, 0.0], [0.0, 3.0]]
    assert hess[1].tolist() == [[1.0, 1.0], [1.0, -1.0]]
    with pytest.raises(ParameterError):
        synth.parse_hessians(["1,2,3;4,5,6"], 2)
    with pytest.raises(FormatError):
        synth.parse_hessians(["1,x;0,1"], 2)


def test_noisy_flat_patches_estimate_their_dimension():
    for seed in range(10):
        spec = synth.SynthSpec("flat", d=7, D=50, n=2000, rho=1.0, noise=1e-6, seed=seed)
        spectrum = tg.pca_spectrum(synth.sample_flat(spec))
        assert tg.estimate_dimension(spectrum, 0.90) == 7


def test_sphere_error_shrinks_with_patch_radius():
    errors = []
    for rho in (0.4, 0.2, 0.1):
        spec = synth.SynthSpec("sphere", d=2, D=5, n=1000, rho=rho, radius=1.0, seed=12)
        report = cv.patch_curvature(synth.sample_sphere(spec))
        errors.append(abs(report.sectional_distribution[0] - 1.0))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 0.01
