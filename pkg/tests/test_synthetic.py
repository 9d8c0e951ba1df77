import numpy as np
import pytest

from colorhomography.als import als_solve
from colorhomography.correction import fit_least_squares
from colorhomography.errors import InputError
from colorhomography.synthetic import SynthSpec, generate_synthetic


def test_no_shading_no_noise():
    c = generate_synthetic(SynthSpec(shading_low=1.0, shading_high=1.0, seed=3))
    m = c.measurement
    np.testing.assert_allclose(m.observed, m.shading_corrected, rtol=1e-14)
    np.testing.assert_allclose(fit_least_squares(m.observed, m.reference).matrix, c.correction, atol=1e-10)


def test_deterministic_under_seed():
    a = generate_synthetic(SynthSpec(seed=42, noise_sigma=0.01)).measurement
    b = generate_synthetic(SynthSpec(seed=42, noise_sigma=0.01)).measurement
    for name in ("observed", "reference", "shading_corrected"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()


def test_default_spec_is_an_exact_model():
    m = generate_synthetic(SynthSpec()).measurement
    res = als_solve(m.observed, m.reference)
    assert res.residuals[-1] < 1e-8 * np.linalg.norm(m.reference)


@pytest.mark.parametrize("mode", ["random-full-rank", "random-diagonal"])
def test_construction(mode):
    c = generate_synthetic(SynthSpec(mode=mode, seed=1))
    m = c.measurement
    assert m.observed.shape == (24, 3) and np.all(m.observed > 0)
    assert np.all((m.reference >= 0.05) & (m.reference <= 0.95))
    assert np.all((c.shading >= 0.5) & (c.shading <= 1.5))
    np.testing.assert_allclose(m.observed, c.shading[:, None] * m.reference @ np.linalg.inv(c.correction), rtol=1e-12)
    if mode == "random-diagonal":
        assert np.count_nonzero(c.correction - np.diag(np.diag(c.correction))) == 0


@pytest.mark.parametrize(
    "kw", [dict(n_patches=3), dict(shading_low=0), dict(shading_low=2, shading_high=1), dict(noise_sigma=-1), dict(mode="x")]
)
def test_spec_validation(kw):
    with pytest.raises(InputError):
        SynthSpec(**kw)
