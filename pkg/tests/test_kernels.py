import numpy as np
import pytest

from bicmb import kernels
from bicmb.sim import label_metrics, output_labels, predecessors

from conftest import code

needs_compiled = pytest.mark.skipif(kernels._compiled is None, reason="extension not built")


def _problem(gens, B=6, T=40, seed=0):
    tr = code(gens)[0]
    rng = np.random.default_rng(seed)
    metrics = rng.random((B, T * tr.n_c, 2))
    lm = np.ascontiguousarray(label_metrics(metrics, tr, None, T))
    ps, pu = predecessors(tr)
    init = np.full((B, tr.num_states), np.inf)
    init[:, 0] = 0.0
    return tr, lm, ps, pu, init


@needs_compiled
@pytest.mark.parametrize("gens", ["5,7", "133,171", "133,145,175"])
def test_backends_agree(gens):
    tr, lm, ps, pu, init = _problem(gens)
    out = {}
    for name in ("cython", "python"):
        acs, tb = kernels.get_kernels(name)
        dec, final = acs(lm, output_labels(tr), ps, pu, init)
        start = np.argmin(np.asarray(final), axis=1)
        out[name] = (np.asarray(dec), np.asarray(final), np.asarray(tb(np.asarray(dec), ps, pu, start)))
    for a, b in zip(out["cython"], out["python"]):
        np.testing.assert_array_equal(a, b)


def test_ties_prefer_lower_predecessor():
    tr, lm, ps, pu, init = _problem("5,7", B=1, T=5)
    lm[:] = 0.0
    init[:] = 0.0
    acs, _ = kernels.get_kernels("python")
    dec, _ = acs(lm, output_labels(tr), ps, pu, init)
    assert not np.asarray(dec).any()


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")
    with pytest.raises(ValueError):
        kernels.get_kernels("fortran")
