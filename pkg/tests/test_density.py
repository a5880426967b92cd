import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from maasslab import density, satake, sieve
from maasslab.bounds import FormMeta
from maasslab.density import FormFamily
from maasslab.errors import DataGapError, InvalidInputError
from maasslab.satake import CoeffTriple

BOUNDARY = CoeffTriple(3.0, 16.0, 5.0)
ZERO_EIGENVALUE = CoeffTriple(-1.0, 0.0, 1.0)
THIRD_PI = CoeffTriple(0.0, 1.0, -1.0)


def test_chebyshev_weight_boundary():
    assert density.chebyshev_weight([BOUNDARY, BOUNDARY], 2) == 1936.0


def test_chebyshev_weight_zero_point():
    assert density.chebyshev_weight([ZERO_EIGENVALUE, ZERO_EIGENVALUE], 2) == 0.0


def test_chebyshev_weight_three_members():
    w = density.chebyshev_weight([BOUNDARY, BOUNDARY, BOUNDARY], 3)
    assert w == 53.0 ** 2


def test_chebyshev_weight_nonnegative_random():
    a2, _, a4 = satake.sample_coeff_triples(2000, "sato-tate", 4)
    b2, b3, b4 = satake.sample_coeff_triples(2000, "uniform-angle", 5)
    tri_a = [CoeffTriple(float(x), 0.0, float(z)) for x, z in zip(a2, a4)]
    tri_b = [CoeffTriple(float(x), 0.0, float(z)) for x, z in zip(b2, b4)]
    for ta, tb in zip(tri_a[:200], tri_b[:200]):
        assert density.chebyshev_weight([ta, tb], 2) >= 0.0


def test_chebyshev_weight_length_mismatch():
    with pytest.raises(InvalidInputError):
        density.chebyshev_weight([BOUNDARY], 2)
    with pytest.raises(InvalidInputError):
        density.chebyshev_weight([BOUNDARY], 1)


def test_expansion_residual_examples():
    assert density.expansion_residual((THIRD_PI, THIRD_PI)) < 1e-12
    assert density.expansion_residual((BOUNDARY, BOUNDARY)) == 0.0


def test_expansion_residual_rejects_inconsistent_triple():
    with pytest.raises(InvalidInputError):
        density.expansion_residual((CoeffTriple(1.0, 1.0, 1.0), BOUNDARY))


def test_expansion_residual_bulk_sweep():
    a2, a3, a4 = satake.sample_coeff_triples(50000, "sato-tate", 12)
    b2, _, b4 = satake.sample_coeff_triples(50000, "non-tempered", 13)
    u_sq = (1 + 3 * a2 + 3 * b2 + 5 * a4) ** 2
    u_exp = (-11 + 15 * a2 + 15 * b2 + 19 * a4 + 9 * b4 + 18 * a2 * b2
             + 30 * a4 * b2 + 30 * a3 + 25 * a4 ** 2)
    assert float(np.max(np.abs(u_sq - u_exp))) < 1e-9


def test_density_lower_bound_values():
    assert density.density_lower_bound(1, "paper") == Fraction(34, 35)
    assert density.density_lower_bound(2, "paper") == Fraction(43, 44)
    assert density.density_lower_bound(2, "remark") == Fraction(118, 119)


def test_density_lower_bound_monotone_to_one():
    vals = [density.density_lower_bound(m) for m in range(1, 60)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert 1 - vals[-1] == Fraction(1, 26 + 9 * 59)


def test_density_lower_bound_rejects_bad_args():
    with pytest.raises(InvalidInputError):
        density.density_lower_bound(0)
    with pytest.raises(InvalidInputError):
        density.density_lower_bound(2, "bogus")


def test_pigeonhole_display_value():
    assert density.pigeonhole_intersection(
        Fraction(34, 35), Fraction(34, 35)) == Fraction(33, 35)


def test_pigeonhole_identity_and_clamp():
    assert density.pigeonhole_intersection(Fraction(1), Fraction(3, 7)) == Fraction(3, 7)
    assert density.pigeonhole_intersection(Fraction(1, 2), Fraction(1, 3)) == 0


def test_pigeonhole_rejects_out_of_range():
    with pytest.raises(InvalidInputError):
        density.pigeonhole_intersection(Fraction(3, 2), Fraction(1, 2))


def _family_from_eigenvalues(streams, levels=(1, 1)):
    members = []
    for lab, (lvl, coeffs) in enumerate(zip(levels, streams)):
        members.append(FormMeta(level=lvl, spectral_parameter=1.0 + lab,
                                coefficients=coeffs, label=f"m{lab}"))
    return FormFamily(members)


def _tempered_stream(ps, seed):
    rng = np.random.default_rng(seed)
    thetas = satake.sato_tate_angles(rng, len(ps))
    return {int(p): 2.0 * math.cos(t) for p, t in zip(ps, thetas)}


def test_exceptional_scan_all_tempered():
    ps = sieve.primes_upto(10 ** 4)
    fam = _family_from_eigenvalues(
        [_tempered_stream(ps, 1), _tempered_stream(ps, 2)])
    rep = density.exceptional_scan(fam, 10 ** 4)
    assert rep.exceptional_count == 0
    assert rep.implied_upper == 0.0
    assert rep.pi_X == len(ps)


def test_exceptional_scan_constructed_pair():
    ps = sieve.primes_upto(10 ** 4)
    s1 = _tempered_stream(ps, 3)
    s2 = _tempered_stream(ps, 4)
    for p in (11, 101):
        s1[p] = p ** 0.1 + p ** -0.1
        s2[p] = -(p ** 0.09 + p ** -0.09)
    fam = _family_from_eigenvalues([s1, s2])
    rep = density.exceptional_scan(fam, 10 ** 4)
    assert rep.exceptional_primes == [11, 101]
    assert rep.exceptional_count == 2
    # the scan itself verifies U > 44^2 at each; recompute independently
    for p in (11, 101):
        t1 = satake.sym_coeffs(satake.SatakeLocal.from_eigenvalue(p, s1[p]))
        t2 = satake.sym_coeffs(satake.SatakeLocal.from_eigenvalue(p, s2[p]))
        assert density.chebyshev_weight([t1, t2], 2) > 1936.0


def test_exceptional_scan_respects_levels():
    ps = sieve.primes_upto(1000)
    s1 = _tempered_stream(ps, 5)
    s2 = _tempered_stream(ps, 6)
    fam = _family_from_eigenvalues([s1, s2], levels=(6, 35))
    rep = density.exceptional_scan(fam, 1000)
    excluded = {2, 3, 5, 7}
    assert rep.pi_X == len([p for p in ps if int(p) not in excluded])


def test_exceptional_scan_mean_matches_quadrature_oracle():
    # E[U] under two independent tempered draws, by numerical integration
    st_density = lambda t: (2 / math.pi) * math.sin(t) ** 2
    x2 = lambda t: 4 * math.cos(t) ** 2 - 1
    x4 = lambda t: 16 * math.cos(t) ** 4 - 12 * math.cos(t) ** 2 + 1
    m = {}
    for name, f in (("a", x2), ("a_sq", lambda t: x2(t) ** 2),
                    ("a4", x4), ("a4_sq", lambda t: x4(t) ** 2),
                    ("a_a4", lambda t: x2(t) * x4(t))):
        m[name], _ = integrate.quad(lambda t: f(t) * st_density(t), 0, math.pi)
    mean_u = (1 + 9 * m["a_sq"] + 9 * m["a_sq"] + 25 * m["a4_sq"]
              + 6 * m["a"] + 6 * m["a"] + 10 * m["a4"] + 18 * m["a"] * m["a"]
              + 30 * m["a_a4"] + 30 * m["a"] * m["a4"])
    assert mean_u == pytest.approx(44.0, abs=1e-9)

    ps = sieve.primes_upto(10 ** 5)
    fam = _family_from_eigenvalues(
        [_tempered_stream(ps, 7), _tempered_stream(ps, 8)])
    rep = density.exceptional_scan(fam, 10 ** 5)
    lams1 = np.array([fam.members[0].coefficients[int(p)] for p in ps])
    a2, _, a4 = density._triples_from_eigenvalues(ps, lams1)
    lams2 = np.array([fam.members[1].coefficients[int(p)] for p in ps])
    b2, _, _ = density._triples_from_eigenvalues(ps, lams2)
    u_vals = (1 + 3 * a2 + 3 * b2 + 5 * a4) ** 2
    tol = 4 * float(np.std(u_vals)) / math.sqrt(len(ps))
    assert abs(rep.running_mean_U - mean_u) < tol


def test_exceptional_scan_reports_gaps():
    ps = sieve.primes_upto(1000)
    s1 = _tempered_stream(ps, 9)
    del s1[997]
    fam = _family_from_eigenvalues([s1, _tempered_stream(ps, 10)])
    with pytest.raises(DataGapError) as exc:
        density.exceptional_scan(fam, 1000)
    assert ("m0", 997) in exc.value.gaps


def test_exceptional_scan_threaded_deterministic():
    ps = sieve.primes_upto(10 ** 4)
    fam = _family_from_eigenvalues(
        [_tempered_stream(ps, 11), _tempered_stream(ps, 12)])
    a = density.exceptional_scan(fam, 10 ** 4, threads=1)
    b = density.exceptional_scan(fam, 10 ** 4, threads=4)
    assert a.running_mean_U == b.running_mean_U
    assert a.exceptional_primes == b.exceptional_primes


def test_density_report_json_schema():
    rep = density.DensityReport(X=10, pi_X=4, exceptional_count=0,
                                running_mean_U=1.0, implied_upper=0.0,
                                theory_bound=1 / 44, assumptions=["x"])
    import json
    doc = json.loads(rep.to_json())
    assert set(doc) == {"X", "pi_X", "exceptional_count", "running_mean_U",
                        "implied_upper", "theory_bound", "assumptions"}


def test_pnt_trend_constant_stream():
    ps = sieve.primes_upto(10 ** 3)
    stream = {int(p): 1.0 for p in ps}
    rows = density.pnt_trend(stream, [10, 100, 1000])
    assert all(r["ratio"] == 1.0 for r in rows)


def test_pnt_trend_adjoint_stream_decreasing():
    ps = sieve.primes_upto(10 ** 5)
    rng = np.random.default_rng(2024)
    thetas = satake.sato_tate_angles(rng, len(ps))
    a_vals = 4 * np.cos(thetas) ** 2 - 1
    stream = {int(p): float(a) for p, a in zip(ps, a_vals)}
    rows = density.pnt_trend(stream, [10 ** 3, 10 ** 4, 10 ** 5])
    ratios = [abs(r["ratio"]) for r in rows]
    assert ratios[2] < ratios[0]
    assert ratios[2] < 0.05


def test_pnt_trend_cube_second_moment():
    ps = sieve.primes_upto(10 ** 5)
    rng = np.random.default_rng(77)
    thetas = satake.sato_tate_angles(rng, len(ps))
    c = np.cos(thetas)
    stream = {int(p): float(v) for p, v in zip(ps, (8 * c ** 3 - 4 * c) ** 2)}
    rows = density.pnt_trend(stream, [10 ** 5])
    assert abs(rows[0]["ratio"] - 1.0) < 0.1


def test_pnt_trend_requires_coverage():
    with pytest.raises(InvalidInputError):
        density.pnt_trend({2: 1.0, 3: 1.0}, [100])


def test_family_assumption_recorded():
    ps = sieve.primes_upto(100)
    fam = _family_from_eigenvalues(
        [_tempered_stream(ps, 1), _tempered_stream(ps, 2)])
    assert any("distinct" in a for a in fam.assumptions())
