from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qmcnet.errors import CapacityError, DomainError
from qmcnet.f2core import (
    BitMatrix,
    GeneratingMatrixSet,
    PointSet,
    check_equidistribution,
    count_selections,
    deinterlace,
    digit_vector,
    generate_digital_net,
    interlace,
    interlace_matrices,
    rank,
    sequence_to_net,
    sequence_to_net_matrices,
    verify_order_sigma_t,
)


def fr(ps):
    return ps.exact()


def matrix_sets(max_d=3, max_s=5, max_n=3):
    @st.composite
    def build(draw):
        d = draw(st.integers(1, max_d))
        n = draw(st.integers(1, max_n))
        s = draw(st.integers(n, max_s))
        mats = tuple(
            BitMatrix(s, n, tuple(draw(st.integers(0, (1 << n) - 1)) for _ in range(s))) for _ in range(d)
        )
        return GeneratingMatrixSet(mats)

    return build()


# digit_vector


def test_digit_vector_examples():
    assert digit_vector(0, 3) == (0, 0, 0)
    assert digit_vector(5, 3) == (1, 0, 1)
    assert digit_vector(3, 2) == (1, 1)


def test_digit_vector_out_of_range():
    with pytest.raises(DomainError):
        digit_vector(8, 3)
    with pytest.raises(DomainError):
        digit_vector(-1, 3)


# BitMatrix and rank


def test_bitmatrix_roundtrip_and_rank():
    m = BitMatrix.from_strings(["10", "01", "11"])
    assert m.to_strings() == ["10", "01", "11"]
    assert BitMatrix.from_array(m.to_array()) == m
    assert m.row(3) == 0b11
    assert rank(m.bits) == 2
    with pytest.raises(DomainError):
        m.row(4)


def test_bitmatrix_rejects_bad_entries():
    with pytest.raises(DomainError):
        BitMatrix.from_array([[0, 2]])
    with pytest.raises(DomainError):
        BitMatrix(1, 2, (4,))


def test_matrix_set_shape_checks():
    with pytest.raises(DomainError):
        GeneratingMatrixSet((BitMatrix.identity(2), BitMatrix.identity(3)))
    with pytest.raises(DomainError):
        GeneratingMatrixSet((BitMatrix(1, 2, (1,)),))


# generate_digital_net


def test_identity_gives_van_der_corput():
    ps = generate_digital_net(GeneratingMatrixSet((BitMatrix.identity(2),)))
    assert [p[0] for p in fr(ps)] == [Fraction(0), Fraction(1, 2), Fraction(1, 4), Fraction(3, 4)]


def test_identity_and_anti_diagonal():
    mats = GeneratingMatrixSet((BitMatrix.identity(2), BitMatrix.anti_identity(2)))
    pts = set(fr(generate_digital_net(mats)))
    F = Fraction
    assert pts == {(F(0), F(0)), (F(1, 2), F(1, 4)), (F(1, 4), F(1, 2)), (F(3, 4), F(3, 4))}
    assert check_equidistribution(generate_digital_net(mats), 0)


def test_zero_columns_give_origin():
    ps = generate_digital_net(GeneratingMatrixSet((BitMatrix.identity(0, rows=1),)))
    assert ps.N == 1 and fr(ps) == [(Fraction(0),)]


@given(matrix_sets())
def test_digits_reproduce_matrix_vector_products(mats):
    ps = generate_digital_net(mats)
    for nu in range(1 << mats.n):
        for i, m in enumerate(mats.matrices):
            assert int(ps.num[nu, i]) == m.matvec(nu)
            digits = ps.digits(i)[nu]
            assert tuple(int(x) for x in digits) == tuple(
                bin(r & nu).count("1") % 2 for r in m.bits
            )


@given(matrix_sets(), st.data())
def test_disjoint_ranges_concatenate(mats, data):
    total = 1 << mats.n
    cut = data.draw(st.integers(0, total))
    a = generate_digital_net(mats, 0, cut)
    b = generate_digital_net(mats, cut, total)
    full = generate_digital_net(mats)
    assert np.array_equal(np.vstack([a.num, b.num]), full.num)


def test_precision_cap():
    with pytest.raises(CapacityError):
        generate_digital_net(GeneratingMatrixSet((BitMatrix.identity(2, rows=65),)))


# interlace


def test_interlace_examples():
    ps = PointSet(np.array([[1, 1]], dtype=np.uint64), 1)
    assert fr(interlace(ps, 2)) == [(Fraction(3, 4),)]
    ps = PointSet(np.array([[1, 2]], dtype=np.uint64), 2)  # (1/4, 1/2)
    assert fr(interlace(ps, 2)) == [(Fraction(3, 8),)]
    assert interlace(ps, 1) == ps


def test_interlace_errors():
    ps = PointSet(np.zeros((1, 3), dtype=np.uint64), 4)
    with pytest.raises(DomainError):
        interlace(ps, 2)
    with pytest.raises(CapacityError):
        interlace(PointSet(np.zeros((1, 2), dtype=np.uint64), 40), 2)


@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 8), st.data())
def test_interlace_roundtrip(sigma, d, p, data):
    if sigma * p > 64:
        return
    N = 4
    num = np.array(
        [[data.draw(st.integers(0, (1 << p) - 1)) for _ in range(sigma * d)] for _ in range(N)], dtype=np.uint64
    )
    ps = PointSet(num, p)
    assert np.array_equal(deinterlace(interlace(ps, sigma), sigma).num, ps.num)


@given(matrix_sets(max_d=4, max_s=4), st.sampled_from([1, 2]))
def test_interlaced_matrices_match_interlaced_points(mats, sigma):
    if mats.d % sigma:
        return
    direct = interlace(generate_digital_net(mats), sigma)
    via = generate_digital_net(interlace_matrices(mats, sigma))
    assert np.array_equal(direct.num, via.num)


# sequence_to_net


def test_sequence_to_net_examples():
    seq = PointSet(np.array([[0], [1]], dtype=np.uint64), 1)
    assert fr(sequence_to_net(seq, 1)) == [(0, 0), (Fraction(1, 2), Fraction(1, 2))]
    vdc = generate_digital_net(GeneratingMatrixSet((BitMatrix.identity(2),)))
    assert [p[1] for p in fr(sequence_to_net(vdc, 2))] == [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]
    seq = PointSet(np.array([[3], [0], [0], [0]], dtype=np.uint64), 3)  # 3/8
    assert fr(sequence_to_net(seq, 2))[0][0] == Fraction(1, 4)
    with pytest.raises(DomainError):
        sequence_to_net(seq, 3)


@given(matrix_sets(max_d=2, max_s=4, max_n=4))
def test_sequence_to_net_matrix_form(mats):
    n = mats.n
    square = GeneratingMatrixSet(tuple(m.leading(n, n) for m in mats.matrices))
    direct = sequence_to_net(generate_digital_net(square), n)
    via = generate_digital_net(sequence_to_net_matrices(mats, n))
    assert np.array_equal(direct.num, via.num)


# check_equidistribution


def test_equidistribution_examples():
    ps = PointSet(np.array([[0], [1]], dtype=np.uint64), 2)  # 0, 1/4
    assert not check_equidistribution(ps, 0)
    assert check_equidistribution(ps, 1)


def naive_equidistributed(ps, t):
    pts = fr(ps)
    n = ps.N.bit_length() - 1
    k = n - t
    for levels in product(range(k + 1), repeat=ps.dim):
        if sum(levels) != k:
            continue
        for box in product(*(range(1 << l) for l in levels)):
            cnt = sum(
                1
                for p in pts
                if all(Fraction(b, 1 << l) <= x < Fraction(b + 1, 1 << l) for x, b, l in zip(p, box, levels))
            )
            if cnt != 1 << t:
                return False
    return True


@given(matrix_sets(max_d=2, max_s=3, max_n=3), st.data())
def test_equidistribution_matches_naive_count(mats, data):
    ps = generate_digital_net(mats)
    t = data.draw(st.integers(0, mats.n))
    assert check_equidistribution(ps, t) == naive_equidistributed(ps, t)


# verify_order_sigma_t


def naive_t(mats, sigma):
    """Minimal t from the definition: all row subsets, weight = sum of sigma largest indices."""
    s, n = mats.s, mats.n
    subsets = []
    for mask in range(1 << s):
        rows = [a for a in range(1, s + 1) if mask >> (a - 1) & 1]
        subsets.append((sum(sorted(rows)[-sigma:]), rows))
    best = sigma * n + 1
    for choice in product(subsets, repeat=mats.d):
        w = sum(c[0] for c in choice)
        if w >= best:
            continue
        vecs = [m.row(a) for m, (_, rows) in zip(mats.matrices, choice) for a in rows]
        if rank(vecs) < len(vecs):
            best = w
    return max(0, sigma * n - best + 1)


def test_identity_t_zero():
    for n in range(1, 6):
        assert verify_order_sigma_t(GeneratingMatrixSet((BitMatrix.identity(n),)), 1) == 0


@given(matrix_sets(max_d=2, max_s=4, max_n=2), st.sampled_from([1, 2]))
def test_t_value_matches_definition(mats, sigma):
    if sigma * mats.n > mats.s:
        return
    t = verify_order_sigma_t(mats, sigma)
    assert 0 <= t <= sigma * mats.n
    assert t == naive_t(mats, sigma)


@given(matrix_sets(max_d=3, max_s=4, max_n=3))
def test_order_one_t_gives_equidistribution(mats):
    t = verify_order_sigma_t(mats, 1)
    assert check_equidistribution(generate_digital_net(mats), t)


@given(matrix_sets(max_d=2, max_s=6, max_n=3))
def test_order_two_t_dominates_order_one(mats):
    if 2 * mats.n > mats.s:
        return
    t2 = verify_order_sigma_t(mats, 2)
    t1 = verify_order_sigma_t(mats, 1)
    # an order-2 (t2, n, d)-net is an order-1 (ceil(t2/2), n, d)-net
    assert t1 <= -(-t2 // 2) <= t2


def test_guard_raises_capacity_error():
    mats = GeneratingMatrixSet(tuple(BitMatrix.identity(8, rows=16) for _ in range(4)))
    assert count_selections(16, 4, 2, 16) > 10
    with pytest.raises(CapacityError):
        verify_order_sigma_t(mats, 2, guard=10)


def test_sigma_needs_enough_rows():
    with pytest.raises(DomainError):
        verify_order_sigma_t(GeneratingMatrixSet((BitMatrix.identity(3),)), 2)
