import json
from fractions import Fraction

import numpy as np
import pytest

from qcap import qcore
from qcap.channels import (
    ChannelSpecError,
    CqEnsemble,
    apply,
    as_fraction,
    complementary,
    erasure_channel,
    identity_channel,
    main_channel,
    padded_erasure,
    parse_channel_spec,
    rocket_channel,
    serialize_channel_spec,
    switch_channel,
    switch_components,
    tensor_channels,
    tensor_power,
    unitary_pair_ensemble,
)


def _assert_cptp(ch):
    gram = np.einsum("kab,kac->bc", ch.kraus.conj(), ch.kraus)
    np.testing.assert_allclose(gram, np.eye(ch.in_dim), atol=1e-9)


def test_as_fraction_forms():
    assert as_fraction("11/24") == Fraction(11, 24)
    assert as_fraction(0.25) == Fraction(1, 4)
    assert as_fraction(Fraction(1, 3)) == Fraction(1, 3)
    with pytest.raises(ChannelSpecError):
        as_fraction("eleven")


def test_erasure_channel_structure():
    ch = erasure_channel(Fraction(1, 4), 3)
    assert ch.in_dim == 3 and ch.out_dim == 4
    assert ch.n_kraus == 4  # one transmit block + three erase flags
    _assert_cptp(ch)
    # p = 0 and p = 1 drop the vanishing Kraus operators entirely
    assert erasure_channel(0, 3).n_kraus == 1
    assert erasure_channel(1, 3).n_kraus == 3
    with pytest.raises(ChannelSpecError):
        erasure_channel(Fraction(3, 2), 3)


def test_erasure_action():
    p = Fraction(1, 3)
    ch = erasure_channel(p, 2)
    out = apply(ch, qcore.basis_state(2, 0).to_density())
    expect = np.diag([2 / 3, 0, 1 / 3]).astype(complex)
    np.testing.assert_allclose(out.matrix, expect, atol=1e-12)


def test_identity_channel_is_identity():
    rng = np.random.default_rng(0)
    rho = qcore.random_density((3,), rng)
    out = apply(identity_channel(3), rho)
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-12)


def test_complementary_is_cptp_and_dual():
    ch = erasure_channel(Fraction(1, 4), 2)
    comp = complementary(ch)
    _assert_cptp(comp)
    assert comp.out_layout.dims == ch.env_layout.dims
    # complementing twice restores the original action
    back = complementary(comp)
    rho = qcore.max_mixed(2)
    np.testing.assert_allclose(apply(back, rho).matrix, apply(ch, rho).matrix, atol=1e-12)


def test_complement_matches_dilation_marginals():
    # both outputs must be the two marginals of one isometric dilation
    rng = np.random.default_rng(1)
    ch = erasure_channel(Fraction(2, 5), 2)
    rho = qcore.random_density((2,), rng)
    v = np.concatenate([k for k in ch.kraus], axis=0)  # stacked isometry E x B
    big = v @ rho.matrix @ v.conj().T
    lay = qcore.SystemLayout((ch.n_kraus, ch.out_dim))
    joint = qcore.DensityOperator(lay, big, check_psd=False)
    np.testing.assert_allclose(
        qcore.partial_trace(joint, [1]).matrix, apply(ch, rho).matrix, atol=1e-10
    )
    np.testing.assert_allclose(
        qcore.partial_trace(joint, [0]).matrix,
        apply(complementary(ch), rho).matrix,
        atol=1e-10,
    )


def test_unitary_pair_ensembles():
    idy = unitary_pair_ensemble(3, "identity")
    assert len(idy) == 1
    pauli = unitary_pair_ensemble(2, "pauli")
    assert len(pauli) == 16  # all (X^a Z^b, X^c Z^d) pairs
    for u, v in pauli:
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(v @ v.conj().T, np.eye(2), atol=1e-12)
    with pytest.raises(ChannelSpecError):
        unitary_pair_ensemble(2, "haar")


def test_rocket_channel_shapes():
    ch = rocket_channel(2)
    assert ch.in_layout.dims == (2, 2)
    assert ch.out_layout.dims == (16, 2)
    assert ch.n_kraus == 32
    _assert_cptp(ch)
    small = rocket_channel(2, "identity")
    assert small.out_layout.dims == (1, 2)
    _assert_cptp(small)


def test_rocket_identity_ensemble_action():
    # single (I, I) pair: dephase then trace the second register
    ch = rocket_channel(2, "identity")
    plus = np.array([1, 1, 1, 1], dtype=complex) / 2
    rho = qcore.PureState(qcore.SystemLayout((2, 2)), plus).to_density()
    out = apply(ch, rho)
    # dephasing kills the off-diagonals linking distinct first-register values
    np.testing.assert_allclose(
        qcore.partial_trace(out, [1]).matrix, np.eye(2) / 2, atol=1e-12
    )


def test_switch_channel_structure():
    a = erasure_channel(Fraction(1, 10), 2)
    b = erasure_channel(Fraction(2, 5), 2)
    sw = switch_channel([a, b])
    assert sw.in_layout.dims == (2, 2)
    assert sw.out_layout.dims == (2, 3)
    assert sw.n_kraus == a.n_kraus + b.n_kraus
    _assert_cptp(sw)
    comps = switch_components(sw)
    assert len(comps) == 2
    np.testing.assert_allclose(comps[0].kraus, a.kraus, atol=1e-12)
    with pytest.raises(ChannelSpecError):
        switch_channel([a])
    with pytest.raises(ChannelSpecError):
        switch_channel([a, erasure_channel(Fraction(1, 2), 3)])


def test_switch_acts_as_selected_component():
    a = erasure_channel(Fraction(1, 10), 2)
    b = erasure_channel(Fraction(2, 5), 2)
    sw = switch_channel([a, b])
    rng = np.random.default_rng(2)
    data = qcore.random_density((2,), rng)
    for c, comp in enumerate((a, b)):
        pinned = qcore.tensor(qcore.basis_state(2, c).to_density(), data)
        out = apply(sw, pinned)
        # the component output sits in block c of the enlarged output space
        block = out.matrix[
            c * comp.out_dim : (c + 1) * comp.out_dim,
            c * comp.out_dim : (c + 1) * comp.out_dim,
        ]
        np.testing.assert_allclose(block, apply(comp, data).matrix, atol=1e-10)
        off = out.matrix.copy()
        off[c * comp.out_dim : (c + 1) * comp.out_dim,
            c * comp.out_dim : (c + 1) * comp.out_dim] = 0
        assert np.max(np.abs(off)) < 1e-12


def test_tensor_channels_compose():
    a = erasure_channel(Fraction(1, 4), 2)
    b = identity_channel(3)
    ab = tensor_channels(a, b)
    assert ab.in_layout.dims == (2, 3)
    assert ab.out_layout.dims == (3, 3)
    _assert_cptp(ab)
    rng = np.random.default_rng(4)
    ra = qcore.random_density((2,), rng)
    rb = qcore.random_density((3,), rng)
    np.testing.assert_allclose(
        apply(ab, qcore.tensor(ra, rb)).matrix,
        qcore.tensor(apply(a, ra), apply(b, rb)).matrix,
        atol=1e-10,
    )
    sq = tensor_power(a, 2)
    assert sq.in_dim == 4 and sq.n_kraus == a.n_kraus**2


def test_padded_erasure_fully_erases_pad():
    ch = padded_erasure(1, Fraction(1, 4), 2)
    assert ch.in_layout.dims == (2, 2)
    assert ch.out_layout.dims == (3, 3)
    _assert_cptp(ch)
    rng = np.random.default_rng(6)
    rho = qcore.random_density((2, 2), rng)
    pad_out = qcore.partial_trace(apply(ch, rho), [1])
    # everything lands on the erasure flag regardless of input
    np.testing.assert_allclose(pad_out.matrix, np.diag([0, 0, 1.0]), atol=1e-10)


def test_main_channel_wiring():
    ch = main_channel(1, Fraction(11, 24), 2)
    assert ch.in_layout.dims == (2, 2, 2)
    assert ch.out_layout.dims == (2, 32)
    _assert_cptp(ch)
    comps = switch_components(ch)
    assert comps[0].spec.kind == "rocket" or comps[0].spec.kind == "tensor"


def test_ensemble_validation():
    rho = qcore.max_mixed(2)
    CqEnsemble(((0.5, rho), (0.5, rho)))
    with pytest.raises(ValueError):
        CqEnsemble(((0.7, rho), (0.7, rho)))
    with pytest.raises(ValueError):
        CqEnsemble(((1.0, rho), (0.0, qcore.max_mixed(3))))


def test_spec_json_roundtrip():
    src = main_channel(1, Fraction(11, 24), 2)
    text = serialize_channel_spec(src)
    again = parse_channel_spec(text)
    np.testing.assert_allclose(again.kraus, src.kraus, atol=1e-12)
    # the schema carries the action exactly; register grouping of the
    # composite input is a local refinement and may flatten to (2, 4)
    assert again.in_dim == src.in_dim
    assert again.out_dim == src.out_dim
    sw = switch_channel(
        [erasure_channel(Fraction(1, 10), 2), erasure_channel(Fraction(2, 5), 2)]
    )
    back = parse_channel_spec(serialize_channel_spec(sw))
    assert back.in_layout.dims == sw.in_layout.dims


def test_kraus_spec_roundtrip():
    ch = erasure_channel(Fraction(1, 3), 2)
    raw = json.dumps(
        {
            "kind": "kraus",
            "matrices": [[[ [float(x.real), float(x.imag)] for x in row] for row in k] for k in ch.kraus],
        }
    )
    again = parse_channel_spec(raw)
    np.testing.assert_allclose(again.kraus, ch.kraus, atol=1e-12)


def test_parse_rejects_garbage():
    with pytest.raises(ChannelSpecError):
        parse_channel_spec("{not json")
    with pytest.raises(ChannelSpecError):
        parse_channel_spec(json.dumps({"kind": "wormhole"}))
    with pytest.raises(ChannelSpecError):
        parse_channel_spec(json.dumps({"kind": "erasure", "p": "1/4"}))
    # non-trace-preserving Kraus set must be rejected at construction
    bad = json.dumps({"kind": "kraus", "matrices": [[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]})
    with pytest.raises(ChannelSpecError):
        parse_channel_spec(bad)
