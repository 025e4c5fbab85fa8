import numpy as np
import pytest

from bitglm import CensoredDataset, DesignSet, DomainError, ObservationDesign, ParameterVector


class TestParameterVector:
    def test_accepts_valid(self):
        pv = ParameterVector([0.5, 2.0], ("unbounded", "positive"))
        assert pv.k == 2
        assert pv.values.flags.writeable is False

    def test_rejects_length_mismatch(self):
        with pytest.raises(DomainError):
            ParameterVector([1.0, 2.0], ("unbounded",))

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(DomainError):
            ParameterVector([bad], ("positive",))

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            ParameterVector([np.nan], ("unbounded",))

    def test_rejects_unknown_constraint(self):
        with pytest.raises(DomainError):
            ParameterVector([1.0], ("somewhere",))

    def test_with_values_revalidates(self):
        pv = ParameterVector([1.0], ("positive",))
        assert pv.with_values([2.0]).values[0] == 2.0
        with pytest.raises(DomainError):
            pv.with_values([-2.0])


class TestObservationDesign:
    def test_shapes(self):
        ds = ObservationDesign([[1.0, 0.0], [0.0, -0.5]], tau=1.5)
        assert (ds.d, ds.k) == (2, 2)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            ObservationDesign([[np.inf]], tau=0.0)
        with pytest.raises(ValueError):
            ObservationDesign([[1.0]], tau=np.nan)

    def test_scalar_design_promoted(self):
        ds = ObservationDesign(2.0, tau=0.0)
        assert ds.V.shape == (1, 1)


class TestCensoredDataset:
    def test_bits_validated(self):
        designs = DesignSet(np.ones((2, 1, 1)), np.zeros(2))
        with pytest.raises(ValueError):
            CensoredDataset([1, 0], designs)
        data = CensoredDataset([1, -1], designs)
        assert data.n == 2

    def test_mixed_design_shapes_rejected(self):
        pair = [
            (1, ObservationDesign([[1.0]], 0.0)),
            (-1, ObservationDesign([[1.0, 0.0]], 0.0)),
        ]
        with pytest.raises(ValueError):
            CensoredDataset.from_observations(pair)

    def test_from_observations_roundtrip(self):
        pair = [
            (1, ObservationDesign([[1.0]], 0.5)),
            (-1, ObservationDesign([[2.0]], -0.5)),
        ]
        data = CensoredDataset.from_observations(pair)
        back = list(data.observations())
        assert back[0][0] == 1 and back[1][0] == -1
        assert back[1][1].tau == -0.5

    def test_permuted(self):
        designs = DesignSet(np.arange(3, dtype=float).reshape(3, 1, 1), np.arange(3.0))
        data = CensoredDataset([1, -1, 1], designs)
        perm = data.permuted([2, 0, 1])
        assert list(perm.bits) == [1, 1, -1]
        assert list(perm.designs.taus) == [2.0, 0.0, 1.0]

    def test_length_mismatch(self):
        designs = DesignSet(np.ones((2, 1, 1)), np.zeros(2))
        with pytest.raises(ValueError):
            CensoredDataset([1], designs)

    def test_aux_all_or_none(self):
        pair = [
            (1, ObservationDesign([[1.0]], 0.0, aux=1.0)),
            (1, ObservationDesign([[1.0]], 0.0)),
        ]
        with pytest.raises(ValueError):
            CensoredDataset.from_observations(pair)

    def test_immutability(self):
        designs = DesignSet(np.ones((1, 1, 1)), np.zeros(1))
        data = CensoredDataset([1], designs)
        with pytest.raises(ValueError):
            data.bits[0] = -1
        with pytest.raises(ValueError):
            data.designs.V[0, 0, 0] = 5.0
