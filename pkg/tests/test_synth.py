import numpy as np
import pytest

from ratfm.dataset import make_windows, parse_ucr_file, standardize
from ratfm.errors import InvalidSpecError
from ratfm.retrieval import ncc_max
from ratfm.synth import DomainTemplate, SynthSpec, generate_synthetic, write_synthetic

SMALL = dict(domains=2, series_per_domain=3, train_len=400, test_len=300)


class TestGenerate:
    def test_deterministic_for_seed(self):
        a = generate_synthetic(SynthSpec(**SMALL, seed=5))
        b = generate_synthetic(SynthSpec(**SMALL, seed=5))
        for sa, sb in zip(a, b):
            assert sa.id == sb.id
            assert np.array_equal(sa.values, sb.values)
            assert sa.anomaly_spans == sb.anomaly_spans

    def test_different_seed_differs(self):
        a = generate_synthetic(SynthSpec(**SMALL, seed=5))
        b = generate_synthetic(SynthSpec(**SMALL, seed=6))
        assert not np.array_equal(a[0].values, b[0].values)

    def test_shapes_and_invariants(self):
        spec = SynthSpec(**SMALL, seed=1)
        series = generate_synthetic(spec)
        assert len(series) == 6
        for s in series:
            assert len(s.values) == 700
            assert s.train_end == 400
            assert len(s.anomaly_spans) == 1
            (start, end) = s.anomaly_spans[0]
            assert 400 <= start <= end < 700

    def test_noise_free_spike_only_changes_span(self):
        spec = SynthSpec(**SMALL, noise_std=0.0, anomaly_kinds=("spike",), seed=2)
        s = generate_synthetic(spec)[0]
        start, end = s.anomaly_spans[0]
        from ratfm.synth import default_template

        base = default_template(0).evaluate(np.arange(700.0))
        outside = np.ones(700, bool)
        outside[start : end + 1] = False
        assert np.allclose(s.values[outside], base[outside])
        assert not np.allclose(s.values[start : end + 1], base[start : end + 1])

    def test_same_domain_series_are_ncc_similar(self):
        series = generate_synthetic(SynthSpec(**SMALL, seed=3))
        a, b = series[0], series[1]
        assert a.domain == b.domain
        sim = ncc_max(a.train_values[:256], b.train_values[:256])
        assert sim.score > 0.9

    def test_fixed_anomaly_length(self):
        spec = SynthSpec(**SMALL, anomaly_len=(5, 5), seed=4)
        for s in generate_synthetic(spec):
            start, end = s.anomaly_spans[0]
            assert end - start + 1 == 5

    def test_anomaly_kinds_cycle(self):
        spec = SynthSpec(**SMALL, anomaly_kinds=("plateau_shift",), noise_std=0.0, seed=5)
        series = generate_synthetic(spec)
        from ratfm.synth import default_template

        for s in series[:2]:
            start, end = s.anomaly_spans[0]
            base = default_template(0).evaluate(np.arange(700.0))
            shift = s.values[start : end + 1] - base[start : end + 1]
            assert np.allclose(shift, shift[0])
            assert shift[0] > 0

    def test_custom_templates(self):
        tpl = DomainTemplate(periods=(20.0,), amplitudes=(1.0,), phases=(0.0,))
        spec = SynthSpec(**SMALL, templates=(tpl, tpl), noise_std=0.0, seed=6)
        series = generate_synthetic(spec)
        start, _ = series[0].anomaly_spans[0]
        t = np.arange(float(start))
        assert np.allclose(series[0].values[:start], np.sin(2 * np.pi * t / 20.0))


class TestValidation:
    def test_rejects_bad_specs(self):
        with pytest.raises(InvalidSpecError):
            SynthSpec(domains=0).validate()
        with pytest.raises(InvalidSpecError):
            SynthSpec(noise_std=-1.0).validate()
        with pytest.raises(InvalidSpecError):
            SynthSpec(anomaly_len=(5, 2)).validate()
        with pytest.raises(InvalidSpecError):
            SynthSpec(anomaly_kinds=("bogus",)).validate()
        with pytest.raises(InvalidSpecError):
            SynthSpec(**SMALL, templates=(DomainTemplate((10.0,), (1.0,), (0.0,)),)).validate()
        with pytest.raises(InvalidSpecError):
            SynthSpec(domains=1, series_per_domain=1, train_len=100, test_len=40).validate()


class TestWriteSynthetic:
    def test_round_trip_through_parser(self, tmp_path):
        spec = SynthSpec(**SMALL, seed=7)
        paths = write_synthetic(spec, tmp_path / "ds")
        assert len(paths) == 6
        generated = generate_synthetic(spec)
        for path, orig in zip(sorted(paths), generated):
            parsed = parse_ucr_file(path)
            assert parsed.id == orig.id
            assert parsed.train_end == orig.train_end
            assert parsed.anomaly_spans == orig.anomaly_spans
            assert np.array_equal(parsed.values, orig.values)

    def test_parsed_series_usable_downstream(self, tmp_path):
        spec = SynthSpec(**SMALL, seed=8)
        paths = write_synthetic(spec, tmp_path / "ds")
        s, _ = standardize(parse_ucr_file(paths[0]))
        wins = make_windows(s, "train", input_len=64, horizon=16, stride=32)
        assert wins and all(len(w.input) == 64 for w in wins)
