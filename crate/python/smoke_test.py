"""Exercise the Python bindings end to end on a small synthetic cohort."""

import json
import math
import tempfile

import biteweight_py as bw


def main():
    assert abs(bw.improvement_pct(4.83, 3.99) - 17.39) < 0.1
    assert bw.improvement_pct(0.0, 1.0) is None
    assert abs(bw.histogram_entropy([float(i % 16) for i in range(160)], 16) - math.log(16)) < 1e-12
    assert bw.skewness([1.0, 1.0, 1.0]) == 0.0
    assert bw.median_filter([0.0, 9.0, 0.0, 0.0, 0.0], 5)[1] == 0.0

    n = 2000
    x = [1.5 + math.sin(2 * math.pi * 5 * i / 100.0) for i in range(n)]
    y = bw.highpass_filtfilt(x)
    assert abs(sum(y[500:1500]) / 1000) < 1e-3

    sessions = bw.generate_synthetic(4, 7)
    assert len(sessions) == 4
    s = sessions[0].preprocess()
    assert s.fs == 100.0
    assert len(s.channel("az")) == s.n_samples
    f = s.features(s.bite_ids[0])
    assert len(f) == 6 and all(math.isfinite(v) for v in f)
    assert len(s.features(s.bite_ids[0], "mirtchouk")) == 56

    xs = [[float(i)] for i in range(20)]
    ys = [2.0 * i + 1.0 for i in range(20)]
    svr = bw.SvrModel.fit(xs, ys)
    assert abs(svr.predict([10.0]) - 21.0) < 0.5
    forest = bw.ForestModel.fit(xs, ys, 10, 3)
    assert math.isfinite(forest.predict([5.0]))

    try:
        sessions[0].channel("nope")
    except bw.BiteweightError:
        pass
    else:
        raise AssertionError("expected BiteweightError")

    report = json.loads(bw.evaluate([t.preprocess() for t in sessions]))
    assert report["n_bites"] > 0 and report["mae_g"] > 0

    with tempfile.TemporaryDirectory() as out:
        report = json.loads(bw.run_synthetic_evaluation(out, subjects=3, pipeline_name="baseline"))
        assert report["improvement_pct"] is None

    print("smoke test OK")


if __name__ == "__main__":
    main()
