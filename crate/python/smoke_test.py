"""Smoke test for the `persuasion` Python extension.

Build first:
    cargo build --release -p persuasion-py --features extension-module
then run:
    python3 python/smoke_test.py
An installed module (e.g. via maturin) is used when present.
"""

import importlib.machinery
import importlib.util
import math
import pathlib
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    try:
        import persuasion  # noqa: F401

        return persuasion
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "libpersuasion_py.so"
        if lib.exists():
            loader = importlib.machinery.ExtensionFileLoader("persuasion", str(lib))
            spec = importlib.util.spec_from_file_location("persuasion", lib, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            sys.modules["persuasion"] = module
            return module
    sys.exit("persuasion extension not found; build it with cargo first")


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    p = load_module()

    assert close(p.asymmetric_bce([[1, 0]], [[0.8, 0.2]], beta=0.75), 0.111572, 1e-6)
    assert p.f1_micro([[1, 0], [0, 1]], [[1, 0], [1, 1]]) == 0.8
    assert p.f1_macro([[0, 0]], [[0, 0]]) == 0.0
    assert close(p.fleiss_kappa([[4, 0], [0, 4], [2, 2]]), 0.5556, 1e-4)

    mk = p.mann_kendall([1.0, 2.0, 3.0, 4.0, 5.0])
    assert mk["s"] == 10 and close(mk["z"], 2.205, 1e-3) and mk["trend"] == "increasing"
    r = p.pearson([1.0, 2.0, 3.0, 4.0], [2.0, 1.0, 4.0, 3.0])
    assert close(r["r"], 0.6, 1e-12) and close(r["p"], 0.40, 2e-2)

    assert dict(p.canonical_bigrams(["tax", "cut", "tax"])) == {("cut", "tax"): 2}
    assert p.normalize("Vote NOW!! https://x.co") == "vote now"
    assert p.tokens("Vote NOW!! https://x.co") == ["vote"]
    assert p.split_sentences("Act now! Dr. Smith agrees.") == ["Act now!", "Dr. Smith agrees."]

    cal = p.calibrate([[0.62], [0.70], [0.58]], [[1], [1], [0]])
    assert math.isclose(cal["recommended"], 0.6)

    texts = ["vote for change today", "support our change now", "the library opens at nine",
             "the park is closed on monday"] * 5
    labels = [[1], [1], [0], [0]] * 5
    clf = p.Classifier.fit(texts, labels, epochs=100)
    losses = clf.losses
    assert all(b < a for a, b in zip(losses, losses[1:]))
    assert clf.predict(["change now", "library on monday"]) == [[1], [0]]
    with tempfile.TemporaryDirectory() as d:
        clf.save(d)
        again = p.Classifier.load(d)
        assert again.predict_proba(["change now"]) == clf.predict_proba(["change now"])

    try:
        p.asymmetric_bce([[1]], [[0.5]], beta=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid beta accepted")

    print("python smoke test passed:", clf)


if __name__ == "__main__":
    main()
