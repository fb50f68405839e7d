"""Regenerate the checked-in desk-scale mixture fixture.

The fixture is committed and never rebuilt at runtime; run this only if the
layout changes, then commit the result.
"""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from noisecoder.score_models import make_desk_mixture  # noqa: E402


def main():
    out = os.path.join(
        os.path.dirname(__file__), "..", "src", "noisecoder", "fixtures",
        "gmm_small.nzt",
    )
    os.makedirs(os.path.dirname(out), exist_ok=True)
    model = make_desk_mixture()
    model.to_fixture(out)
    print(f"wrote {os.path.normpath(out)}: K={len(model.weights)} shape={model.shape}")


if __name__ == "__main__":
    main()
