import numpy as np
from hypothesis import strategies as st

from diphonekit.audio import AudioClip
from diphonekit.textgrid import PAU, Alignment, Interval, Tier

RATE = 16000
PHONE_LABELS = st.sampled_from("AA AE AH B D EH G IY K N S T Z".split())


@st.composite
def aligned_pairs(draw, max_words=5):
    """A random two-tier alignment with off-grid boundaries plus matching noise audio."""
    words = draw(st.lists(st.lists(PHONE_LABELS, min_size=1, max_size=4), min_size=1, max_size=max_words))
    dur = st.floats(0.012, 0.2, allow_nan=False, allow_infinity=False)
    t = 0.0
    phones, word_iv = [], []

    def emit(label):
        nonlocal t
        start, t = t, t + draw(dur)
        phones.append(Interval(start, t, label))
        return start

    emit(PAU)
    word_iv.append(Interval(0.0, t, PAU))
    for k, ps in enumerate(words):
        start = t
        for p in ps:
            emit(p)
        word_iv.append(Interval(start, t, f"w{k}"))
        pause = emit(PAU)
        word_iv.append(Interval(pause, t, PAU))
    seed = draw(st.integers(0, 2**32 - 1))
    n = int(round(t * RATE))
    audio = AudioClip(np.random.default_rng(seed).integers(-3000, 3000, n).astype(np.int16), RATE)
    alignment = Alignment("fuzz.wav", t, {"words": Tier("words", tuple(word_iv)), "phones": Tier("phones", tuple(phones))})
    return alignment, audio
