"""Deterministic synthetic stems for demos and tests.

Each stem mixes tonal and noise components with note-level envelopes so
that the material is non-stationary (a frame delay then cannot be
absorbed into one complex gain per frequency). Every stem starts and ends
with a short silence.
"""
from __future__ import annotations

import numpy as np
from scipy.signal import lfilter

from .audio import SAMPLE_RATE, AudioBuffer
from .nalr import Audiogram, ListenerProfile
from .pipeline import STEM_NAMES, StemSet

DEMO_DURATION = 5.0
LEAD_SILENCE = 0.1
# keeps the NAL-R amplified demo remix below full scale
STEM_LEVEL = 0.08


def _envelope(n, onsets, decay, sr):
    env = np.zeros(n)
    t = np.arange(n) / sr
    for onset in onsets:
        active = t >= onset
        env[active] += np.exp(-(t[active] - onset) / decay)
    return env


def _notes(n, sr, freqs, note_len, rng, harmonics=4, vibrato=0.0):
    out = np.zeros(n)
    t = np.arange(n) / sr
    step = int(note_len * sr)
    for i, start in enumerate(range(0, n, step)):
        stop = min(start + step, n)
        f0 = freqs[i % len(freqs)]
        seg = t[start:stop] - t[start]
        inst = f0 * (1 + vibrato * np.sin(2 * np.pi * 5.5 * seg))
        phase = 2 * np.pi * np.cumsum(inst) / sr + rng.uniform(0, 2 * np.pi)
        tone = sum(np.sin(h * phase) / h for h in range(1, harmonics + 1))
        attack = np.minimum(seg / 0.01, 1.0)
        release = np.exp(-seg / (0.6 * note_len))
        out[start:stop] = tone * attack * release
    return out


def _stereo(mono, pan, rng, width=0.1):
    decor = mono + width * np.std(mono) * rng.standard_normal(mono.size)
    left = np.sqrt(0.5 * (1 - pan)) * mono
    right = np.sqrt(0.5 * (1 + pan)) * decor
    return np.vstack([left, right])


def _fade(x, sr):
    n = x.shape[-1]
    lead = int(LEAD_SILENCE * sr)
    env = np.ones(n)
    env[:lead] = 0.0
    ramp = int(0.02 * sr)
    env[lead : lead + ramp] = np.linspace(0, 1, ramp)
    env[n - lead - ramp : n - lead] = np.linspace(1, 0, ramp)
    env[n - lead :] = 0.0
    return x * env


def make_demo_stems(duration: float = DEMO_DURATION, seed: int = 0, sample_rate: int = SAMPLE_RATE) -> StemSet:
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    beat = 0.25

    kick_on = np.arange(0, duration, 2 * beat)
    snare_on = np.arange(beat, duration, 2 * beat)
    kick = np.sin(2 * np.pi * (50 * t + 40 * np.exp(-t))) * _envelope(n, kick_on, 0.08, sample_rate)
    snare_noise = lfilter([1, -0.6], [1], rng.standard_normal(n))
    snare = 0.5 * snare_noise * _envelope(n, snare_on, 0.06, sample_rate)
    hats = 0.15 * np.diff(rng.standard_normal(n + 1)) * _envelope(n, np.arange(0, duration, beat / 2), 0.02, sample_rate)
    drums = 0.5 * (kick + snare + hats)

    bass = 0.35 * _notes(n, sample_rate, [55.0, 55.0, 73.4, 65.4, 49.0, 61.7], beat, rng, harmonics=6)

    chords = sum(
        _notes(n, sample_rate, [f * r for f in (220.0, 246.9, 196.0, 174.6)], 4 * beat, rng, harmonics=5)
        for r in (1.0, 1.26, 1.5)
    )
    texture = lfilter([1.0], [1, -0.95], rng.standard_normal(n)) * 0.02
    other = 0.15 * chords + texture * (0.5 + 0.5 * np.sin(2 * np.pi * 0.7 * t))

    melody = _notes(n, sample_rate, [440.0, 493.9, 523.3, 587.3, 523.3, 493.9, 392.0, 440.0], 2 * beat, rng,
                    harmonics=8, vibrato=0.01)
    breath = 0.05 * lfilter([1, 0.5], [1], rng.standard_normal(n))
    vocal = 0.25 * melody + breath * (np.abs(melody) > 0.1)

    pans = {"drums": 0.0, "bass": -0.1, "other": 0.4, "vocal": -0.2}
    sources = {"drums": drums, "bass": bass, "other": other, "vocal": vocal}
    stems = {
        name: AudioBuffer(STEM_LEVEL * _fade(_stereo(sources[name], pans[name], rng), sample_rate), sample_rate)
        for name in STEM_NAMES
    }
    return StemSet(stems)


def demo_listener() -> ListenerProfile:
    """A mild-to-moderate sloping loss, slightly asymmetric."""
    return ListenerProfile(
        left=Audiogram((20, 25, 30, 40, 50, 55, 60)),
        right=Audiogram((15, 20, 30, 45, 55, 60, 65)),
        identifier="demo-sloping",
    )
