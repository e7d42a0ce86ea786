"""
End-to-end remix enhancement
============================

Stems are gain-adjusted and summed, amplified per ear with NAL-R, then
degraded and enhanced back towards the clean amplified remix. The same
steps are available from the command line (``dfremix gen-demo``,
``remix``, ``degrade``, ``enhance``, ``eval``).
"""
import tempfile
from pathlib import Path

from dfremix.cli import DEMO_DEGRADATION
from dfremix.demo import demo_listener, make_demo_stems
from dfremix.pipeline import RemixGains, run_pipeline
from dfremix.scene import RemixScene

stems = make_demo_stems()
scene = RemixScene(
    stems={name: f"{name}.wav" for name in ("drums", "bass", "other", "vocal")},
    listener=demo_listener(),
    gains=RemixGains(vocal=3.0, drums=-2.0),
    degradation=DEMO_DEGRADATION,
    base_dir=Path(tempfile.gettempdir()),
)

for mode, order in [("crm", 1), ("df", 2), ("df", 5)]:
    _, _, report = run_pipeline(scene.with_overrides(mode=mode, order=order), stems=stems)
    print(f"{mode:3s} order {order}: SDR {report.sdr_before_mean:6.2f} -> {report.sdr_after_mean:6.2f} dB")
