"""
NAL-R prescription and its FIR realisation
==========================================

Insertion gains for a sloping audiogram, and the response of the 221-tap
linear-phase filter that implements them.
"""
import matplotlib.pyplot as plt
import numpy as np

from dfremix import Audiogram, design_fir, nalr_gains
from dfremix.nalr import AUDIOGRAM_FREQUENCIES

audiogram = Audiogram((20, 25, 30, 40, 50, 55, 60))
gains = nalr_gains(audiogram)
for f, g in zip(AUDIOGRAM_FREQUENCIES, gains):
    print(f"{f:5d} Hz: {g:6.2f} dB")

filt = design_fir(gains)
freqs = np.geomspace(50, 20000, 500)
plt.semilogx(freqs, filt.response_db(freqs), label="221-tap FIR")
plt.semilogx(AUDIOGRAM_FREQUENCIES, gains, "o", label="prescription")
plt.xlabel("frequency (Hz)")
plt.ylabel("gain (dB)")
plt.legend()
plt.savefig("nalr_response.png")
