"""Golden bior1.3 coefficients from PyWavelets, mode='symmetric'.

Input images follow the same closed form the C++ test uses:
    x[i, j] = sin(0.3 i + 0.1) + cos(0.7 j) + 0.01 i j
"""
import numpy as np
import pywt


def image(h, w):
    i, j = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    return np.sin(0.3 * i + 0.1) + np.cos(0.7 * j) + 0.01 * i * j


def dump(name, arr):
    flat = ", ".join(repr(float(v)) for v in np.asarray(arr).ravel())
    print(f"// {name} {np.asarray(arr).shape}")
    print(f"{{{flat}}},")


w = pywt.Wavelet("bior1.3")
print("// filters dec_lo, dec_hi, rec_lo, rec_hi")
for f in (w.dec_lo, w.dec_hi, w.rec_lo, w.rec_hi):
    dump("filter", f)

sig = np.array([1.0, -2.0, 3.5, 0.25, 4.0, -1.0, 2.0])
ca, cd = pywt.dwt(sig, w, mode="symmetric")
dump("dwt1 approx", ca)
dump("dwt1 detail", cd)

x = image(7, 6)
ca, (ch, cv, cdd) = pywt.dwt2(x, w, mode="symmetric")
# pywt cH is high-pass along axis 0 (height); cV along axis 1 (width)
dump("7x6 LL", ca)
dump("7x6 LH (low height, high width) = pywt cV", cv)
dump("7x6 HL (high height, low width) = pywt cH", ch)
dump("7x6 HH", cdd)

for h, ww in ((28, 28), (32, 32)):
    ca, (ch, cv, cdd) = pywt.dwt2(image(h, ww), w, mode="symmetric")
    print(f"// {h}x{ww}: subband shape {ca.shape}, non-HH count {3 * ca.size}")
    print(f"// {h}x{ww}: sum LL {float(ca.sum())!r} sum LH {float(cv.sum())!r} sum HL {float(ch.sum())!r}")
