"""Catch24: the 22 canonical catch22 characteristics plus mean and spread.

Each feature is a line-by-line port of the public catch22 C reference,
compiled with numba. The 22 features see the z-scored channel; mean and
standard deviation are taken on the raw channel.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .. import CHANNELS
from ..errors import InputTooShortError
from .base import FeatureVector

CATCH22_NAMES = (
    "DN_HistogramMode_5",
    "DN_HistogramMode_10",
    "SB_BinaryStats_mean_longstretch1",
    "DN_OutlierInclude_p_001_mdrmd",
    "DN_OutlierInclude_n_001_mdrmd",
    "CO_f1ecac",
    "CO_FirstMin_ac",
    "SP_Summaries_welch_rect_area_5_1",
    "SP_Summaries_welch_rect_centroid",
    "FC_LocalSimple_mean3_stderr",
    "CO_trev_1_num",
    "CO_HistogramAMI_even_2_5",
    "IN_AutoMutualInfoStats_40_gaussian_fmmi",
    "MD_hrv_classic_pnn40",
    "SB_BinaryStats_diff_longstretch0",
    "SB_MotifThree_quantile_hh",
    "FC_LocalSimple_mean1_tauresrat",
    "CO_Embed2_Dist_tau_d_expfit_meandiff",
    "SC_FluctAnal_2_dfa_50_1_2_logi_prop_r1",
    "SC_FluctAnal_2_rsrangefit_50_1_logi_prop_r1",
    "SB_TransitionMatrix_3ac_sumdiagcov",
    "PD_PeriodicityWang_th0_01",
)
CATCH24_NAMES = CATCH22_NAMES + ("DN_Mean", "DN_Spread_Std")

MIN_LENGTH = 10


@dataclass(frozen=True)
class Catch24Spec:
    include_mean_std: bool = True
    zscore_input: bool = True

    @property
    def names(self):
        return CATCH24_NAMES if self.include_mean_std else CATCH22_NAMES


# ---------------------------------------------------------------- helpers


@njit(cache=True, error_model="numpy")
def _mean(a):
    s = 0.0
    for v in a:
        s += v
    return s / a.shape[0]


@njit(cache=True, error_model="numpy")
def _stddev(a):
    m = _mean(a)
    s = 0.0
    for v in a:
        s += (v - m) ** 2
    return np.sqrt(s / (a.shape[0] - 1))


@njit(cache=True, error_model="numpy")
def _median(a):
    b = np.sort(a)
    n = b.shape[0]
    if n % 2 == 1:
        return b[n // 2]
    return (b[n // 2] + b[n // 2 - 1]) / 2.0


@njit(cache=True, error_model="numpy")
def _nextpow2(n):
    p = 1
    while p < n:
        p *= 2
    return p


@njit(cache=True, error_model="numpy")
def _cround(x):
    # C round(): half away from zero
    if x >= 0:
        return np.floor(x + 0.5)
    return -np.floor(-x + 0.5)


@njit(cache=True, error_model="numpy")
def _zscore(y):
    m = _mean(y)
    sd = _stddev(y)
    out = np.empty_like(y)
    for i in range(y.shape[0]):
        out[i] = (y[i] - m) / sd
    return out


@njit(cache=True, error_model="numpy")
def _autocorrs(y):
    """Normalized autocorrelation at lags 0..n-1 of the mean-removed series."""
    n = y.shape[0]
    m = _mean(y)
    d = np.empty(n)
    for i in range(n):
        d[i] = y[i] - m
    out = np.empty(n)
    for k in range(n):
        s = 0.0
        for i in range(n - k):
            s += d[i] * d[i + k]
        out[k] = s
    c0 = out[0]
    for k in range(n):
        out[k] /= c0
    return out


@njit(cache=True, error_model="numpy")
def _firstzero(y, maxtau):
    ac = _autocorrs(y)
    n = ac.shape[0]
    idx = 0
    while idx < maxtau and idx < n and ac[idx] > 0:
        idx += 1
    return idx


@njit(cache=True, error_model="numpy")
def _corr(x, y):
    mx = _mean(x)
    my = _mean(y)
    nom = 0.0
    dx = 0.0
    dy = 0.0
    for i in range(x.shape[0]):
        nom += (x[i] - mx) * (y[i] - my)
        dx += (x[i] - mx) * (x[i] - mx)
        dy += (y[i] - my) * (y[i] - my)
    return nom / np.sqrt(dx * dy)


@njit(cache=True, error_model="numpy")
def _linreg(x, y):
    n = x.shape[0]
    sx = 0.0
    sx2 = 0.0
    sxy = 0.0
    sy = 0.0
    for i in range(n):
        sx += x[i]
        sx2 += x[i] * x[i]
        sxy += x[i] * y[i]
        sy += y[i]
    denom = n * sx2 - sx * sx
    if denom == 0:
        return 0.0, 0.0
    return (n * sxy - sx * sy) / denom, (sy * sx2 - sx * sxy) / denom


@njit(cache=True, error_model="numpy")
def _quantile(y, q):
    s = np.sort(y)
    n = s.shape[0]
    lim = 0.5 / n
    if q < lim:
        return s[0]
    if q > 1 - lim:
        return s[n - 1]
    idx = n * q - 0.5
    lo = int(np.floor(idx))
    hi = int(np.ceil(idx))
    if hi == lo:
        return s[lo]
    return s[lo] + (idx - lo) * (s[hi] - s[lo]) / (hi - lo)


@njit(cache=True, error_model="numpy")
def _coarsegrain(y, groups):
    n = y.shape[0]
    th = np.empty(groups + 1)
    step = 1.0 / groups
    q = 0.0
    for i in range(groups + 1):
        th[i] = _quantile(y, q)
        q += step
    th[0] -= 1
    labels = np.zeros(n, dtype=np.int64)
    for i in range(groups):
        for j in range(n):
            if y[j] > th[i] and y[j] <= th[i + 1]:
                labels[j] = i + 1
    return labels


@njit(cache=True, error_model="numpy")
def _f_entropy(a):
    f = 0.0
    for v in a:
        if v > 0:
            f += v * np.log(v)
    return -f


# ---------------------------------------------------------------- features


@njit(cache=True, error_model="numpy")
def histogram_mode(y, n_bins):
    n = y.shape[0]
    lo = y.min()
    hi = y.max()
    step = (hi - lo) / n_bins
    counts = np.zeros(n_bins, dtype=np.int64)
    for i in range(n):
        b = int((y[i] - lo) / step)
        if b < 0:
            b = 0
        if b >= n_bins:
            b = n_bins - 1
        counts[b] += 1
    max_count = 0
    n_max = 1
    out = 0.0
    for i in range(n_bins):
        centre = ((i * step + lo) + ((i + 1) * step + lo)) * 0.5
        if counts[i] > max_count:
            max_count = counts[i]
            n_max = 1
            out = centre
        elif counts[i] == max_count:
            n_max += 1
            out += centre
    return out / n_max


@njit(cache=True, error_model="numpy")
def binary_mean_longstretch1(y):
    n = y.shape[0]
    m = _mean(y)
    longest = 0
    last = 0
    for i in range(n - 1):
        bit = 0 if y[i] - m <= 0 else 1
        if bit == 0 or i == n - 2:
            stretch = i - last
            if stretch > longest:
                longest = stretch
            last = i
    return float(longest)


@njit(cache=True, error_model="numpy")
def binary_diff_longstretch0(y):
    n = y.shape[0]
    longest = 0
    last = 0
    for i in range(n - 1):
        bit = 0 if y[i + 1] - y[i] < 0 else 1
        if bit == 1 or i == n - 2:
            stretch = i - last
            if stretch > longest:
                longest = stretch
            last = i
    return float(longest)


@njit(cache=True, error_model="numpy")
def outlier_include(y, sign):
    n = y.shape[0]
    inc = 0.01
    work = np.empty(n)
    tot = 0
    constant = True
    for i in range(n):
        if y[i] != y[0]:
            constant = False
        work[i] = sign * y[i]
        if work[i] >= 0:
            tot += 1
    if constant:
        return 0.0
    top = work.max()
    if top < inc:
        return 0.0
    n_thresh = int(top / inc) + 1
    counts = np.zeros(n_thresh, dtype=np.int64)
    medians = np.empty(n_thresh)
    idx = np.empty(n)
    for j in range(n_thresh):
        thr = j * inc
        c = 0
        for i in range(n):
            if work[i] >= thr:
                idx[c] = i + 1
                c += 1
        counts[j] = c
        if c > 0:
            # indices are collected in increasing order already
            if c % 2 == 1:
                med = idx[c // 2]
            else:
                med = (idx[c // 2 - 1] + idx[c // 2]) / 2.0
            medians[j] = med / (n / 2.0) - 1
        else:
            medians[j] = np.nan
    mj = 0
    for j in range(n_thresh):
        if (counts[j] - 1) * 100.0 / tot > 2:
            mj = j
    fbi = n_thresh - 1
    for j in range(n_thresh - 1, -1, -1):
        if counts[j] - 1 == 0:
            fbi = j
    trim = mj if mj < fbi else fbi
    return _median(medians[: trim + 1])


@njit(cache=True, error_model="numpy")
def f1ecac(y):
    n = y.shape[0]
    ac = _autocorrs(y)
    thresh = 1.0 / np.exp(1.0)
    for i in range(n - 2):
        if ac[i + 1] < thresh:
            return i + (thresh - ac[i]) / (ac[i + 1] - ac[i])
    return float(n)


@njit(cache=True, error_model="numpy")
def first_min_ac(y):
    n = y.shape[0]
    ac = _autocorrs(y)
    for i in range(1, n - 1):
        if ac[i] < ac[i - 1] and ac[i] < ac[i + 1]:
            return float(i)
    return float(n)


@njit(cache=True, error_model="numpy")
def _welch_rect(y):
    """Spectrum and angular frequencies as in the reference welch_rect summaries."""
    n = y.shape[0]
    nfft = _nextpow2(n)
    m = _mean(y)
    cos_t = np.empty(nfft)
    sin_t = np.empty(nfft)
    for k in range(nfft):
        cos_t[k] = np.cos(2 * np.pi * k / nfft)
        sin_t[k] = np.sin(2 * np.pi * k / nfft)
    n_out = nfft // 2 + 1
    pi_ref = 3.14159265359
    sw = np.empty(n_out)
    w = np.empty(n_out)
    for k in range(n_out):
        re = 0.0
        im = 0.0
        for j in range(n):
            t = (k * j) % nfft
            v = y[j] - m
            re += v * cos_t[t]
            im -= v * sin_t[t]
        p = (re * re + im * im) / n
        if k > 0 and k < n_out - 1:
            p *= 2
        w[k] = 2 * pi_ref * (k / nfft)
        sw[k] = p / (2 * pi_ref)
    return w, sw


@njit(cache=True, error_model="numpy")
def welch_area_5_1(y):
    w, sw = _welch_rect(y)
    n_out = w.shape[0]
    for v in sw:
        if np.isinf(v):
            return 0.0
    dw = w[1] - w[0]
    area = 0.0
    for i in range(n_out // 5):
        area += sw[i]
    return area * dw


@njit(cache=True, error_model="numpy")
def welch_centroid(y):
    w, sw = _welch_rect(y)
    n_out = w.shape[0]
    for v in sw:
        if np.isinf(v):
            return 0.0
    cs = np.empty(n_out)
    acc = 0.0
    for i in range(n_out):
        acc += sw[i]
        cs[i] = acc
    half = cs[n_out - 1] * 0.5
    for i in range(n_out):
        if cs[i] > half:
            return w[i]
    return 0.0


@njit(cache=True, error_model="numpy")
def local_mean3_stderr(y):
    n = y.shape[0] - 3
    res = np.empty(n)
    for i in range(n):
        res[i] = y[i + 3] - (y[i] + y[i + 1] + y[i + 2]) / 3.0
    return _stddev(res)


@njit(cache=True, error_model="numpy")
def local_mean1_tauresrat(y):
    n = y.shape[0] - 1
    res = np.empty(n)
    for i in range(n):
        res[i] = y[i + 1] - y[i]
    return _firstzero(res, n) / _firstzero(y, y.shape[0])


@njit(cache=True, error_model="numpy")
def trev_1_num(y):
    n = y.shape[0]
    s = 0.0
    for i in range(n - 1):
        s += (y[i + 1] - y[i]) ** 3
    return s / (n - 1)


@njit(cache=True, error_model="numpy")
def histogram_ami_even_2_5(y):
    tau = 2
    nb = 5
    n = y.shape[0] - tau
    lo = y.min()
    hi = y.max()
    step = (hi - lo + 0.2) / nb
    edges = np.empty(nb + 1)
    for i in range(nb + 1):
        edges[i] = lo + step * i - 0.1
    joint = np.zeros((nb + 1) * (nb + 1), dtype=np.int64)
    for i in range(n):
        b1 = 0
        b2 = 0
        for j in range(nb + 1):
            if y[i] < edges[j]:
                b1 = j
                break
        for j in range(nb + 1):
            if y[i + tau] < edges[j]:
                b2 = j
                break
        code = (b1 - 1) * (nb + 1) + b2
        for j in range((nb + 1) * (nb + 1)):
            if code <= j + 1:
                joint[j] += 1
                break
    pij = np.zeros((nb, nb))
    total = 0
    for i in range(nb):
        for j in range(nb):
            pij[j, i] = joint[i * (nb + 1) + j]
            total += joint[i * (nb + 1) + j]
    pij /= total
    pi = np.zeros(nb)
    pj = np.zeros(nb)
    for i in range(nb):
        for j in range(nb):
            pi[i] += pij[i, j]
            pj[j] += pij[i, j]
    ami = 0.0
    for i in range(nb):
        for j in range(nb):
            if pij[i, j] > 0:
                ami += pij[i, j] * np.log(pij[i, j] / (pj[j] * pi[i]))
    return ami


@njit(cache=True, error_model="numpy")
def auto_mutual_info_fmmi(y):
    n = y.shape[0]
    tau = 40
    max_tau = (n + 1) // 2
    if tau > max_tau:
        tau = max_tau
    if tau < 3:
        return float(tau)
    ac = _corr(y[: n - 1], y[1:])
    prev = -0.5 * np.log(1.0 - ac * ac)
    ac = _corr(y[: n - 2], y[2:])
    curr = -0.5 * np.log(1.0 - ac * ac)
    for i in range(1, tau - 1):
        lag = i + 2
        ac = _corr(y[: n - lag], y[lag:])
        nxt = -0.5 * np.log(1.0 - ac * ac)
        if curr < prev and curr < nxt:
            return float(i)
        prev = curr
        curr = nxt
    return float(tau)


@njit(cache=True, error_model="numpy")
def hrv_pnn40(y):
    n = y.shape[0]
    c = 0
    for i in range(n - 1):
        if np.abs(y[i + 1] - y[i]) * 1000 > 40:
            c += 1
    return c / (n - 1.0)


@njit(cache=True, error_model="numpy")
def motif_three_quantile_hh(y):
    n = y.shape[0]
    yt = _coarsegrain(y, 3)
    counts = np.zeros((3, 3))
    for i in range(n - 1):
        # the final sample has no successor and is never a motif start
        counts[yt[i] - 1, yt[i + 1] - 1] += 1
    hh = 0.0
    for i in range(3):
        hh += _f_entropy(counts[i] / (n - 1.0))
    return hh


@njit(cache=True, error_model="numpy")
def embed2_dist_expfit_meandiff(y):
    n = y.shape[0]
    tau = _firstzero(y, n)
    if tau > n / 10.0:
        tau = int(np.floor(n / 10.0))
    m = n - tau - 1
    d = np.empty(m)
    for i in range(m):
        d[i] = np.sqrt((y[i + 1] - y[i]) ** 2 + (y[i + tau] - y[i + tau + 1]) ** 2)
    ell = _mean(d)
    sd = _stddev(d)
    if sd < 0.001:
        return 0.0
    lo = d.min()
    hi = d.max()
    n_bins = int(np.ceil((hi - lo) / (3.5 * sd / m ** (1 / 3.0))))
    if n_bins == 0:
        return 0.0
    step = (hi - lo) / n_bins
    counts = np.zeros(n_bins, dtype=np.int64)
    for i in range(m):
        b = int((d[i] - lo) / step)
        if b < 0:
            b = 0
        if b >= n_bins:
            b = n_bins - 1
        counts[b] += 1
    acc = 0.0
    for i in range(n_bins):
        centre = ((i * step + lo) + ((i + 1) * step + lo)) * 0.5
        expf = np.exp(-centre / ell) / ell
        if expf < 0:
            expf = 0.0
        acc += np.abs(counts[i] / m - expf)
    return acc / n_bins


@njit(cache=True, error_model="numpy")
def fluct_anal_prop_r1(y, lag, dfa):
    n = y.shape[0]
    lin_low = np.log(5.0)
    lin_high = np.log(float(n // 2))
    steps = 50
    tau_step = (lin_high - lin_low) / (steps - 1)
    tau = np.empty(steps, dtype=np.int64)
    for i in range(steps):
        tau[i] = int(_cround(np.exp(lin_low + i * tau_step)))
    n_tau = steps
    for i in range(steps - 1):
        while tau[i] == tau[i + 1] and i < n_tau - 1:
            for j in range(i + 1, steps - 1):
                tau[j] = tau[j + 1]
            n_tau -= 1
    if n_tau < 12:
        return 0.0
    size_cs = n // lag
    ycs = np.empty(size_cs)
    ycs[0] = y[0]
    for i in range(size_cs - 1):
        ycs[i + 1] = ycs[i] + y[(i + 1) * lag]
    F = np.empty(n_tau)
    for i in range(n_tau):
        t = tau[i]
        n_buf = size_cs // t
        sx = 0.0
        sx2 = 0.0
        for k in range(t):
            xv = k + 1.0
            sx += xv
            sx2 += xv * xv
        denom = t * sx2 - sx * sx
        fi = 0.0
        for j in range(n_buf):
            off = j * t
            sxy = 0.0
            sy = 0.0
            for k in range(t):
                xv = k + 1.0
                sxy += xv * ycs[off + k]
                sy += ycs[off + k]
            mm = 0.0
            bb = 0.0
            if denom != 0:
                mm = (t * sxy - sx * sy) / denom
                bb = (sy * sx2 - sx * sxy) / denom
            if dfa:
                for k in range(t):
                    r = ycs[off + k] - (mm * (k + 1) + bb)
                    fi += r * r
            else:
                r = ycs[off] - (mm + bb)
                mx = r
                mn = r
                for k in range(1, t):
                    r = ycs[off + k] - (mm * (k + 1) + bb)
                    if r > mx:
                        mx = r
                    if r < mn:
                        mn = r
                fi += (mx - mn) * (mx - mn)
        if dfa:
            F[i] = np.sqrt(fi / (n_buf * t))
        else:
            F[i] = np.sqrt(fi / n_buf)
    logt = np.empty(n_tau)
    logf = np.empty(n_tau)
    for i in range(n_tau):
        logt[i] = np.log(float(tau[i]))
        logf[i] = np.log(F[i])
    min_pts = 6
    n_err = n_tau - 2 * min_pts + 1
    sserr = np.empty(n_err)
    for i in range(min_pts, n_tau - min_pts + 1):
        m1, b1 = _linreg(logt[:i], logf[:i])
        m2, b2 = _linreg(logt[i - 1:], logf[i - 1:])
        s1 = 0.0
        for j in range(i):
            r = logt[j] * m1 + b1 - logf[j]
            s1 += r * r
        s2 = 0.0
        for j in range(i - 1, n_tau):
            r = logt[j] * m2 + b2 - logf[j]
            s2 += r * r
        sserr[i - min_pts] = np.sqrt(s1) + np.sqrt(s2)
    lowest = sserr[0]
    for v in sserr:
        if v < lowest:
            lowest = v
    first = 0.0
    for i in range(n_err):
        if sserr[i] == lowest:
            first = i + min_pts - 1.0
            break
    return (first + 1) / n_tau


@njit(cache=True, error_model="numpy")
def transition_matrix_sumdiagcov(y):
    n = y.shape[0]
    constant = True
    for v in y:
        if v != y[0]:
            constant = False
            break
    if constant:
        return np.nan
    tau = _firstzero(y, n)
    n_down = (n - 1) // tau + 1
    down = np.empty(n_down)
    for i in range(n_down):
        down[i] = y[i * tau]
    cg = _coarsegrain(down, 3)
    T = np.zeros((3, 3))
    for j in range(n_down - 1):
        T[cg[j] - 1, cg[j + 1] - 1] += 1
    T /= n_down - 1
    total = 0.0
    for c in range(3):
        m = (T[0, c] + T[1, c] + T[2, c]) / 3.0
        v = 0.0
        for r in range(3):
            v += (T[r, c] - m) * (T[r, c] - m)
        total += v / 2.0
    return total


@njit(cache=True, error_model="numpy")
def _spline_residual(y):
    """y minus its least-squares cubic spline with breaks at 0, n//2 - 1, n - 1."""
    n = y.shape[0]
    span = n - 1.0
    knot = (n // 2 - 1) / span
    A = np.empty((n, 5))
    for i in range(n):
        t = i / span
        A[i, 0] = 1.0
        A[i, 1] = t
        A[i, 2] = t * t
        A[i, 3] = t * t * t
        u = t - knot
        A[i, 4] = u * u * u if u > 0 else 0.0
    coef = np.linalg.lstsq(A, y.copy())[0]
    fit = A @ coef
    return y - fit


@njit(cache=True, error_model="numpy")
def periodicity_wang(y):
    n = y.shape[0]
    th = 0.01
    ysub = _spline_residual(y)
    acmax = int(np.ceil(n / 3.0))
    acf = np.empty(acmax)
    for tau in range(1, acmax + 1):
        s = 0.0
        for i in range(n - tau):
            s += ysub[i] * ysub[i + tau]
        acf[tau - 1] = s / (n - tau)
    troughs = np.empty(acmax, dtype=np.int64)
    n_troughs = 0
    for i in range(1, acmax - 1):
        slope_in = acf[i] - acf[i - 1]
        slope_out = acf[i + 1] - acf[i]
        if slope_in < 0 and slope_out > 0:
            troughs[n_troughs] = i
            n_troughs += 1
        elif slope_in > 0 and slope_out < 0:
            if n_troughs == 0:
                continue
            trough = troughs[n_troughs - 1]
            if acf[i] - acf[trough] < th:
                continue
            if acf[i] < 0:
                continue
            return float(i)
    return 0.0


@njit(cache=True, error_model="numpy")
def catch22_core(z):
    """All 22 features of an already z-scored series, in output order."""
    out = np.empty(22)
    out[0] = histogram_mode(z, 5)
    out[1] = histogram_mode(z, 10)
    out[2] = binary_mean_longstretch1(z)
    out[3] = outlier_include(z, 1.0)
    out[4] = outlier_include(z, -1.0)
    out[5] = f1ecac(z)
    out[6] = first_min_ac(z)
    out[7] = welch_area_5_1(z)
    out[8] = welch_centroid(z)
    out[9] = local_mean3_stderr(z)
    out[10] = trev_1_num(z)
    out[11] = histogram_ami_even_2_5(z)
    out[12] = auto_mutual_info_fmmi(z)
    out[13] = hrv_pnn40(z)
    out[14] = binary_diff_longstretch0(z)
    out[15] = motif_three_quantile_hh(z)
    out[16] = local_mean1_tauresrat(z)
    out[17] = embed2_dist_expfit_meandiff(z)
    out[18] = fluct_anal_prop_r1(z, 2, True)
    out[19] = fluct_anal_prop_r1(z, 1, False)
    out[20] = transition_matrix_sumdiagcov(z)
    out[21] = periodicity_wang(z)
    return out


@njit(cache=True, error_model="numpy")
def _is_constant(y):
    for v in y:
        if v != y[0]:
            return False
    return True


@njit(cache=True, error_model="numpy")
def _is_degenerate(y):
    # constant or non-finite input leaves the z-scored series undefined
    for v in y:
        if not np.isfinite(v):
            return True
    return _is_constant(y)


@njit(cache=True, error_model="numpy")
def _catch24_row(y, zscore_input, include_mean_std, out):
    if _is_degenerate(y):
        for k in range(22):
            out[k] = 0.0
    else:
        z = _zscore(y) if zscore_input else y.copy()
        vals = catch22_core(z)
        for k in range(22):
            v = vals[k]
            out[k] = v if np.isfinite(v) else 0.0
    if include_mean_std:
        out[22] = _mean(y)
        out[23] = _stddev(y) if y.shape[0] > 1 else 0.0


@njit(cache=True, error_model="numpy")
def _catch24_batch(stack, zscore_input, include_mean_std):
    n, c, length = stack.shape
    width = 24 if include_mean_std else 22
    out = np.empty((n, c * width))
    row = np.empty(width)
    for i in range(n):
        for j in range(c):
            _catch24_row(np.ascontiguousarray(stack[i, j]), zscore_input, include_mean_std, row)
            out[i, j * width:(j + 1) * width] = row
    return out


def _check_length(n):
    if n < MIN_LENGTH:
        raise InputTooShortError(f"catch24 needs at least {MIN_LENGTH} samples, got {n}")


def catch22_reference_values(y) -> np.ndarray:
    """The 22 features exactly as the reference computes them, NaN included.

    The input is z-scored first. A constant or non-finite input reproduces
    the reference's NaN-propagation outcome: 0 for the autocorrelation-timing
    and periodicity features, NaN elsewhere.
    """
    y = np.ascontiguousarray(y, dtype=float)
    _check_length(len(y))
    if _is_degenerate(y):
        out = np.full(22, np.nan)
        for name in ("CO_f1ecac", "CO_FirstMin_ac", "PD_PeriodicityWang_th0_01"):
            out[CATCH22_NAMES.index(name)] = 0.0
        return out
    return catch22_core(_zscore(y))


def catch24_vector(channel, spec: Catch24Spec = Catch24Spec()) -> FeatureVector:
    """Catch24 for one channel; non-finite reference outputs are reported as 0."""
    y = np.ascontiguousarray(channel, dtype=float)
    _check_length(len(y))
    out = np.empty(24)
    _catch24_row(y, spec.zscore_input, spec.include_mean_std, out)
    return FeatureVector(spec.names, out[: len(spec.names)])


def catch24_names(channels: Sequence[str] = CHANNELS, spec: Catch24Spec = Catch24Spec()) -> tuple:
    return tuple(f"{c}__{f}" for c in channels for f in spec.names)


def catch24_matrix(windows, spec: Catch24Spec = Catch24Spec()) -> np.ndarray:
    """Rows of 8 x 24 features, shape (n_windows, 192)."""
    width = len(spec.names)
    if not windows:
        return np.zeros((0, len(CHANNELS) * width))
    stack = np.ascontiguousarray(np.stack([w.channels for w in windows]), dtype=float)
    _check_length(stack.shape[2])
    return _catch24_batch(stack, spec.zscore_input, spec.include_mean_std)


def autocorrelation(channel, lag: int) -> float:
    """Biased autocorrelation estimate at ``lag``; 0 for a constant channel."""
    x = np.asarray(channel, dtype=float)
    n = len(x)
    if not 0 <= lag < n:
        raise ValueError(f"lag must be in [0, {n})")
    d = x - x.mean()
    denom = float(np.dot(d, d))
    if denom == 0:
        return 0.0
    return float(np.dot(d[: n - lag], d[lag:]) / denom)


def pnn40(channel) -> float:
    """Share of successive differences larger than 0.04 standard deviations."""
    y = np.ascontiguousarray(channel, dtype=float)
    if len(y) < 2 or _is_constant(y):
        return 0.0
    return float(hrv_pnn40(_zscore(y)))


def warmup() -> None:
    """Compile every kernel once so later timings exclude JIT cost."""
    rng = np.random.default_rng(0)
    _catch24_batch(rng.normal(size=(1, 2, 75)), True, True)
