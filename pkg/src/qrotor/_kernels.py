"""Compiled state-vector kernels for the gate backend.

All loops are serial: amplitude updates are elementwise or pairwise, so the
result never depends on iteration order, and a fixed order keeps runs
bit-reproducible.  Gate parameters are computed from pre-drawn uniforms, one
gate at a time in execution order, so the random stream is consumed
identically no matter how the kernels are scheduled.  Inner loops run over
contiguous blocks so they vectorize.
"""

import numpy as np
from numba import njit

TWO_PI = 2.0 * np.pi
INV_SQRT2 = 1.0 / np.sqrt(2.0)

KIND_A = 0  # one-qubit mixing gate (ideal form: Hadamard)
KIND_B = 1  # two-qubit controlled phase


@njit(cache=True)
def a_gate_axis(amplitude, u_tilt, u_azim):
    """Bloch axis tilted from (1,0,1)/sqrt(2) by angle amplitude*u_tilt.

    The azimuth 2*pi*u_azim turns in the plane spanned by (1,0,-1)/sqrt(2)
    and (0,1,0), the orthonormal complement of the ideal axis.
    """
    tilt = amplitude * u_tilt
    azim = TWO_PI * u_azim
    ct = np.cos(tilt)
    st = np.sin(tilt)
    ca = np.cos(azim)
    sa = np.sin(azim)
    nx = (ct + st * ca) * INV_SQRT2
    ny = st * sa
    nz = (ct - st * ca) * INV_SQRT2
    return nx, ny, nz


@njit(cache=True, fastmath=True)
def apply_1q(amps, target, u00, u01, u10, u11):
    """Combine amplitude pairs across bit `target` with a 2x2 matrix."""
    tk = 1 << target
    for base in range(0, amps.size, tk << 1):
        for i in range(base, base + tk):
            a1 = amps[i]
            a2 = amps[i + tk]
            amps[i] = u00 * a1 + u01 * a2
            amps[i + tk] = u10 * a1 + u11 * a2


@njit(cache=True, fastmath=True)
def apply_cphase(amps, p_lo, p_hi, phase):
    """Multiply by `phase` every amplitude whose bits p_lo and p_hi are set."""
    lo = 1 << p_lo
    hi = 1 << p_hi
    for a in range(hi, amps.size, hi << 1):
        for b in range(a + lo, a + hi, lo << 1):
            for i in range(b, b + lo):
                amps[i] *= phase


@njit(cache=True)
def apply_bit_reversal(amps, rev_lo, rev_hi):
    """Swap amplitude pairs (precomputed index pairs with lo < hi)."""
    for p in range(rev_lo.size):
        i = rev_lo[p]
        j = rev_hi[p]
        amps[i], amps[j] = amps[j], amps[i]


@njit(cache=True)
def execute_plan(amps, kinds, targets, controls, thetas,
                 rev_lo, rev_hi, uniforms, amplitude, inverse):
    """Run the full gate plan in place, one gate at a time.

    Forward runs the plan in order then reverses bit order; inverse reverses
    bit order first and applies conjugated gates in reverse plan order.  Each
    A gate consumes two uniforms (tilt, azimuth), each B gate one; the cursor
    advances in execution order.  `amplitude` bounds the per-gate random
    angles (radians).

    Reference path: `execute_plan_staged` applies the identical operator and
    draw order, fused per qubit stage; this one exists for cross-checking and
    stays within a rounding error of it.
    """
    n_ops = kinds.size
    if inverse:
        apply_bit_reversal(amps, rev_lo, rev_hi)
    cursor = 0
    for s in range(n_ops):
        g = n_ops - 1 - s if inverse else s
        if kinds[g] == KIND_A:
            nx, ny, nz = a_gate_axis(amplitude, uniforms[cursor], uniforms[cursor + 1])
            cursor += 2
            off = complex(nx, -ny)
            apply_1q(amps, targets[g], complex(nz, 0.0), off,
                     np.conj(off), complex(-nz, 0.0))
        else:
            ideal = -thetas[g] if inverse else thetas[g]
            ang = ideal + amplitude * (2.0 * uniforms[cursor] - 1.0)
            cursor += 1
            apply_cphase(amps, controls[g], targets[g],
                         complex(np.cos(ang), np.sin(ang)))
    if not inverse:
        apply_bit_reversal(amps, rev_lo, rev_hi)


@njit(cache=True, fastmath=True)
def _stage_phase_table(tab, j, base_sign, uniforms, cursor, amplitude, inverse):
    """Fill tab[0:2^j] with the accumulated controlled-phase factors of the
    j two-qubit gates controlled by bits 0..j-1, errors included.

    tab[m] = prod over set bits k of m of e^{i(base_sign*pi/2^(j-k) + err_k)}.
    Gate-error draws sit at plan positions: forward emits k = j-1..0, inverse
    visits k = 0..j-1, both starting at `cursor`.
    """
    tab[0] = 1.0 + 0.0j
    size = 1
    for k in range(j):
        if inverse:
            u = uniforms[cursor + k]
        else:
            u = uniforms[cursor + (j - 1 - k)]
        ang = base_sign * (np.pi / (1 << (j - k))) + amplitude * (2.0 * u - 1.0)
        pf = complex(np.cos(ang), np.sin(ang))
        for m in range(size):
            tab[size + m] = tab[m] * pf
        size <<= 1


@njit(cache=True, fastmath=True)
def _stage_butterfly(f, j, n, nz, cr, ci, tab, b_first):
    """One fused transform stage on the float64 view `f` of the amplitudes.

    Mixes amplitude pairs across bit j with the sampled A matrix
    [[nz, c], [conj(c), -nz]] (c = cr + i*ci) and multiplies the bit-j-set
    member by its controlled-phase factor tab[low bits]; `b_first` applies
    the phases before the mix (inverse order) instead of after.
    """
    tk = 1 << j
    for base in range(0, n, tk << 1):
        for r in range(tk):
            i0 = 2 * (base + r)
            i1 = i0 + 2 * tk
            a0r = f[i0]
            a0i = f[i0 + 1]
            a1r = f[i1]
            a1i = f[i1 + 1]
            t = tab[r]
            tr = t.real
            ti = t.imag
            if b_first:
                br = a1r * tr - a1i * ti
                bi = a1r * ti + a1i * tr
                f[i0] = nz * a0r + cr * br - ci * bi
                f[i0 + 1] = nz * a0i + cr * bi + ci * br
                f[i1] = cr * a0r + ci * a0i - nz * br
                f[i1 + 1] = cr * a0i - ci * a0r - nz * bi
            else:
                b0r = nz * a0r + cr * a1r - ci * a1i
                b0i = nz * a0i + cr * a1i + ci * a1r
                b1r = cr * a0r + ci * a0i - nz * a1r
                b1i = cr * a0i - ci * a0r - nz * a1i
                f[i0] = b0r
                f[i0 + 1] = b0i
                f[i1] = b1r * tr - b1i * ti
                f[i1 + 1] = b1r * ti + b1i * tr


@njit(cache=True)
def _reverse_float_view(f, rev_lo, rev_hi):
    for p in range(rev_lo.size):
        i = 2 * rev_lo[p]
        j = 2 * rev_hi[p]
        f[i], f[j] = f[j], f[i]
        f[i + 1], f[j + 1] = f[j + 1], f[i + 1]


@njit(cache=True)
def execute_plan_staged(f, n_q, rev_lo, rev_hi, uniforms, amplitude, inverse):
    """Fused per-qubit execution of the canonical plan on a float64 view.

    Operator and random-draw order are identical to `execute_plan`; the
    controlled phases of each qubit's block are accumulated into one table
    (built by doubling) and applied inside the same pass as the A mix.
    """
    n = 1 << n_q
    tab = np.empty(n >> 1, dtype=np.complex128)
    cursor = 0
    if inverse:
        _reverse_float_view(f, rev_lo, rev_hi)
        for j in range(n_q):
            _stage_phase_table(tab, j, -1.0, uniforms, cursor, amplitude, inverse)
            cursor += j
            nx, ny, nz = a_gate_axis(amplitude, uniforms[cursor], uniforms[cursor + 1])
            cursor += 2
            _stage_butterfly(f, j, n, nz, nx, -ny, tab, True)
    else:
        for j in range(n_q - 1, -1, -1):
            nx, ny, nz = a_gate_axis(amplitude, uniforms[cursor], uniforms[cursor + 1])
            cursor += 2
            _stage_phase_table(tab, j, 1.0, uniforms, cursor, amplitude, inverse)
            cursor += j
            _stage_butterfly(f, j, n, nz, nx, -ny, tab, False)
        _reverse_float_view(f, rev_lo, rev_hi)
