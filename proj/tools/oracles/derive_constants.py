#!/usr/bin/env python3
"""Independent cross-checks for the numeric constants frozen into the
C++ test suite. Run manually; paste the printed values into the tests.

Uses scipy/numpy only, so the values do not depend on any code in this
repository.
"""
import numpy as np
import scipy.linalg as sla
import scipy.signal as ssig

np.set_printoptions(precision=15)


def hinf_norm_bruteforce(sys, lo=1e-4, hi=1e5, n=2_000_001):
    """Dense log sweep of the largest singular value."""
    w = np.logspace(np.log10(lo), np.log10(hi), n)
    _, H = ssig.freqresp(sys, w)
    if H.ndim == 1:
        mags = np.abs(H)
    else:
        mags = np.array([np.linalg.svd(H[..., k], compute_uv=False)[0]
                         for k in range(H.shape[-1])])
    i = int(np.argmax(mags))
    return mags[i], w[i]


def main():
    print("== second-order resonance peak: 10/(s^2 + 0.2 s + 1) ==")
    zeta, wn, k = 0.1, 1.0, 10.0
    peak_formula = k / (2 * zeta * np.sqrt(1 - zeta**2))
    wr = wn * np.sqrt(1 - 2 * zeta**2)
    sys = ssig.lti([k], [1, 2 * zeta * wn, wn**2])
    peak_swept, w_swept = hinf_norm_bruteforce(sys, 0.5, 2.0)
    print(f"  formula peak = {peak_formula:.10f} at w = {wr:.10f}")
    print(f"  swept   peak = {peak_swept:.10f} at w = {w_swept:.10f}")

    print("== scalar CARE: A=1,B=1,Q=1,R=1 and A=0 ==")
    for a in (1.0, 0.0):
        p = sla.solve_continuous_are(np.array([[a]]), np.array([[1.0]]),
                                     np.array([[1.0]]), np.array([[1.0]]))
        print(f"  A={a}: P = {p[0, 0]:.12f}")
    print(f"  1+sqrt(2)    = {1 + np.sqrt(2):.12f}")

    print("== margin conversion at mu_max = 1.1226 ==")
    mu = 1.1226
    sm = 1.0 / mu
    gm_low = 20 * np.log10(1.0 / (1.0 + sm))
    gm_high = 20 * np.log10(1.0 / (1.0 - sm))
    pm = np.degrees(2 * np.arcsin(sm / 2))
    print(f"  SM      = {sm:.10f}")
    print(f"  GM low  = {gm_low:.10f} dB")
    print(f"  GM high = {gm_high:.10f} dB")
    print(f"  PM      = {pm:.10f} deg")
    print("  cross-check mu_max = 2:")
    sm2 = 0.5
    print(f"    GM = ({20*np.log10(1/(1+sm2)):.6f}, "
          f"{20*np.log10(1/(1-sm2)):.6f}) dB, "
          f"PM = {np.degrees(2*np.arcsin(sm2/2)):.6f} deg")

    print("== step-response metrics ==")
    print(f"  90% rise of 1/(s+1): ln(10) = {np.log(10):.10f}")
    zeta = 0.5
    os_ = np.exp(-np.pi * zeta / np.sqrt(1 - zeta**2))
    print(f"  overshoot zeta=0.5: {os_:.10f}  (peak {1 + os_:.10f})")
    t = np.linspace(0, 20, 200001)
    _, y = ssig.step(ssig.lti([1.0], [1.0, 1.0, 1.0]), T=t)  # zeta=0.5, wn=1
    print(f"  simulated peak: {y.max():.10f}")
    _, y1 = ssig.step(ssig.lti([1.0], [1.0, 1.0]), T=t)
    i90 = int(np.argmax(y1 >= 0.9))
    print(f"  simulated t90 of 1/(s+1): ~{t[i90]:.6f}")

    print("== two-mode reduction example: 1/(s+1) + 0.001/(s+100) ==")
    A = np.diag([-1.0, -100.0])
    B = np.array([[1.0], [1.0]])
    C = np.array([[1.0, 0.001]])
    Wc = sla.solve_lyapunov(A, -B @ B.T)
    Wo = sla.solve_lyapunov(A.T, -C.T @ C)
    Lc = sla.cholesky(Wc, lower=True)
    Lo = sla.cholesky(Wo, lower=True)
    sv = np.linalg.svd(Lo.T @ Lc, compute_uv=False)
    print(f"  hankel svs = {sv}")
    print(f"  2 * sigma_2 = {2 * sv[1]:.12e}")
    # True balanced truncation to one state (not the naive mode drop,
    # which violates the bound: its error is 1.0e-5 > 2*sigma_2).
    U, S, Vt = np.linalg.svd(Lo.T @ Lc)
    k = 1
    T = Lc @ Vt.T[:, :k] / np.sqrt(S[:k])
    Ti = (U[:, :k] / np.sqrt(S[:k])).T @ Lo.T
    Ar, Br, Cr = Ti @ A @ T, Ti @ B, C @ T
    Ad = sla.block_diag(A, Ar)
    Bd = np.vstack([B, Br])
    Cd = np.hstack([C, -Cr])
    dsys = ssig.lti(Ad, Bd, Cd, np.zeros((1, 1)))
    err, werr = hinf_norm_bruteforce(dsys, 1e-3, 1e4)
    print(f"  ||G - Gr||inf (swept) = {err:.12e} at w = {werr:.6f}")
    print(f"  bound holds: {err <= 2 * sv[1] * (1 + 1e-9)}")

    print("== first-order weight asymptotes: 2 (s+1)/(s+10) ==")
    wsys = ssig.lti([2.0, 2.0], [1.0, 10.0])
    for w in (1e-6, 1e6):
        _, H = ssig.freqresp(wsys, [w])
        print(f"  |W(j{w:g})| = {np.abs(H[0]):.10f}")

    print("== lead filter ((s+10)/10)(30/(s+30)) ==")
    lead = ssig.lti(np.array([[-30.0]]), np.array([[-20.0]]),
                    np.array([[3.0]]), np.array([[3.0]]))
    # realization check: C(sI-A)^-1 B + D at s=0, inf, sqrt(300)
    for w in (0.0, np.sqrt(300.0), 1e9):
        _, H = ssig.freqresp(lead, [max(w, 1e-12)])
        print(f"  |L(j{w:.4g})| = {np.abs(H[0]):.10f}")
    print(f"  sqrt(3) = {np.sqrt(3):.10f}")


if __name__ == "__main__":
    main()
