"""Pure numpy implementations of the hot kernels.

These are the reference implementations; the compiled module ``_ckernels``
must agree with them to rounding error.
"""
import numpy as np

BACKEND = "python"


def apply_h(t, psi, sq, ladder, jz, g, detuning, cr, omega):
    """Return ``-i H(t) psi`` for the double-rotating-frame Rabi Hamiltonian.

    ``psi`` has shape ``(L, W, M)``: Dicke level, Fock index within the
    window, and ``M`` independent columns (1 for a pure state).  ``sq[j]`` is
    ``sqrt(n1 + j)``, ``ladder[k] = sqrt((k+1)(N-k))`` and ``jz[k] = k - N/2``.
    ``cr`` multiplies the counter-rotating terms.
    """
    L = psi.shape[0]
    e2 = np.exp(2j * omega * t)
    hp = (-detuning * jz)[:, None, None] * psi
    # sqrt(n+1) for rows j = 0..W-2 and sqrt(n) for rows j = 1..W-1 are both sq[1:]
    s = sq[1:, None]
    for k in range(L):
        if k > 0:
            c = g * ladder[k - 1]
            # a J+ : psi[k-1, j+1] sqrt(n+1)
            hp[k, :-1] += c * s * psi[k - 1, 1:]
            # a^dag J+ e^{2iwt} : psi[k-1, j-1] sqrt(n)
            if cr:
                hp[k, 1:] += (cr * c * e2) * s * psi[k - 1, :-1]
        if k < L - 1:
            c = g * ladder[k]
            # a^dag J- : psi[k+1, j-1] sqrt(n)
            hp[k, 1:] += c * s * psi[k + 1, :-1]
            # a J- e^{-2iwt} : psi[k+1, j+1] sqrt(n+1)
            if cr:
                hp[k, :-1] += (cr * c * np.conj(e2)) * s * psi[k + 1, 1:]
    return -1j * hp


def master_rhs(t, rho, sq, g, detuning, cr, omega, rates, out=None):
    """Lindblad right-hand side for one qubit and one cavity mode.

    ``rho`` has shape ``(2 W, 2 W)`` with row index ``a * W + j``.  ``rates``
    is ``(gamma_down, gamma_up, gamma_phi, kappa_down, kappa_up)`` where the
    jump rates already include the thermal factors, e.g.
    ``gamma_down = gamma (n_th + 1)``.  ``out``, if given, receives the result.
    """
    out_buf = out
    W = sq.size
    d = 2 * W
    gd, gu, gphi, kd, ku = rates
    ladder = np.array([1.0])
    jz = np.array([-0.5, 0.5])
    args = (sq, ladder, jz, g, detuning, cr, omega)
    r3 = rho.reshape(2, W, d)
    out = apply_h(t, r3, *args).reshape(d, d)
    # -i [H, rho] = (-i H rho) + (-i H rho^dag)^dag
    rho_dag = rho.conj().T
    out += apply_h(t, rho_dag.reshape(2, W, d), *args).reshape(d, d).conj().T

    r4 = rho.reshape(2, W, 2, W)
    o4 = out.reshape(2, W, 2, W)
    n = sq ** 2
    dn = 0.5 * kd * n + 0.5 * ku * (n + 1.0)
    qubit_decay = np.array([[gu, 0.5 * (gd + gu) + 2.0 * gphi],
                            [0.5 * (gd + gu) + 2.0 * gphi, gd]])
    o4 -= (qubit_decay[:, None, :, None]
           + dn[None, :, None, None] + dn[None, None, None, :]) * r4
    o4[0, :, 0, :] += gd * r4[1, :, 1, :]
    o4[1, :, 1, :] += gu * r4[0, :, 0, :]
    if kd:
        w = sq[1:, None] * sq[None, 1:]
        o4[:, :-1, :, :-1] += kd * w[None, :, None, :] * r4[:, 1:, :, 1:]
    if ku:
        w = sq[1:, None] * sq[None, 1:]
        o4[:, 1:, :, 1:] += ku * w[None, :, None, :] * r4[:, :-1, :, :-1]
    if out_buf is not None:
        out_buf[...] = out
        return out_buf
    return out


def hermitize(rho):
    """Replace ``rho`` by ``(rho + rho^dag) / 2`` in place and return it."""
    # numpy buffers the overlapping transpose
    rho += rho.conj().T
    rho *= 0.5
    return rho
