# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fused pointwise nonlinearity (see ``_kernels_py`` for the contract)."""

cimport cython


def nonlinear_terms(const double[::1] rho, const double[::1] theta,
                    const double[:, ::1] u, const double[:, ::1] grad_rho,
                    const double[:, :, ::1] grad_u, const double[:, ::1] grad_theta,
                    const double[:, ::1] visc, const double[::1] lap_theta,
                    const double[::1] mu_r, const double[::1] dmu_r,
                    const double[::1] dpe_r, const double[::1] kap_t,
                    const double[::1] dkap_t, double mu1, double kappa0,
                    double[:, ::1] mass_out, double[:, ::1] mom_out,
                    double[::1] heat_out):
    cdef Py_ssize_t npts = rho.shape[0]
    cdef Py_ssize_t d = u.shape[0]
    cdef Py_ssize_t p, i, j
    cdef double inv, a_visc, a_theta, a_strain, a_pe, s, acc, div_u, diss, adv_t, gt2

    with nogil:
        for p in range(npts):
            inv = 1.0 / (1.0 + rho[p])
            a_visc = mu_r[p] * inv - mu1
            a_theta = theta[p] * inv
            a_strain = dmu_r[p] * inv
            a_pe = dpe_r[p] - 1.0
            div_u = 0.0
            diss = 0.0
            adv_t = 0.0
            gt2 = 0.0
            for i in range(d):
                mass_out[i, p] = rho[p] * u[i, p]
                div_u = div_u + grad_u[i, i, p]
                adv_t = adv_t + u[i, p] * grad_theta[i, p]
                gt2 = gt2 + grad_theta[i, p] * grad_theta[i, p]
                acc = a_visc * visc[i, p] + a_theta * grad_rho[i, p] - a_pe * grad_rho[i, p]
                for j in range(d):
                    s = grad_u[i, j, p] + grad_u[j, i, p]
                    acc = acc - u[j, p] * grad_u[i, j, p] + a_strain * s * grad_rho[j, p]
                    diss = diss + s * grad_u[i, j, p]
                mom_out[i, p] = acc
            heat_out[p] = ((kap_t[p] * inv - kappa0) * lap_theta[p]
                           + mu_r[p] * inv * diss
                           - theta[p] * div_u
                           - adv_t
                           + dkap_t[p] * inv * gt2)
