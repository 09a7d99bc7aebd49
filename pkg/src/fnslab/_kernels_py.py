"""Numpy implementation of the fused pointwise nonlinearity.

Mirrors ``_kernels.pyx`` point for point; selected when the compiled module
is unavailable or ``FNSLAB_PURE_PYTHON=1`` is set.
"""

import numpy as np


def nonlinear_terms(rho, theta, u, grad_rho, grad_u, grad_theta, visc, lap_theta,
                    mu_r, dmu_r, dpe_r, kap_t, dkap_t, mu1, kappa0,
                    mass_out, mom_out, heat_out):
    """Evaluate the quadratic-and-higher parts of the mass, momentum and heat
    equations at every sample point.

    All arrays are flattened over the sample grid; ``grad_u[i, j]`` holds
    ``d u_i / d x_j``. Writes ``rho * u`` to ``mass_out``, the momentum
    remainder to ``mom_out`` and the heat remainder to ``heat_out``.
    """
    inv = 1.0 / (1.0 + rho)
    mass_out[...] = rho * u

    strain = grad_u + np.swapaxes(grad_u, 0, 1)
    adv_u = np.einsum("jn,ijn->in", u, grad_u)
    strain_grad_rho = np.einsum("ijn,jn->in", strain, grad_rho)
    mom_out[...] = ((mu_r * inv - mu1) * visc
                    + (theta * inv) * grad_rho
                    - adv_u
                    + (dmu_r * inv) * strain_grad_rho
                    - (dpe_r - 1.0) * grad_rho)

    div_u = np.trace(grad_u)
    heat_out[...] = ((kap_t * inv - kappa0) * lap_theta
                     + (mu_r * inv) * np.einsum("ijn,ijn->n", strain, grad_u)
                     - theta * div_u
                     - np.einsum("jn,jn->n", u, grad_theta)
                     + (dkap_t * inv) * np.einsum("jn,jn->n", grad_theta, grad_theta))
