# %% [markdown]
# Designing the pendulum loop by hand: feedback gain, feedforward match,
# and the Lyapunov matrix that scales the adaptation drive.

# %%
import numpy as np

from mrclc import ControllerConfig, is_hurwitz, min_eig_sym, solve_lyapunov
from mrclc.control import closed_loop_matrix, solve_feedforward_gain

Lam = np.array([[0.0, 1.0], [0.0, 0.0]])   # double integrator
A_r = np.array([[0.0, 1.0], [-1.0, -2.0]])  # reference model, poles at -1, -1
k_e = np.array([1.5, 1.3])

# %%
A = closed_loop_matrix(Lam, k_e)
print("closed loop\n", A, "\nHurwitz:", is_hurwitz(A))

# the feedforward gain makes the plant match the reference model exactly
k_r = solve_feedforward_gain(Lam, A_r, 1.0)
print("k_r =", k_r)

# %%
P = solve_lyapunov(A, 10 * np.eye(2))
print("P =\n", P)
print("residual", np.linalg.norm(A.T @ P + P @ A + 10 * np.eye(2)))
print("min eig", min_eig_sym(P))  # should be positive

# %%
# exact answer is [[544/39, 10/3], [10/3, 250/39]]
print(P - np.array([[544 / 39, 10 / 3], [10 / 3, 250 / 39]]))

# %%
# ControllerConfig.design does all of the above in one call
cfg = ControllerConfig.design(Lam, A_r, 1.0, k_e=k_e, Q=10 * np.eye(2),
                              gamma=3.5, k_w=6.0, c_w=5.0, tau_d=5.0, omega=100.0, zeta=0.7)
print(cfg.k_r, cfg.Pb)
