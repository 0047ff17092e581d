"""Index layout of the packed arrays shared by both step-kernel backends."""

# coefficient rows, shape (N_COEF, K)
C_DECAY, C_GAIN, C_SGAIN, C_IDECAY, C_IGAIN, C_ISGAIN, C_OUTW, C_MEAS, C_RATES, C_MU = range(10)
N_COEF = 10

# scalar parameters
(P_DX, P_DT, P_A, P_B, P_P, P_G0, P_EKDT, P_FLUX_EXTRA, P_SOURCE, P_DIRICHLET) = range(10)
N_PRM = 10

# mutable scalar state
S_Q, S_S, S_INT_UT2, S_INT_U2, S_H, S_INT_DISS, S_VB_PREV = range(7)
N_SCAL = 7

# per-level record written by the kernel
(
    Q_UT2, Q_UX2, Q_U2, Q_UP, Q_UUT, Q_GCIRC, Q_PHI_EN, Q_PHI_DISS, Q_PSI2, Q_L8,
    Q_PHIMU, Q_UL, Q_O, Q_INT_UT2, Q_INT_U2, Q_H, Q_INT_DISS, Q_MEMS, Q_UX2_NEXT, Q_FINITE,
) = range(20)
N_REC = 20

RECORD_FIELDS = (
    "ut2", "ux2", "u2", "up", "uut", "gcirc", "phi_en", "phi_diss", "psi2", "l8_lhs",
    "phimu", "uL", "O", "int_ut2", "int_u2", "H", "int_diss", "mem_S", "ux2_next", "finite",
)
