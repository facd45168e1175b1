"""NumPy reference implementation of the log-domain Sinkhorn half-steps."""
import numpy as np
from scipy.special import logsumexp


def softmin_rows(cost, g, logb, eps):
    """f_i = -eps * log sum_j exp((g_j - C_ij) / eps + logb_j)."""
    return -eps * logsumexp((g[None, :] - cost) / eps + logb[None, :], axis=1)


def softmin_cols(cost, f, loga, eps):
    """g_j = -eps * log sum_i exp((f_i - C_ij) / eps + loga_i)."""
    return -eps * logsumexp((f[:, None] - cost) / eps + loga[:, None], axis=0)
