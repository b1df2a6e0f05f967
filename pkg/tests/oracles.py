"""Straight-line re-implementations of the closed forms, for cross-checking.

Deliberately written without importing the package: plain floats in
seconds, no dataclasses, no shared helpers.
"""
import math

HOPS = ("t_qc", "t_cd", "t_dd", "t_do", "t_oc", "t_cq")


def p_mem(d, r, mu, lam):
    value = mu * d * r / (lam ** ((d + 1) / 2.0))
    return 1.0 if value > 1.0 else value


def p_ls(k, b, r, d, mu_s, lambda_s, mu_t, lambda_t):
    space_area = (k + b) * d * r + k * d
    value = mu_s * space_area / lambda_s ** ((d + 1) / 2.0) + mu_t * b * d * d / lambda_t ** ((r + 1) / 2.0)
    return 1.0 if value > 1.0 else value


def p_pi8(d, k_avg, b_avg, gamma_mem_s, gamma_ls_s, tau_s, mu_s, lambda_s, mu_t, lambda_t, idle=None):
    if idle is None:
        idle = k_avg
    first = mu_s * (5 * d * d + 3 * d) / lambda_s ** ((d + 1) / 2.0) + mu_t * 2 * d * d / lambda_t ** ((d + 1) / 2.0)
    second = (mu_s * ((k_avg + 1 + b_avg) * d * d + (k_avg + 1) * d) / lambda_s ** ((d + 1) / 2.0)
              + mu_t * b_avg * d * d / lambda_t ** ((d + 1) / 2.0))
    one_cycle = mu_s * d * d / lambda_s ** ((d + 1) / 2.0)
    value = first + second + (idle * gamma_mem_s + gamma_ls_s + tau_s) / tau_s * one_cycle
    return 1.0 if value > 1.0 else value


def tau_d(alpha, beta, n):
    return alpha * math.exp(beta * math.log(n))


def t_com_s(hops_us):
    return sum(hops_us[h] for h in HOPS) * 1e-6


def gamma_mem(alpha, beta, d, hops_us):
    return 6 * d * tau_d(alpha, beta, d * d) + t_com_s(hops_us)


def gamma_ls(alpha, beta, d, hops_us):
    per = tau_d(alpha, beta, 4 * d * d) + tau_d(alpha, beta, 3 * d * d) + tau_d(alpha, beta, d * d)
    io = (2 * hops_us["t_dd"] + hops_us["t_qc"] + hops_us["t_cd"] + hops_us["t_do"]
          + hops_us["t_oc"] + hops_us["t_cq"]) * 1e-6
    return 2 * d * per + io


def required_speed(t_circuit_s, t_count, d, hops_us):
    slack = t_circuit_s / t_count - t_com_s(hops_us)
    if slack <= 0:
        return None
    return slack / (6 * d)


def k_mem(q, d, alpha, beta, t_dd_s, tau_s):
    per_window = 6 * d * tau_d(alpha, beta, 2 * d * d) + t_dd_s
    return max(1, math.ceil(q * per_window / (8 * tau_s)))


def k_ls(q, multiplicity):
    return math.ceil(multiplicity * 2 * q / 3)
