#!/usr/bin/env python3
"""Generate data/ieee39.json: the New England 39-bus test system with the
classic two-axis machine data, a solved pre-fault power flow, and the study
event (three-phase fault at bus 3 cleared after 5 cycles by tripping line
3-4).

The Rust simulator consumes the frozen power-flow solution; this script is
the only place a power-flow solver exists. Run from the repo root:

    python3 scripts/gen_ieee39.py
"""

import json
import math
import pathlib

import numpy as np

BASE_MVA = 100.0

# branches: (from, to, r, x, b_total, tap); tap 0 means a plain line
BRANCHES = [
    (1, 2, 0.0035, 0.0411, 0.6987, 0),
    (1, 39, 0.0010, 0.0250, 0.7500, 0),
    (2, 3, 0.0013, 0.0151, 0.2572, 0),
    (2, 25, 0.0070, 0.0086, 0.1460, 0),
    (2, 30, 0.0000, 0.0181, 0.0000, 1.025),
    (3, 4, 0.0013, 0.0213, 0.2214, 0),
    (3, 18, 0.0011, 0.0133, 0.2138, 0),
    (4, 5, 0.0008, 0.0128, 0.1342, 0),
    (4, 14, 0.0008, 0.0129, 0.1382, 0),
    (5, 6, 0.0002, 0.0026, 0.0434, 0),
    (5, 8, 0.0008, 0.0112, 0.1476, 0),
    (6, 7, 0.0006, 0.0092, 0.1130, 0),
    (6, 11, 0.0007, 0.0082, 0.1389, 0),
    (6, 31, 0.0000, 0.0250, 0.0000, 1.070),
    (7, 8, 0.0004, 0.0046, 0.0780, 0),
    (8, 9, 0.0023, 0.0363, 0.3804, 0),
    (9, 39, 0.0010, 0.0250, 1.2000, 0),
    (10, 11, 0.0004, 0.0043, 0.0729, 0),
    (10, 13, 0.0004, 0.0043, 0.0729, 0),
    (10, 32, 0.0000, 0.0200, 0.0000, 1.070),
    (12, 11, 0.0016, 0.0435, 0.0000, 1.006),
    (12, 13, 0.0016, 0.0435, 0.0000, 1.006),
    (13, 14, 0.0009, 0.0101, 0.1723, 0),
    (14, 15, 0.0018, 0.0217, 0.3660, 0),
    (15, 16, 0.0009, 0.0094, 0.1710, 0),
    (16, 17, 0.0007, 0.0089, 0.1342, 0),
    (16, 19, 0.0016, 0.0195, 0.3040, 0),
    (16, 21, 0.0008, 0.0135, 0.2548, 0),
    (16, 24, 0.0003, 0.0059, 0.0680, 0),
    (17, 18, 0.0007, 0.0082, 0.1319, 0),
    (17, 27, 0.0013, 0.0173, 0.3216, 0),
    (19, 20, 0.0007, 0.0138, 0.0000, 1.060),
    (19, 33, 0.0007, 0.0142, 0.0000, 1.070),
    (20, 34, 0.0009, 0.0180, 0.0000, 1.009),
    (21, 22, 0.0008, 0.0140, 0.2565, 0),
    (22, 23, 0.0006, 0.0096, 0.1846, 0),
    (22, 35, 0.0000, 0.0143, 0.0000, 1.025),
    (23, 24, 0.0022, 0.0350, 0.3610, 0),
    (23, 36, 0.0005, 0.0272, 0.0000, 1.000),
    (25, 26, 0.0032, 0.0323, 0.5310, 0),
    (25, 37, 0.0006, 0.0232, 0.0000, 1.025),
    (26, 27, 0.0014, 0.0147, 0.2396, 0),
    (26, 28, 0.0043, 0.0474, 0.7802, 0),
    (26, 29, 0.0057, 0.0625, 1.0290, 0),
    (28, 29, 0.0014, 0.0151, 0.2490, 0),
    (29, 38, 0.0008, 0.0156, 0.0000, 1.025),
]

# loads: bus -> (P, Q) in MW / MVAr
LOADS = {
    1: (97.6, 44.2), 3: (322.0, 2.4), 4: (500.0, 184.0), 7: (233.8, 84.0),
    8: (522.0, 176.6), 9: (6.5, -66.6), 12: (8.53, 88.0), 15: (320.0, 153.0),
    16: (329.0, 32.3), 18: (158.0, 30.0), 20: (680.0, 103.0),
    21: (274.0, 115.0), 23: (247.5, 84.6), 24: (308.6, -92.2),
    25: (224.0, 47.2), 26: (139.0, 17.0), 27: (281.0, 75.5),
    28: (206.0, 27.6), 29: (283.5, 26.9), 31: (9.2, 4.6), 39: (1104.0, 250.0),
}

# generators: bus -> (Pg MW, Vset); bus 31 is the slack (Pg free)
GENS = {
    30: (250.0, 1.0499), 31: (None, 0.9820), 32: (650.0, 0.9841),
    33: (632.0, 0.9972), 34: (508.0, 1.0123), 35: (650.0, 1.0494),
    36: (560.0, 1.0636), 37: (540.0, 1.0275), 38: (830.0, 1.0265),
    39: (1000.0, 1.0300),
}
SLACK = 31

# two-axis machine constants (100 MVA base), bus ->
# (x_d, x'_d, x_q, x'_q, T'_d0, T'_q0, H). Reactances and time constants are
# the classic New England set; where the classic table has T'_q0 = 0 (the
# bus-30 unit) a positive 1.0 s is substituted so the d-axis transient
# dynamics stay well posed. Inertia constants are twice the classic values
# (turbine-generator shaft inertia included), placing the fastest swing mode
# near 1.3 Hz.
H_SCALE = 2.0
MACHINES = {
    30: (0.1000, 0.0310, 0.0690, 0.0310, 10.2, 1.00, H_SCALE * 42.0),
    31: (0.2950, 0.0697, 0.2820, 0.1700, 6.56, 1.50, H_SCALE * 30.3),
    32: (0.2495, 0.0531, 0.2370, 0.0876, 5.70, 1.50, H_SCALE * 35.8),
    33: (0.2620, 0.0436, 0.2580, 0.1660, 5.69, 1.50, H_SCALE * 28.6),
    34: (0.6700, 0.1320, 0.6200, 0.1660, 5.40, 0.44, H_SCALE * 26.0),
    35: (0.2540, 0.0500, 0.2410, 0.0814, 7.30, 0.40, H_SCALE * 34.8),
    36: (0.2950, 0.0490, 0.2920, 0.1860, 5.66, 1.50, H_SCALE * 26.4),
    37: (0.2900, 0.0570, 0.2800, 0.0911, 6.70, 0.41, H_SCALE * 24.3),
    38: (0.2106, 0.0570, 0.2050, 0.0587, 4.79, 1.96, H_SCALE * 34.5),
    39: (0.0200, 0.0060, 0.0190, 0.0080, 7.00, 0.70, H_SCALE * 500.0),
}
# uniform damping (p.u. torque per p.u. speed deviation); the classic set
# leaves D unspecified
DAMPING = 4.0

N = 39


def build_ybus():
    y = np.zeros((N, N), dtype=complex)
    for f, t, r, x, b, tap in BRANCHES:
        i, j = f - 1, t - 1
        ys = 1.0 / complex(r, x)
        bc = complex(0.0, b / 2.0)
        a = tap if tap else 1.0
        y[i, i] += (ys + bc) / (a * a)
        y[j, j] += ys + bc
        y[i, j] += -ys / a
        y[j, i] += -ys / a
    return y


def solve_power_flow():
    y = build_ybus()
    v = np.ones(N, dtype=complex)
    for b, (_, vset) in GENS.items():
        v[b - 1] = vset

    # scheduled injections (p.u.)
    p_sched = np.zeros(N)
    q_sched = np.zeros(N)
    for b, (p, q) in LOADS.items():
        p_sched[b - 1] -= p / BASE_MVA
        q_sched[b - 1] -= q / BASE_MVA
    for b, (pg, _) in GENS.items():
        if b != SLACK:
            p_sched[b - 1] += pg / BASE_MVA

    pv = [b - 1 for b in GENS if b != SLACK]
    sl = SLACK - 1
    pq = [i for i in range(N) if i not in pv and i != sl]
    p_idx = pv + pq          # buses with a P equation
    q_idx = pq               # buses with a Q equation

    vm = np.abs(v)
    va = np.angle(v)
    for _ in range(50):
        v = vm * np.exp(1j * va)
        s = v * np.conj(y @ v)
        dp = p_sched[p_idx] - s.real[p_idx]
        dq = q_sched[q_idx] - s.imag[q_idx]
        mis = np.concatenate([dp, dq])
        if np.max(np.abs(mis)) < 1e-12:
            break

        # Jacobian by the standard polar formulation
        ibus = y @ v
        diag_v = np.diag(v)
        diag_i = np.diag(ibus)
        diag_vn = np.diag(v / np.abs(v))
        ds_dva = 1j * diag_v @ np.conj(diag_i - y @ diag_v)
        ds_dvm = diag_v @ np.conj(y @ diag_vn) + np.conj(diag_i) @ diag_vn

        j11 = ds_dva[np.ix_(p_idx, p_idx)].real
        j12 = ds_dvm[np.ix_(p_idx, q_idx)].real
        j21 = ds_dva[np.ix_(q_idx, p_idx)].imag
        j22 = ds_dvm[np.ix_(q_idx, q_idx)].imag
        jac = np.block([[j11, j12], [j21, j22]])
        dx = np.linalg.solve(jac, mis)
        va[p_idx] += dx[: len(p_idx)]
        vm[q_idx] += dx[len(p_idx):]
    else:
        raise RuntimeError("power flow did not converge")

    v = vm * np.exp(1j * va)
    s = v * np.conj(y @ v)
    # generator injections = bus injection + local load
    dispatch = {}
    for b in GENS:
        pl, ql = LOADS.get(b, (0.0, 0.0))
        dispatch[b] = (s.real[b - 1] + pl / BASE_MVA,
                       s.imag[b - 1] + ql / BASE_MVA)
    return v, dispatch, np.max(np.abs(mis))


def main():
    v, dispatch, mis = solve_power_flow()
    print(f"power flow converged, max mismatch {mis:.3e} p.u.")

    machines = []
    for b in sorted(MACHINES):
        x_d, xp_d, x_q, xp_q, tp_d0, tp_q0, h = MACHINES[b]
        machines.append({
            "bus": b, "h": h, "d": DAMPING,
            "x_d": x_d, "x_q": x_q, "xp_d": xp_d, "xp_q": xp_q,
            "tp_d0": tp_d0, "tp_q0": tp_q0, "r_a": 0.0,
            "p_m": 0.0, "e_fd": 0.0,  # solved during initialization
        })

    branches = []
    for f, t, r, x, b, tap in BRANCHES:
        rec = {"from": f, "to": t, "r": r, "x": x, "b": b}
        if tap:
            rec["tap"] = tap
        branches.append(rec)

    scenario = {
        "kind": "multi_machine",
        "name": "ieee39",
        "base_frequency_hz": 60.0,
        "base_mva": BASE_MVA,
        "machines": machines,
        "network": {
            "n_bus": N,
            "branches": branches,
            "loads": [{"bus": b, "p": p / BASE_MVA, "q": q / BASE_MVA}
                      for b, (p, q) in sorted(LOADS.items())],
            "power_flow": [{"bus": i + 1, "vm": float(abs(v[i])),
                            "va_deg": float(math.degrees(np.angle(v[i])))}
                           for i in range(N)],
            "dispatch": [{"bus": b, "p": float(p), "q": float(q)}
                         for b, (p, q) in sorted(dispatch.items())],
        },
        "event": {
            "t_fault": 1.0,
            "t_clear": 1.0 + 5.0 / 60.0,
            "faulted_bus": 3,
            "tripped_branch": [3, 4],
        },
    }

    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "ieee39.json"
    out.write_text(json.dumps(scenario, indent=2) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
