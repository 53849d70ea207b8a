"""Regenerate the synthetic fixtures under fixtures/.

Raw scaling points, MPI decompositions and node-pair sweeps are not published, so
these files are generated from the published model parameters. Run from the
repository root: python3 fixtures/synthetic.py
"""

import numpy as np

SEED = 20190601
TIMESTAMP = "2019-06-01T00:00:00Z"

AMDAHL_ROWS = [
    ("dibona-tx2", "alya", "gnu", 0.960, -0.685),
    ("dibona-tx2", "alya", "arm", 0.947, -0.890),
    ("marenostrum4", "alya", "gnu", 0.892, -0.634),
    ("marenostrum4", "alya", "intel", 0.954, -0.674),
    ("dibona-tx2", "tangaroa", "gnu", 0.989, 0.162),
    ("marenostrum4", "tangaroa", "gnu", 0.946, -0.324),
    ("dibona-tx2", "graph500", "gnu", 0.918, -0.554),
    ("dibona-tx2", "graph500", "arm", 0.905, -0.604),
    ("marenostrum4", "graph500", "gnu", 0.968, -1.252),
    ("marenostrum4", "graph500", "intel", 0.970, -0.950),
]

GUSTAFSON_ROWS = [
    ("dibona-tx2", "lbc", "gnu", 0.817, 265.4, 64),
    ("marenostrum4", "lbc", "gnu", 0.839, 277.7, 48),
]

MPI_ROWS = [
    ("dibona-tx2", "graph500", "arm", 1.26, 3.86, 19.59),
    ("marenostrum4", "graph500", "intel", 0.31, 3.29, 26.77),
]


def amdahl(a, b, p):
    return 1.0 / ((1.0 - a) + a / p) + b


def strong_speedups(rng):
    lines = [
        "# Synthetic speedups generated from table \"Summary of a and b parameters for projection of scalability\"",
        "# (Amdahl rows) at p = 1..16 nodes with 1% multiplicative Gaussian noise; see fixtures/synthetic.py.",
        "platform,app,compiler,p,p_unit,speedup",
    ]
    for plat, app, comp, a, b in AMDAHL_ROWS:
        for p in [1, 2, 4, 8, 12, 16]:
            s = amdahl(a, b, p) * (1.0 + 0.01 * rng.standard_normal())
            lines.append(f"{plat},{app},{comp},{p},nodes,{s:.6f}")
    return lines


def weak_runs(rng):
    lines = [
        "# Synthetic LBC weak-scaling runs: per-node MLUP/s from table \"Node-to-node comparison for LBC\",",
        "# scaled by Gustafson speedups with a from table \"Summary of a and b parameters for projection of scalability\",",
        "# 1% multiplicative noise; see fixtures/synthetic.py.",
        "platform,app,compiler,nodes,ranks_per_node,time_s,energy_j,app_metric,timestamp",
    ]
    for plat, app, comp, a, rate1, rpn in GUSTAFSON_ROWS:
        for p in [1, 2, 4, 8, 16]:
            s = ((1.0 - a) + a * p) * (1.0 + 0.01 * rng.standard_normal())
            rate = rate1 * s
            # time of 10 steps on a 512^3-per-node domain (MN4: 512x512x384)
            cells = 512 * 512 * (512 if rpn == 64 else 384) * p
            time = 10 * cells / (rate * 1e6)
            lines.append(f"{plat},{app},{comp},{p},{rpn},{time:.3f},,{rate:.2f} MLUP/s,{TIMESTAMP}")
    return lines


def mpi_decompositions():
    lines = [
        "# Synthetic Graph 500 time decompositions generated from table \"Summary of a, b, and c parameters",
        "# for modeling t_MPI in Graph 500\" (noiseless); see fixtures/synthetic.py.",
        "platform,app,compiler,p,p_unit,t_cal_s,t_com_s,t_lb_s",
    ]
    for plat, app, comp, a, b, c in MPI_ROWS:
        for p in [1, 2, 4, 8, 16, 32]:
            total = 120.0 * p ** -0.7
            lb = (a * p + b) / 100.0 * total
            com = c / 100.0 * total
            cal = total - lb - com
            lines.append(f"{plat},{app},{comp},{p},nodes,{cal:.9f},{com:.9f},{lb:.9f}")
    return lines


def pairwise(rng):
    nodes = [f"node{i:02d}" for i in range(1, 9)]
    weak = ("node03", "node06")
    lines = [
        "# Synthetic 8-node pairwise bandwidth sweep (EDR-class links, +-2% jitter) with one planted",
        "# link at 85% of nominal between node03 and node06; see fixtures/synthetic.py.",
        "node_a,node_b,msg_bytes,bandwidth_gbs",
    ]
    for msg, nominal in [(65536, 9.8), (4194304, 11.9)]:
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                for x, y in [(a, b), (b, a)]:
                    bw = nominal * (1.0 + 0.02 * (2.0 * rng.random() - 1.0))
                    if {x, y} == set(weak):
                        bw = 0.85 * nominal
                    lines.append(f"{x},{y},{msg},{bw:.4f}")
    return lines


def write(path, lines):
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def main():
    rng = np.random.default_rng(SEED)
    write("fixtures/scaling/strong-speedups.csv", strong_speedups(rng))
    write("fixtures/scaling/lbc-weak-runs.csv", weak_runs(rng))
    write("fixtures/scaling/graph500-mpi.csv", mpi_decompositions())
    write("fixtures/network/pairwise-8node.csv", pairwise(rng))


if __name__ == "__main__":
    main()
