"""Quick end-to-end check of the Python bindings."""
import json
import math

import distcomp_py as dc


def h(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def main():
    p = dc.Distribution.uniform(2)
    w = dc.Channel.bsc(0.25)
    mi = dc.mutual_information(p, w)
    assert abs(mi - (1 - h(0.25))) < 1e-12
    assert abs(dc.entropy(dc.push_forward(p, w)) - mi - dc.conditional_entropy(p, w)) < 1e-12

    cheb, chern, exact = dc.typical_bounds(dc.Distribution([0.5, 0.5]), 16, 2.0)
    assert exact >= max(cheb, chern)

    code = dc.SimCode(p, w, n=4)
    acc = code.accounting()
    assert acc["rate"] >= mi
    strong = code.strong_fidelity()
    assert strong["lambda"] <= 0.15
    fid = code.fidelity()
    assert fid["local_err"] <= fid["global_err"] + 1e-12
    t = code.run([0, 1, 1, 0], seed=1, index=0)
    assert len(t["y_word"]) == 4
    d = code.derandomize()
    assert d["exact"] and d["letterwise_max_err"] <= 0.3

    z = dc.zero_error(p, dc.Channel([[0.75, 0.25], [0.25, 0.75]]), restarts=5)
    assert z["mutual_information"] - 1e-9 <= z["objective"] <= z["source_entropy"] + 1e-9

    rate, dist, _ = dc.rd_function(dc.Distribution([0.5, 0.5]), 0.1)
    assert abs(rate - (1 - h(0.1))) < 1e-4 and dist <= 0.1 + 1e-9

    plan = dc.DilutionPlan(dc.Distribution([0.5, 0.3, 0.15, 0.05]), 0.1)
    assert plan.realized_error() <= plan.error_bound()
    assert len(plan.sample(100, seed=3)) == 100

    summary, measured = dc.run_config(json.dumps({"command": "info", "preset": "bsc:0.25"}))
    assert "fail" not in summary
    print("ok", f"rate={acc['rate']:.4f}", f"lambda={strong['lambda']:.4f}", f"zero_error={z['objective']:.4f}",
          f"measurements={len(measured)}")


if __name__ == "__main__":
    main()
