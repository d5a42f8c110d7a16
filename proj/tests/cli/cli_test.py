"""End-to-end checks of the slp command line. Usage: cli_test.py SLP SCHEMA CASE"""

import csv
import json
import os
import subprocess
import sys
import tempfile

import jsonschema

SLP, SCHEMA, CASE = sys.argv[1], sys.argv[2], sys.argv[3]
PRESETS = ["constant", "constant(2)", "example-4.4(0.5)", "example-4.5(1)", "example-4.7", "gaussian-q",
           "half-line-zero"]


def run(*args, out=None):
    cmd = [SLP, *args] + (["--out", out] if out else [])
    return subprocess.run(cmd, capture_output=True, text=True, timeout=300)


def report(out):
    with open(os.path.join(out, "report.json")) as fh:
        rep = json.load(fh)
    with open(SCHEMA) as fh:
        jsonschema.validate(rep, json.load(fh))
    return rep


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def expect(cond, msg):
    if not cond:
        raise AssertionError(msg)


def case_analyze_constant(tmp):
    p = run("analyze", "--preset", "constant", "--window", "-40", "40", out=tmp)
    expect(p.returncode == 0, p.stderr)
    rep = report(tmp)
    expect(rep["verdict"]["outcome"] == "SolvableAllP", rep["verdict"])
    names = [c["name"] for c in rep["certificates"]]
    expect(names == ["q0", "theta", "A", "m_a", "B", "necessary_q_tails", "necessary_local_products"], names)
    b = next(c for c in rep["certificates"] if c["name"] == "B")
    expect(abs(b["value"] - 0.125) < 1e-6, b)
    kinds = sorted(a["kind"] for a in rep["artifacts"])
    expect(kinds == ["primitive", "primitive", "profile"], kinds)
    with open(os.path.join(tmp, "primitive_q.csv")) as fh:
        expect(fh.readline().strip() == "x,int[q;anchor=0]", "primitive header")


def case_malformed_expression(tmp):
    p = run("analyze", "--r", "1", "--q", "1 + cos(x", out=tmp)
    expect(p.returncode == 2, p.returncode)
    expect("column" in p.stderr and "^" in p.stderr, p.stderr)
    rep = report(tmp)
    expect(rep["verdict"] is None and rep["errors"], rep)


def case_config_errors(tmp):
    for args in (["analyze", "--preset", "constant", "--window", "3", "1"],
                 ["analyze", "--preset", "constant", "--doublings", "2"],
                 ["analyze", "--preset", "constant", "--tol", "0.5"],
                 ["analyze", "--preset", "no-such-preset"],
                 ["analyze", "--preset", "constant", "--declare-tails", "up.q=divergent"],
                 ["hardy", "--preset", "constant", "--p", "1"],
                 ["analyze"],
                 ["frobnicate"]):
        p = run(*args)
        expect(p.returncode == 2, (args, p.returncode, p.stderr))


def case_numerical_failure(tmp):
    p = run("fss", "--r", "1", "--q", "0", "--window", "-5", "5", "--grid", "64", out=tmp)
    expect(p.returncode == 3, (p.returncode, p.stderr))
    expect(report(tmp)["errors"], "errors recorded")


def case_analyze_example_4_7(tmp):
    p = run("analyze", "--preset", "example-4.7", out=tmp)
    expect(p.returncode == 0, p.stderr)
    expect(report(tmp)["verdict"]["outcome"] == "SolvableAllP", "verdict")


def case_not_solvable_exit_zero(tmp):
    p = run("analyze", "--preset", "half-line-zero", "--window", "-20", "20", out=tmp)
    expect(p.returncode == 0, p.stderr)
    rep = report(tmp)
    expect(rep["verdict"]["outcome"] == "NotSolvable", rep["verdict"])
    expect(rep["necessary"]["q_tails"]["status"] == "fail", rep["necessary"]["q_tails"])


def case_declared_tails(tmp):
    p = run("analyze", "--preset", "constant", "--window", "-20", "20", "--declare-tails", "right.q=divergent",
            "left.inv_r=divergent", out=tmp)
    expect(p.returncode == 0, p.stderr)
    rep = report(tmp)
    expect(rep["necessary"]["inv_r_left"]["declared"], "declaration recorded")
    expect(rep["meta"]["config"]["declarations"] == ["right.q=divergent", "left.inv_r=divergent"], rep["meta"])


def case_aux_constant(tmp):
    p = run("aux", "--preset", "constant", "--window", "-5", "5", "--grid", "64", out=tmp)
    expect(p.returncode == 0, p.stderr)
    report(tmp)
    want = {"d1": 1, "d2": 1, "phi": 1, "psi": 1, "h": 0.5, "d": 0.25, "hd": 0.125, "d_tilde": 1}
    for r in rows(os.path.join(tmp, "profile.csv")):
        for k, v in want.items():
            expect(abs(float(r[k]) - v) < 1e-8, (r["x"], k, r[k]))


def case_hardy_constant(tmp):
    p = run("hardy", "--preset", "constant", "--p", "2", out=tmp)
    expect(p.returncode == 0, p.stderr)
    h = report(tmp)["module"]["hardy"]
    expect(abs(h["H_p"] - 0.25) < 1e-6, h["H_p"])
    expect(h["two_form_max_rel_diff"] <= 1e-6, h["two_form_max_rel_diff"])


def case_covering_constant(tmp):
    p = run("covering", "--preset", "constant", "--base", "0", out=tmp)
    expect(p.returncode == 0, p.stderr)
    report(tmp)
    segs = rows(os.path.join(tmp, "covering.csv"))
    expect(len(segs) >= 6, len(segs))
    for s in segs:
        n = int(s["n"])
        expect(abs(float(s["hi"]) - float(s["lo"]) - 0.5) < 1e-8, s)
        expect(abs(float(s["x"]) - (2 * abs(n) - 1) / 4 * (1 if n > 0 else -1)) < 1e-8, s)
        expect(abs(float(s["rh_from_base"]) - (abs(n) - 1)) < 1e-8, s)


def case_green_constant(tmp):
    p = run("green", "--preset", "constant", "--f", "exp(-x^2)", out=tmp)
    expect(p.returncode == 0, p.stderr)
    g = report(tmp)["module"]["green"]
    expect(g["ode_residual"] <= 1e-5, g)
    expect(g["ratio"] <= g["norm_upper"] + 1e-6, g)
    expect(len(rows(os.path.join(tmp, "green.csv"))) == 4001, "rows")


def case_fss_constant(tmp):
    p = run("fss", "--preset", "constant(2)", "--window", "-10", "10", "--grid", "1001", out=tmp)
    expect(p.returncode == 0, p.stderr)
    m = report(tmp)["module"]["fss"]
    for c in m["inequalities"]["checks"]:
        if c["evaluated"]:
            expect(c["passed"] == c["points"], c)
    for r in rows(os.path.join(tmp, "fss.csv")):
        expect(abs(float(r["rho"]) - 0.25) < 1e-8, r)


def case_schema_all_presets(tmp):
    for i, preset in enumerate(PRESETS):
        out = os.path.join(tmp, str(i))
        p = run("analyze", "--preset", preset, "--window", "-40", "40", "--grid", "257", "--doublings", "3", out=out)
        expect(p.returncode == 0, (preset, p.stderr))
        report(out)
        for cmd in ("aux", "hardy"):
            o2 = out + cmd
            p = run(cmd, "--preset", preset, "--window", "-10", "10", "--grid", "201", out=o2)
            expect(p.returncode in (0, 3), (preset, cmd, p.stderr))
            report(o2)


def strip_time(path):
    with open(path) as fh:
        rep = json.load(fh)
    rep["meta"].pop("timestamp")
    return json.dumps(rep, sort_keys=True)


def case_deterministic(tmp):
    a, b = os.path.join(tmp, "a"), os.path.join(tmp, "b")
    args = ["analyze", "--preset", "example-4.5(1)", "--window", "-60", "60", "--grid", "513", "--workers", "1"]
    for out in (a, b):
        p = run(*args, out=out)
        expect(p.returncode == 0, p.stderr)
    expect(strip_time(os.path.join(a, "report.json")) == strip_time(os.path.join(b, "report.json")), "report differs")
    with open(os.path.join(a, "report.json")) as fa, open(os.path.join(b, "report.json")) as fb:
        la = [l for l in fa if '"timestamp"' not in l]
        lb = [l for l in fb if '"timestamp"' not in l]
    expect(la == lb, "report bytes differ outside the timestamp")
    for name in ("profile.csv", "primitive_inv_r.csv", "primitive_q.csv"):
        with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
            expect(fa.read() == fb.read(), name)


def case_stdout_report(tmp):
    p = run("hardy", "--preset", "constant", "--window", "-10", "10", "--grid", "1001")
    expect(p.returncode == 0, p.stderr)
    rep = json.loads(p.stdout)
    expect(rep["artifacts"] == [], rep["artifacts"])
    expect("H_p" in p.stderr, p.stderr)


def case_seventeen_digits(tmp):
    p = run("aux", "--preset", "constant(3)", "--window", "-1", "1", "--grid", "64", out=tmp)
    expect(p.returncode == 0, p.stderr)

    def digits(tok):
        mant = tok.split("e")[0].lstrip("-").replace(".", "").lstrip("0")
        return len(mant)

    with open(os.path.join(tmp, "report.json")) as fh:
        line = next(l for l in fh if '"hd_max"' in l)
    expect(digits(line.split(":")[1].strip().rstrip(",")) == 17, line)
    with open(os.path.join(tmp, "profile.csv")) as fh:
        fh.readline()
        fh.readline()
        x = fh.readline().split(",")[0]  # -1 + 2/63
    expect(digits(x) == 17, x)

if __name__ == "__main__":
    fn = globals().get("case_" + CASE)
    if fn is None:
        sys.exit("unknown case " + CASE)
    with tempfile.TemporaryDirectory() as tmp:
        fn(tmp)
    print("ok", CASE)
