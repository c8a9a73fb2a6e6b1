"""Acceptance suite: ten end-to-end guarantees, one test (and one printed
PASS/FAIL line) each.  Run with `pytest tests/test_acceptance.py -v -s` to see
the detail lines; the slowest test is the 100-seed evolution sweep (criterion
7, a few minutes on 8 workers)."""

import math

import numpy as np
import pytest

from sqlab import harness, kernels
from sqlab.dimensions import (
    FnSet,
    extend_witness,
    parity_witness,
    shifted_set,
    sq_dim,
    sqd_upper,
)
from sqlab.evolve import (
    QUADRATIC,
    disjunction_neighborhood,
    disjunction_params,
    lperf,
)
from sqlab.fnspace import (
    Domain,
    RealFn,
    conjunction_class,
    disagreement,
    dist_random,
    dist_uniform,
    l1_distance,
    make_conjunction,
    make_disjunction,
    make_parity,
    parity_class,
    random_bool_fn,
    random_real_fn,
    sign_of,
)
from sqlab.oracles import SQOracle, csq_decompose, general, true_query_value
from sqlab.rng import make_rng
from sqlab.sqcore import (
    ApproxSet,
    ExhaustiveCSQ,
    build_gpsi,
    class_pool_generator,
    gpsi_generator,
    projected_learner,
)


def _report(num, ok, detail):
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_criterion_01_every_accepted_step_pays_its_potential():
    # full grid: n in {3,4,5}, every conjunction target, uniform + 10 random
    # distributions, exact and rounding-adversary oracles, tau in {.05,.02}
    runs = 0
    drop_floor = math.inf
    worst_dis = 0.0
    max_updates_seen = 0
    for n in (3, 4, 5):
        domain = Domain(n)
        cclass = conjunction_class(n)
        dists = [dist_uniform(domain)] + [
            dist_random(domain, make_rng(100 + j, 0, "dist")) for j in range(10)
        ]
        for d in dists:
            for mode in ("exact", "grid_adversary"):
                for tau in (0.05, 0.02):
                    gen = class_pool_generator(cclass, gamma=4 * tau)
                    cap = math.ceil(1 / (3 * tau * tau))
                    for f in cclass.members:
                        orc = SQOracle(f, d, mode=mode, keep_log=False)
                        hyp, trace = projected_learner(
                            gen, orc, tau, 0.1, audit_target=f
                        )
                        runs += 1
                        assert trace.halt_reason == "converged"
                        assert trace.updates <= cap
                        max_updates_seen = max(max_updates_seen, trace.updates)
                        rows = trace.rows
                        for a, b in zip(rows, rows[1:]):
                            if a.gamma is not None:
                                drop = a.potential - b.potential
                                assert drop >= 3 * tau * tau - 1e-9
                                drop_floor = min(drop_floor, drop)
                        worst_dis = max(worst_dis, disagreement(f, hyp, d))
    ok = runs == 2464 and worst_dis <= 0.1
    _report(
        1,
        ok,
        f"{runs} runs converged; min accepted drop {drop_floor:.5f} vs floors "
        f"0.0075/0.0012; max updates {max_updates_seen}; "
        f"worst final disagreement {worst_dis:.4f} <= 0.1",
    )


def test_criterion_02_simulated_candidate_sets_feed_the_learner():
    # candidate sets produced by simulating the exhaustive baseline are good
    # enough for the projected learner to recover every n=4 conjunction
    domain = Domain(4)
    cclass = conjunction_class(4)
    runs = conv = 0
    worst = 0.0
    for j in range(10):
        d = dist_random(domain, make_rng(100 + j, 0, "dist"))
        gen = gpsi_generator(lambda: ExhaustiveCSQ(cclass, 1.0 / 15.0), d)
        for f in cclass.members:
            hyp, trace = projected_learner(
                gen, SQOracle(f, d, keep_log=False), tau=1 / 120, eps=0.1
            )
            runs += 1
            conv += trace.halt_reason == "converged"
            worst = max(worst, disagreement(f, hyp, d))
    ok = runs == 160 and conv == 160 and worst <= 0.1
    _report(2, ok, f"{conv}/{runs} converged; worst disagreement {worst:.4f} <= 0.1")


def test_criterion_03_candidate_sets_distinguish_far_targets():
    # every class member still far from sign(psi) correlates with some
    # candidate at the advertised threshold
    domain = Domain(3)
    u = dist_uniform(domain)
    cclass = parity_class(3)
    alg = ExhaustiveCSQ(cclass, 0.1)
    tau = alg.tau
    checked = fails = 0
    min_margin = math.inf
    for j in range(50):
        psi = random_real_fn(domain, make_rng(300 + j, 0, "psi"))
        gset = build_gpsi(alg, psi, u)
        h = sign_of(psi)
        for f in cclass.members:
            if disagreement(f, h, u) > 0.1 + tau:
                checked += 1
                margin = max(
                    abs(float(u.weights @ ((f.values - psi.values) * m.values)))
                    for m in gset.members
                )
                min_margin = min(min_margin, margin)
                fails += margin < tau - 1e-12
    ok = checked > 0 and fails == 0
    _report(
        3,
        ok,
        f"{checked} far members over 50 sampled shifts; min margin "
        f"{min_margin:.4f} >= tau {tau}; {fails} failures",
    )


def test_criterion_04_parity_dimension_is_the_whole_class():
    values = []
    for n in (1, 2, 3, 4):
        fs = FnSet.from_fns(list(parity_class(n)))
        rep = sq_dim(fs, dist_uniform(Domain(n)))
        assert rep.certainty == "exact"
        assert rep.value == 2 ** n
        values.append(rep.value)
    worst_off = 0.0
    for n in range(1, 11):
        domain = Domain(n)
        u = dist_uniform(domain)
        mat = np.stack([m.values for m in parity_class(n)])
        g = kernels.gram(mat, u.weights)
        worst_off = max(worst_off, float(np.abs(g - np.eye(len(mat))).max()))
    ok = worst_off <= 1e-12
    _report(
        4,
        ok,
        f"exact dimensions {values} for n=1..4; max pairwise correlation "
        f"deviation {worst_off:.2e} <= 1e-12 up to n=10",
    )


def test_criterion_05_parity_conjunction_distance_formulas():
    worst = 0.0
    count = 0
    for n in range(1, 11):
        domain = Domain(n)
        u = dist_uniform(domain)
        for bits in range(1, 2 ** n):
            subset = [i + 1 for i in range(n) if bits >> i & 1]
            k = len(subset)
            chi = make_parity(domain, subset)
            conj = make_conjunction(domain, subset)
            worst = max(
                worst,
                abs(disagreement(chi, conj, u) - (0.5 - 2.0 ** -k)),
                abs(l1_distance(chi, conj, u) - (1.0 - 2.0 ** (1 - k))),
            )
            count += 1
    fs, rep = parity_witness(5, 2)
    assert len(fs) == 15
    assert rep.value == 15 and rep.params["l1_radius"] == pytest.approx(0.5)
    domain = Domain(5)
    u = dist_uniform(domain)
    members = []
    for bits in range(1, 2 ** 5):
        subset = [i + 1 for i in range(5) if bits >> i & 1]
        if len(subset) <= 2:
            chi = make_parity(domain, subset)
            conj = make_conjunction(domain, subset)
            assert l1_distance(chi, conj, u) <= rep.params["l1_radius"] + 1e-12
            members.append(chi.values)
    g = kernels.gram(np.stack(members), u.weights)
    ortho = float(np.abs(g - np.eye(15)).max())
    ok = worst <= 1e-12 and len(members) == 15 and ortho <= 1e-12
    _report(
        5,
        ok,
        f"{count} index sets up to n=10, max formula deviation {worst:.2e}; "
        f"witness(5,2) has 15 members, orthogonality deviation {ortho:.2e}",
    )


def test_criterion_06_disjunction_neighborhood_gains_or_is_done():
    total = bad = 0
    worst_slack = math.inf
    for n in range(1, 7):
        domain = Domain(n)
        for eps in (0.2, 0.1):
            gamma, gain = disjunction_params(n, eps)
            for j in range(200):
                rng = make_rng(7000 + j, n * 10 + int(eps * 10), "triple")
                d = dist_random(domain, rng)
                subset = [i + 1 for i in range(n) if rng.random() < 0.5]
                f = make_disjunction(domain, subset)
                phi = random_real_fn(domain, rng)
                base = lperf(QUADRATIC, f, phi, d)
                need = min(base + gain, 1.0 - eps)
                best = max(
                    lperf(QUADRATIC, f, q, d)
                    for q in disjunction_neighborhood(phi, gamma)
                )
                total += 1
                worst_slack = min(worst_slack, best - need)
                bad += best < need - 1e-12
    ok = total == 2400 and bad == 0
    _report(
        6,
        ok,
        f"{total} sampled (distribution, disjunction, hypothesis) triples; "
        f"{bad} counterexamples; worst slack {worst_slack:.2e}",
    )


def test_criterion_07_disjunction_evolution_reaches_target():
    cfg = harness.make_config(
        {
            "command": "evolve",
            "n": 4,
            "epsilon": 0.2,
            "class": "disjunctions",
            "dist": "uniform",
            "seeds": "0..99",
            "workers": 8,
            "out": "unused",
        }
    )
    arts, sums = harness.run_config(cfg)
    reached = [s for s in sums if s["reached_target"]]
    mono = sum(1 for s in reached if s["monotone_vs_start"])
    ok = len(reached) >= 90 and mono >= 0.9 * len(reached)
    _report(
        7,
        ok,
        f"{len(reached)}/100 seeds reached performance > 0.8 "
        f"(>=90 required); {mono}/{len(reached)} of those monotone vs start",
    )


def _half_pool(fs, idx, gamma):
    members = [RealFn(fs.domain, row / 2.0) for row in fs.matrix[list(idx)]]
    return ApproxSet(members, gamma=gamma, provenance="half-witness")


def test_criterion_08_witness_pool_covers_the_shifted_set():
    eps = 0.4
    norm_floor = math.inf
    covers = []
    for make_class in (parity_class, conjunction_class):
        for n in (2, 3, 4):
            domain = Domain(n)
            u = dist_uniform(domain)
            cclass = make_class(n)
            best = None
            for j in range(20):
                psi = random_real_fn(domain, make_rng(100 + j, 0, "psi"))
                fs = shifted_set(cclass, psi, u, eps)
                if len(fs) == 0:
                    continue
                norms = np.sqrt(fs.matrix ** 2 @ u.weights)
                norm_floor = min(norm_floor, float(norms.min()))
                assert norms.min() >= math.sqrt(eps) - 1e-12
                rep = sq_dim(fs, u)
                if best is None or rep.value > best[1].value:
                    best = (fs, rep)
            fs, rep = best
            ext = extend_witness(fs, u, rep.witness, 1.0 / rep.value)
            d = len(ext)
            cover = sqd_upper(fs, u, 1.0 / (2 * d), _half_pool(fs, ext, 1.0 / (2 * d)))
            assert cover.value <= d
            covers.append((d, cover.value))
    ok = len(covers) == 6
    _report(
        8,
        ok,
        f"all shifted-set norms >= sqrt(0.4) (floor {norm_floor:.4f}); "
        f"(pool size, cover size) per class: {covers}",
    )


def test_criterion_09_decomposition_identity_and_oracle_audit():
    domain = Domain(4)
    bad_id = bad_audit = 0
    worst_gap = 0.0
    for j in range(10_000):
        rng = make_rng(900 + j, 0, "nine")
        d = dist_random(domain, rng)
        f = random_bool_fn(domain, rng)
        q = general(
            domain, rng.uniform(-1, 1, domain.size), rng.uniform(-1, 1, domain.size),
            0.05,
        )
        phi1, phi2 = csq_decompose(q)
        lhs = true_query_value(q, f, d)
        rhs = float(d.weights @ (phi1.values * f.values)) + float(
            d.weights @ phi2.values
        )
        worst_gap = max(worst_gap, abs(lhs - rhs))
        bad_id += abs(lhs - rhs) > 1e-12
        for mode in ("exact", "grid_adversary", "noisy"):
            orc = SQOracle(f, d, mode=mode, seed=j)
            orc.query(q)
            bad_audit += orc.audit() > 1e-12 if mode == "exact" else orc.audit() > 0.05 + 1e-12
    ok = bad_id == 0 and bad_audit == 0
    _report(
        9,
        ok,
        f"10000 random (query, target, distribution) triples: identity gap "
        f"max {worst_gap:.2e} <= 1e-12; {bad_audit} audit violations across "
        f"3 oracle modes",
    )


def test_criterion_10_byte_identical_reruns(tmp_path):
    data = {
        "command": "learn",
        "n": 3,
        "class": "conjunctions",
        "dist": "random",
        "tau": 0.05,
        "seeds": "0..7",
        "out": str(tmp_path / "a"),
    }
    arts1, _ = harness.run_config(harness.make_config(data))
    arts8, _ = harness.run_config(harness.make_config({**data, "workers": 8}))
    assert [a[0] for a in arts1] == [a[0] for a in arts8]
    same_workers = all(x[1] == y[1] for x, y in zip(arts1, arts8))

    harness.execute(harness.make_config(data))
    rerun_dir = tmp_path / "b"
    harness.rerun_manifest(tmp_path / "a" / "manifest.json", rerun_dir)
    names = sorted(p.name for p in (tmp_path / "a").iterdir() if p.name != "manifest.json")
    same_rerun = all(
        (tmp_path / "a" / nm).read_bytes() == (rerun_dir / nm).read_bytes()
        for nm in names
    )
    ok = same_workers and same_rerun and len(names) == 8
    _report(
        10,
        ok,
        f"8 artifacts byte-identical across 1 vs 8 workers ({same_workers}) "
        f"and across manifest re-run ({same_rerun})",
    )
