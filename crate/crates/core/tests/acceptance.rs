use std::collections::{HashSet, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use branchlab::blocks::{
    build_block, build_diagonal, srist_membership, verify_block, BlockStructure, DiagonalSpec, VerifyBudget,
};
use branchlab::detect::{block_detect, dependence_on, DependenceReport, DetectBudget, SubgroupHandle};
use branchlab::level_quotient::LevelQuotient;
use branchlab::structure::{
    check_prop_4_3, declared_branching, regular_branch_check, spherical_transitivity, tree_primitive, KGeneration,
};
use branchlab::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;
type Oracle = fn(char, &[u8]) -> Vec<u8>;
type Criterion = fn(&mut Audit) -> Outcome;

/// Tallies every Proven and Refuted verdict met in the suite together with
/// the outcome of its independent replay.
#[derive(Default)]
struct Audit {
    proven: usize,
    refuted: usize,
    contradicted: Vec<String>,
    unreplayable: Vec<String>,
}

impl Audit {
    fn proven(&mut self, ctx: &str, oracle_agrees: bool) {
        self.proven += 1;
        if !oracle_agrees {
            self.contradicted.push(ctx.to_string());
        }
    }

    fn refuted(&mut self, ctx: &str, v: &Verdict, replays: bool) {
        self.refuted += 1;
        let has_witness = v.certificate.witness_vertex.is_some() || !v.certificate.witness_words.is_empty();
        if !has_witness || !replays {
            self.unreplayable.push(ctx.to_string());
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// Independent action oracles, written straight from the wreath recursions.

fn grig_act(g: char, w: &[u8]) -> Vec<u8> {
    let Some((&x, rest)) = w.split_first() else {
        return Vec::new();
    };
    let (head, tail) = match (g, x) {
        ('a', _) => (1 - x, rest.to_vec()),
        ('b', 0) | ('c', 0) => (0, grig_act('a', rest)),
        ('b', _) => (1, grig_act('c', rest)),
        ('c', _) => (1, grig_act('d', rest)),
        ('d', 0) => (0, rest.to_vec()),
        ('d', _) => (1, grig_act('b', rest)),
        _ => unreachable!("unknown generator {g}"),
    };
    let mut out = vec![head];
    out.extend(tail);
    out
}

/// GGS group on three letters with defining vector (1, 2).
fn ggs_act(g: char, w: &[u8]) -> Vec<u8> {
    let Some((&x, rest)) = w.split_first() else {
        return Vec::new();
    };
    let shift = |k: u8, v: &[u8]| -> Vec<u8> {
        let mut v = v.to_vec();
        if let Some(f) = v.first_mut() {
            *f = (*f + k) % 3;
        }
        v
    };
    let mut out = vec![];
    match (g, x) {
        ('a', _) => {
            out.push((x + 1) % 3);
            out.extend_from_slice(rest);
        }
        ('b', 0) => {
            out.push(0);
            out.extend(shift(1, rest));
        }
        ('b', 1) => {
            out.push(1);
            out.extend(shift(2, rest));
        }
        ('b', _) => {
            out.push(2);
            out.extend(ggs_act('b', rest));
        }
        _ => unreachable!("unknown generator {g}"),
    }
    out
}

/// Applies a word of generator letters, rightmost first.
fn word_act(oracle: Oracle, word: &str, w: &[u8]) -> Vec<u8> {
    word.chars().rev().fold(w.to_vec(), |acc, g| oracle(g, &acc))
}

fn spaced(word: &str) -> String {
    word.chars().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

fn words_of_length(d: u8, n: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..d).map(move |x| {
                    let mut w = w.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn words_up_to(d: u8, n: usize) -> Vec<Vec<u8>> {
    (0..=n).flat_map(|k| words_of_length(d, k)).collect()
}

fn index_of(d: u8, w: &[u8]) -> usize {
    w.iter().fold(0, |acc, &x| acc * d as usize + x as usize)
}

fn oracle_perm(oracle: Oracle, d: u8, g: &str, n: usize) -> Vec<u32> {
    words_of_length(d, n)
        .iter()
        .map(|w| index_of(d, &word_act(oracle, g, w)) as u32)
        .collect()
}

fn mul(p: &[u32], q: &[u32]) -> Vec<u32> {
    q.iter().map(|&i| p[i as usize]).collect()
}

fn inv(p: &[u32]) -> Vec<u32> {
    let mut out = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        out[x as usize] = i as u32;
    }
    out
}

fn bfs_closure(gens: &[Vec<u32>]) -> HashSet<Vec<u32>> {
    let id: Vec<u32> = (0..gens[0].len() as u32).collect();
    let mut seen = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            let q = mul(g, &p);
            if seen.insert(q.clone()) {
                queue.push_back(q);
            }
        }
    }
    seen
}

/// Number of partitions of `0..m` preserved by every permutation.
fn count_invariant_partitions(m: usize, gens: &[Vec<u32>]) -> usize {
    fn rec(i: usize, labels: &mut Vec<usize>, max: usize, gens: &[Vec<u32>], count: &mut usize) {
        let m = labels.len();
        if i == m {
            let ok = gens.iter().all(|p| {
                (0..m).all(|a| {
                    (a + 1..m).all(|b| labels[a] != labels[b] || labels[p[a] as usize] == labels[p[b] as usize])
                })
            });
            if ok {
                *count += 1;
            }
            return;
        }
        for l in 0..=max {
            labels[i] = l;
            rec(i + 1, labels, max.max(l + 1), gens, count);
        }
    }
    let mut labels = vec![0; m];
    let mut count = 0;
    if m == 0 {
        return 1;
    }
    rec(1, &mut labels, 1, gens, &mut count);
    count
}

fn grig() -> Arc<SelfSimilarGroup> {
    Arc::new(grigorchuk())
}

fn ggs12() -> Arc<SelfSimilarGroup> {
    Arc::new(ggs(&GgsSpec::new(3, &[1, 2]).unwrap()).0)
}

struct Preset {
    group: Arc<SelfSimilarGroup>,
    d: u8,
    names: &'static [&'static str],
    letters: &'static [char],
    oracle: Oracle,
}

fn presets() -> [Preset; 2] {
    [
        Preset {
            group: grig(),
            d: 2,
            names: &["a", "b", "c", "d"],
            letters: &['a', 'b', 'c', 'd'],
            oracle: grig_act,
        },
        Preset {
            group: ggs12(),
            d: 3,
            names: &["a", "b"],
            letters: &['a', 'b'],
            oracle: ggs_act,
        },
    ]
}

fn random_word(rng: &mut ChaCha8Rng, letters: &[char], max: usize) -> String {
    let len = rng.gen_range(1..=max);
    (0..len).map(|_| letters[rng.gen_range(0..letters.len())]).collect()
}

/// Replays membership in `Srist(V)` by acting on every word down to `depth`
/// below the deepest member of `V`.
fn replay_srist(x: &TreeAutomorphism, v: &VertexSet, d: u8, extra: usize) -> bool {
    let depth = v.iter().map(|w| w.len()).max().unwrap_or(0) + extra;
    words_up_to(d, depth).into_iter().all(|w| {
        let w = Word::new(d as usize, w).unwrap();
        let below = v.iter().any(|u| u.is_prefix_of(&w) && u.len() < w.len());
        below || x.act(&w) == w
    })
}

/// Searches a moved word below `v`, up to `depth` letters.
fn moves_below(x: &TreeAutomorphism, v: &Word, d: u8, depth: usize) -> bool {
    words_up_to(d, depth).into_iter().any(|s| {
        let mut l = v.letters().to_vec();
        l.extend(s);
        let w = Word::new(d as usize, l).unwrap();
        x.act(&w) != w
    })
}

fn criterion_1(_: &mut Audit) -> Outcome {
    let g = grig();
    let words = words_up_to(2, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut elems: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    elems.extend((0..60).map(|_| random_word(&mut rng, &['a', 'b', 'c', 'd'], 8)));
    let mut checks = 0;
    for e in &elems {
        let x = TreeAutomorphism::parse(&g, &spaced(e)).map_err(|err| err.to_string())?;
        for w in &words {
            let lib = x.act(&Word::new(2, w.clone()).unwrap());
            let want = word_act(grig_act, e, w);
            check(lib.letters() == want.as_slice(), || {
                format!("{e} on {w:?}: {lib} vs {want:?}")
            })?;
            checks += 1;
        }
    }
    Ok(format!("{checks} evaluations agree"))
}

fn criterion_2(_: &mut Audit) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut passed = 0;
    for Preset {
        group,
        d,
        letters,
        oracle,
        ..
    } in &presets()
    {
        let probes = words_up_to(*d, 5);
        for _ in 0..250 {
            let gw = random_word(&mut rng, letters, 6);
            let hw = random_word(&mut rng, letters, 6);
            let vlen = rng.gen_range(0..=3);
            let v: Vec<u8> = (0..vlen).map(|_| rng.gen_range(0..*d)).collect();
            let g = TreeAutomorphism::parse(group, &spaced(&gw)).unwrap();
            let h = TreeAutomorphism::parse(group, &spaced(&hw)).unwrap();
            let vw = Word::new(*d as usize, v.clone()).unwrap();
            let lhs = g.compose(&h).section(&vw);
            let rhs = g.section(&h.act(&vw)).compose(&h.section(&vw));
            let gh = format!("{gw}{hw}");
            for p in &probes {
                let pw = Word::new(*d as usize, p.clone()).unwrap();
                let mut full = v.clone();
                full.extend(p);
                let want = &word_act(*oracle, &gh, &full)[v.len()..];
                check(lhs.act(&pw).letters() == want && rhs.act(&pw).letters() == want, || {
                    format!("cocycle fails for g={gw} h={hw} v={vw} at {pw}")
                })?;
            }
            passed += 1;
        }
    }
    Ok(format!("{passed}/500 triples"))
}

fn criterion_3(audit: &mut Audit) -> Outcome {
    let g = grig();
    let budget = EqBudget::default();
    let probes = words_up_to(2, 8);
    for e in ["a^2", "b^2", "c^2", "d^2", "b c d", "(a d)^4"] {
        let x = TreeAutomorphism::parse(&g, e).unwrap();
        let v = x.is_trivial(&budget);
        check(v.is_proven(), || format!("{e}: {v}"))?;
        let fixes = probes.iter().all(|w| {
            let w = Word::new(2, w.clone()).unwrap();
            x.act(&w) == w
        });
        let expanded: String = match e {
            "a^2" => "aa".into(),
            "b^2" => "bb".into(),
            "c^2" => "cc".into(),
            "d^2" => "dd".into(),
            "b c d" => "bcd".into(),
            _ => "ad".repeat(4),
        };
        let oracle_fixes = probes.iter().all(|w| word_act(grig_act, &expanded, w) == *w);
        audit.proven(&format!("trivial {e}"), fixes && oracle_fixes);
    }
    for e in ["a", "b", "ab"] {
        let x = TreeAutomorphism::parse(&g, &spaced(e)).unwrap();
        let v = x.is_trivial(&budget);
        check(v.is_refuted(), || format!("{e}: {v}"))?;
        let wv = v
            .certificate
            .witness_vertex
            .clone()
            .ok_or_else(|| format!("{e}: no witness"))?;
        let minimal = (0..=8)
            .find(|&n| words_of_length(2, n).iter().any(|w| word_act(grig_act, e, w) != *w))
            .unwrap();
        let replays = word_act(grig_act, e, wv.letters()) != wv.letters();
        audit.refuted(&format!("nontrivial {e}"), &v, replays);
        check(replays && wv.len() == minimal, || {
            format!("{e}: witness {wv} at depth {}, oracle depth {minimal}", wv.len())
        })?;
    }
    Ok("6 Proven, 3 Refuted with minimal witnesses".into())
}

fn criterion_4(audit: &mut Audit) -> Outcome {
    let g = grig();
    let orders: Vec<u128> = (1..=5)
        .map(|n| {
            LevelQuotient::build(&g, n)
                .unwrap()
                .order()
                .to_string()
                .parse()
                .unwrap()
        })
        .collect();
    check(orders[0] == 2 && orders[1] == 8, || {
        format!("|G_1|, |G_2| = {}, {}", orders[0], orders[1])
    })?;
    let mut oracle = Vec::new();
    for n in [3, 4] {
        let gens: Vec<Vec<u32>> = ["a", "b", "c", "d"]
            .iter()
            .map(|s| oracle_perm(grig_act, 2, s, n))
            .collect();
        let size = bfs_closure(&gens).len() as u128;
        audit.proven(&format!("order of G_{n}"), size == orders[n - 1]);
        check(size == orders[n - 1], || {
            format!("|G_{n}| = {} but closure gives {size}", orders[n - 1])
        })?;
        oracle.push(size);
    }
    check(orders.iter().all(|o| o.is_power_of_two()), || format!("{orders:?}"))?;
    check(orders.windows(2).all(|w| w[1] % w[0] == 0), || format!("{orders:?}"))?;
    Ok(format!("orders {orders:?}; closure oracle {oracle:?}"))
}

fn criterion_5(audit: &mut Audit) -> Outcome {
    for (p, n) in presets().into_iter().zip([6, 4]) {
        let Preset {
            group: g,
            d,
            names,
            oracle,
            ..
        } = p;
        let q = LevelQuotient::build(&g, n).unwrap();
        let t = spherical_transitivity(&q.whole());
        check(t.len() == n && t.iter().all(|&b| b), || format!("transitivity {t:?}"))?;
        for k in 1..=n {
            let gens: Vec<Vec<u32>> = names.iter().map(|s| oracle_perm(oracle, d, s, k)).collect();
            let mut seen = HashSet::from([0u32]);
            let mut queue = vec![0u32];
            while let Some(x) = queue.pop() {
                for p in &gens {
                    if seen.insert(p[x as usize]) {
                        queue.push(p[x as usize]);
                    }
                }
            }
            audit.proven(
                &format!("transitive level {k}"),
                seen.len() == (d as usize).pow(k as u32),
            );
        }
    }
    Ok("single orbit on every level".into())
}

fn criterion_6(audit: &mut Audit) -> Outcome {
    let mut census = Vec::new();
    for (p, (n, brute)) in presets().into_iter().zip([(5, 3), (3, 2)]) {
        let Preset {
            group: g,
            d,
            names,
            oracle,
            ..
        } = p;
        let q = LevelQuotient::build(&g, n).unwrap();
        let r = tree_primitive(&q.whole());
        check(r.verdict.is_proven(), || format!("{}", r.verdict))?;
        let want: Vec<usize> = (1..=n + 1).collect();
        check(r.census == want, || format!("census {:?}", r.census))?;
        let mut agree = true;
        for k in 0..=brute {
            let gens: Vec<Vec<u32>> = names.iter().map(|s| oracle_perm(oracle, d, s, k)).collect();
            let count = count_invariant_partitions((d as usize).pow(k as u32), &gens);
            agree &= count == r.census[k];
        }
        audit.proven("tree-primitivity census", agree);
        check(agree, || "brute-force partition count disagrees".into())?;
        census.push(r.census);
    }
    let r = check_prop_4_3(&grig(), 3, Some((1, 0))).unwrap();
    check(r.verdict.is_proven() && r.element.as_deref() == Some("b"), || {
        format!("{}", r.verdict)
    })?;
    let h = ggs12();
    for i in 0..2 {
        let r = check_prop_4_3(&h, 3, Some((2, i))).unwrap();
        check(r.verdict.is_proven() && r.element.as_deref() == Some("b"), || {
            format!("{}", r.verdict)
        })?;
    }
    // b fixes 1x and 0 and moves 0y, for every x and y.
    let b_ok = (0..2u8).all(|x| {
        (0..2u8)
            .all(|y| grig_act('b', &[1, x]) == [1, x] && grig_act('b', &[0]) == [0] && grig_act('b', &[0, y]) != [0, y])
    });
    audit.proven("Grigorchuk two-level witness b", b_ok);
    Ok(format!("census {census:?}; witnesses b"))
}

fn criterion_7(audit: &mut Audit) -> Outcome {
    let g = grig();
    let k = declared_branching(&g);
    let r = regular_branch_check(&g, &k, KGeneration::NormalClosure, 5).unwrap();
    check(
        r.verdict.is_proven() && r.levels.iter().all(|l| l.verdict.is_proven()),
        || format!("{}", r.verdict),
    )?;

    let h = ggs12();
    let gamma3 = LevelQuotient::build(&h, 4)
        .unwrap()
        .whole()
        .lower_central_term(3)
        .lifted_generators()
        .unwrap();
    let r3 = regular_branch_check(&h, &gamma3, KGeneration::NormalClosure, 4).unwrap();
    check(r3.verdict.is_proven(), || format!("GGS: {}", r3.verdict))?;

    let a = TreeAutomorphism::parse(&g, "a").unwrap();
    let control = regular_branch_check(&g, std::slice::from_ref(&a), KGeneration::Subgroup, 3).unwrap();
    let refuted_level = control.levels.iter().find(|l| l.verdict.is_refuted()).map(|l| l.level);
    check(refuted_level.is_some_and(|l| l <= 2), || {
        format!("control: {}", control.verdict)
    })?;
    // Replay: rist_K(0) in the level-2 image of ⟨a⟩ is trivial, so its
    // projection cannot contain a.
    let q2 = LevelQuotient::build(&g, 2).unwrap();
    let k2 = q2.image_of(&[a]);
    let replays = k2.rist(&Word::parse(2, "0").unwrap()).unwrap().is_trivial();
    audit.refuted("K = <a> control", &control.verdict, replays);

    let indices: Vec<String> = r.index_chain.iter().map(|e| e.index_in_g.clone()).collect();
    let mut oracle = Vec::new();
    for n in [3, 4] {
        let gens: Vec<Vec<u32>> = ["a", "b", "c", "d"]
            .iter()
            .map(|s| oracle_perm(grig_act, 2, s, n))
            .collect();
        let whole = bfs_closure(&gens);
        let ab = mul(&gens[0], &gens[1]);
        let seed = mul(&ab, &ab);
        let conj: HashSet<Vec<u32>> = whole.iter().map(|x| mul(&mul(x, &seed), &inv(x))).collect();
        let conj: Vec<Vec<u32>> = conj.into_iter().collect();
        let kn = bfs_closure(&conj).len();
        oracle.push((whole.len() / kn).to_string());
    }
    check(oracle[0] == oracle[1], || format!("oracle indices {oracle:?}"))?;
    let stable = indices[2..].iter().all(|i| *i == oracle[0]);
    audit.proven("index chain", stable);
    check(stable, || format!("index chain {indices:?} vs oracle {}", oracle[0]))?;
    Ok(format!("index chain {} stabilizes at {}", indices.join(","), oracle[0]))
}

fn random_structure(rng: &mut ChaCha8Rng) -> BlockStructure {
    let size = rng.gen_range(1..=4);
    let mut support = VertexSet::new();
    while support.len() < size {
        let len = rng.gen_range(1..=4);
        let w = Word::new(2, (0..len).map(|_| rng.gen_range(0..2u8)).collect()).unwrap();
        if support.comparable_member(&w).is_none() {
            support.insert(w);
        }
    }
    let verts: Vec<Word> = support.iter().cloned().collect();
    let nparts = rng.gen_range(1..=verts.len());
    let mut parts = vec![VertexSet::new(); nparts];
    for (i, v) in verts.iter().enumerate() {
        let p = if i < nparts { i } else { rng.gen_range(0..nparts) };
        parts[p].insert(v.clone());
    }
    BlockStructure::new(parts).unwrap()
}

/// Replays every dependence witness: membership in `Srist(V)` and a
/// nontrivial section at each member of `V`.
fn replay_dependence(d: &DependenceReport, eq: &EqBudget) -> bool {
    let (Some(set), Some(w)) = (&d.set, &d.witness) else {
        return false;
    };
    srist_membership(w, set, eq).is_proven()
        && replay_srist(w, set, 2, 3)
        && set.iter().all(|u| w.section(u).is_trivial(eq).is_refuted())
        && moves_below(w, &d.vertex, 2, 4)
}

fn criterion_8(audit: &mut Audit) -> Outcome {
    let g = grig();
    let k = declared_branching(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut shapes = vec![
        BlockStructure::parse(2, "part: {000, 001}").unwrap(),
        BlockStructure::parse(2, "part: {000, 001}\npart: {1}").unwrap(),
    ];
    while shapes.len() < 20 {
        shapes.push(random_structure(&mut rng));
    }
    let verify_budget = VerifyBudget {
        levels: 4,
        ..Default::default()
    };
    let detect_budget = DetectBudget {
        depth: 8,
        ..Default::default()
    };
    for s in &shapes {
        let label = s.to_string().trim().replace('\n', " ");
        let specs: Vec<DiagonalSpec> = s
            .parts
            .iter()
            .map(|p| DiagonalSpec {
                support: p.clone(),
                generators: k.clone(),
            })
            .collect();
        let (gens, built) = build_block(&specs).unwrap();
        let vb = verify_block(
            &g,
            &gens,
            &built,
            Some((&k, KGeneration::NormalClosure)),
            &verify_budget,
        )
        .unwrap();
        let any_refuted = vb.parts.iter().any(|p| {
            [&p.srist, &p.finite_index, &p.injective].iter().any(|v| v.is_refuted())
                || p.regular.as_ref().is_some_and(Verdict::is_refuted)
        });
        check(!any_refuted && vb.verdict.is_proven(), || {
            format!("{label}: verify {}", vb.verdict)
        })?;
        for p in &vb.parts {
            let own = build_diagonal(&k, &p.support).unwrap();
            let replays = own
                .iter()
                .all(|x| gens.contains(x) && replay_srist(x, &p.support, 2, 3));
            audit.proven(&format!("{label}: srist clause"), replays);
        }

        let h = SubgroupHandle::new(&g, gens).unwrap();
        let r = block_detect(&h, &detect_budget).unwrap();
        check(r.verdict.is_proven(), || format!("{label}: detect {}", r.verdict))?;
        let found = r.structure.as_ref().ok_or_else(|| format!("{label}: no structure"))?;
        let replays = r.dependence.iter().all(|d| replay_dependence(d, &detect_budget.eq));
        audit.proven(&format!("{label}: detection witnesses"), replays);
        check(replays, || format!("{label}: a dependence witness does not replay"))?;
        check(found.is_descendant_refinement_of(s), || {
            format!("{label}: recovered {found}")
        })?;
        check(found.regular_over.as_deref() == Some("K"), || {
            format!("{label}: not flagged regular")
        })?;
    }
    Ok("20 blocks verified and recovered, all flagged regular over K".into())
}

fn criterion_9(audit: &mut Audit) -> Outcome {
    let g = grig();
    let k = declared_branching(&g);
    let budget = DetectBudget::default();
    let level1 = VertexSet::parse(2, "{0, 1}").unwrap();
    let zero = Word::parse(2, "0").unwrap();
    let product = BlockStructure::parse(2, "part: {0}\npart: {1}").unwrap();
    let diagonal = BlockStructure::parse(2, "part: {0, 1}").unwrap();
    let mut deltas = Vec::new();
    for (s, want) in [(&product, 1), (&diagonal, 2)] {
        let specs: Vec<DiagonalSpec> = s
            .parts
            .iter()
            .map(|p| DiagonalSpec {
                support: p.clone(),
                generators: k.clone(),
            })
            .collect();
        let (gens, _) = build_block(&specs).unwrap();
        let h = SubgroupHandle::new(&g, gens).unwrap();
        let r = dependence_on(&h, &level1, &zero, &budget).unwrap();
        check(r.verdict.is_proven() && r.delta == Some(want), || {
            format!("delta(0) = {:?}, expected {want}: {}", r.delta, r.verdict)
        })?;
        let set = r.set.clone().unwrap();
        for u in &set {
            let ru = dependence_on(&h, &level1, u, &budget).unwrap();
            check(ru.delta == r.delta && ru.set == r.set, || {
                format!("delta not constant on {set}")
            })?;
        }
        let replays = replay_dependence(&r, &budget.eq);
        audit.proven(&format!("delta(0) = {want}"), replays);
        check(replays, || {
            format!("witness sections not simultaneously nontrivial on {set}")
        })?;

        // The same dichotomy on the supporting set found by the pipeline.
        let full = block_detect(
            &h,
            &DetectBudget {
                depth: 8,
                ..budget.clone()
            },
        )
        .unwrap();
        let first = full.dependence.first().ok_or("empty supporting set")?;
        check(first.delta == Some(want), || {
            format!("pipeline delta {:?}", first.delta)
        })?;
        deltas.push(want);
    }
    Ok(format!("delta(0) = {} (product), {} (diagonal)", deltas[0], deltas[1]))
}

fn criterion_10(audit: &Audit) -> Outcome {
    check(audit.contradicted.is_empty(), || {
        format!("contradicted: {:?}", audit.contradicted)
    })?;
    check(audit.unreplayable.is_empty(), || {
        format!("unreplayable: {:?}", audit.unreplayable)
    })?;
    check(audit.proven > 0 && audit.refuted > 0, || "nothing audited".into())?;
    Ok(format!(
        "{} Proven verdicts confirmed by oracles, {} Refuted verdicts replayed",
        audit.proven, audit.refuted
    ))
}

fn main() {
    let criteria: [(&str, u64, Criterion); 9] = [
        ("recursion fidelity", 1, criterion_1),
        ("cocycle identity", 5, criterion_2),
        ("word problem", 1, criterion_3),
        ("level quotient orders", 30, criterion_4),
        ("spherical transitivity", 10, criterion_5),
        ("tree-primitivity", 60, criterion_6),
        ("regular branch", 60, criterion_7),
        ("block round trip", 300, criterion_8),
        ("dependence dichotomy", 60, criterion_9),
    ];
    let mut audit = Audit::default();
    let mut failed = 0;
    let mut report = |n: usize, name: &str, limit: Option<Duration>, elapsed: Duration, out: Outcome| {
        let out = match (out, limit) {
            (Ok(_), Some(l)) if elapsed > l => Err(format!("took {elapsed:.2?}, limit {l:?}")),
            (o, _) => o,
        };
        let (tag, detail) = match out {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {n:>2} {tag} {name} ({elapsed:.2?}): {detail}");
    };
    for (i, (name, secs, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f(&mut audit);
        report(i + 1, name, Some(Duration::from_secs(*secs)), t.elapsed(), out);
    }
    let t = Instant::now();
    let out = criterion_10(&audit);
    report(10, "verdict soundness", None, t.elapsed(), out);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
