//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::process::{Command, ExitCode};
use std::sync::{Arc, OnceLock};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use urysohn::concentration::{concentration_exact, hamming_bound, separation_distance, MMSpace};
use urysohn::group::{DirectPower, EnumeratedGroup, PermutationGroup};
use urysohn::hamming::{discrete_pair, HammingPower};
use urysohn::invariant::{
    bounded_path_metric, certify_v_isometry, max_bounded_metric, quotient_pseudometric, InvariantMetric, VIsometry,
    VValues, WeightedCayleyGraph,
};
use urysohn::levy::action::{Check, IsometricAction, PointAction};
use urysohn::levy::chain::{audit_chain, ChainBundle, ChainStatus};
use urysohn::levy::extend::{extend_action_approximating, ExtendParams, Extension, TargetSpec};
use urysohn::levy::mass::{neighborhood_mass, MassParams, WitnessSet};
use urysohn::metric::{path_metric, FiniteMetricSpace, MetricSpace, Neighborhood, WeightedGraph};
use urysohn::perm::Permutation;
use urysohn::word::FreeProduct;
use urysohn::Rational;

const FLOAT_TOLERANCE: f64 = 1e-9;

type Outcome = Result<String, String>;

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn perm(images: &[usize]) -> Permutation {
    Permutation::from_usize(images).expect("valid permutation")
}

fn group_of(degree: usize, gens: &[&[usize]]) -> PermutationGroup {
    PermutationGroup::new(degree, gens.iter().map(|g| perm(g)).collect()).expect("consistent degree")
}

fn alternating4() -> PermutationGroup {
    group_of(4, &[&[1, 2, 0, 3], &[0, 2, 3, 1]])
}

fn quaternion() -> PermutationGroup {
    group_of(8, &[&[2, 3, 1, 0, 6, 7, 5, 4], &[4, 5, 7, 6, 1, 0, 2, 3]])
}

fn enumerate(g: &PermutationGroup) -> EnumeratedGroup {
    g.enumerate(1_000_000).expect("small group")
}

/// A bounded left-invariant metric from a few random weighted connectors.
fn random_metric(g: &EnumeratedGroup, rng: &mut ChaCha8Rng) -> InvariantMetric {
    let n = g.order();
    let k = rng.gen_range(1..=4);
    let connectors: Vec<(usize, Rational)> = (0..k)
        .filter(|_| n > 1)
        .map(|_| (rng.gen_range(1..n), r(rng.gen_range(1..=12), 12)))
        .collect();
    bounded_path_metric(g, &WeightedCayleyGraph::from_connectors(g, &connectors))
}

/// `min(1, shortest V⁻¹V-path)` from the identity by Bellman–Ford relaxation.
fn bounded_oracle(g: &EnumeratedGroup, values: &VValues) -> Vec<Rational> {
    let mut edges = Vec::new();
    for (i, &a) in values.elements.iter().enumerate() {
        for (j, &b) in values.elements.iter().enumerate() {
            edges.push((g.mul(g.inv(a), b), values.dist[i][j]));
        }
    }
    let mut dist = vec![Rational::one(); g.order()];
    dist[g.identity()] = Rational::zero();
    loop {
        let mut changed = false;
        for x in 0..g.order() {
            for &(c, w) in &edges {
                let y = g.mul(x, c);
                if dist[x] + w < dist[y] {
                    dist[y] = dist[x] + w;
                    changed = true;
                }
            }
        }
        if !changed {
            return dist;
        }
    }
}

fn pointwise_le(a: &InvariantMetric, b: &InvariantMetric) -> bool {
    a.from_identity.iter().zip(&b.from_identity).all(|(x, y)| x <= y)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut tested = 0usize;
    let instances = 120;
    for inst in 0..instances {
        let group = match inst % 8 {
            0 => PermutationGroup::cyclic(rng.gen_range(2..=60)),
            1 => PermutationGroup::dihedral(rng.gen_range(3..=100)),
            2 => PermutationGroup::symmetric(rng.gen_range(3..=5)),
            3 => alternating4(),
            4 => PermutationGroup::cyclic(rng.gen_range(2..=10)).product(&PermutationGroup::cyclic(rng.gen_range(2..=10))),
            5 => PermutationGroup::dihedral(rng.gen_range(3..=10)).product(&PermutationGroup::cyclic(rng.gen_range(2..=5))),
            6 => quaternion().product(&PermutationGroup::cyclic(rng.gen_range(1..=12))),
            _ => PermutationGroup::symmetric(4).product(&PermutationGroup::cyclic(rng.gen_range(1..=8))),
        };
        let g = enumerate(&group);
        ensure(g.order() <= 200, || format!("instance {inst}: order {} above 200", g.order()))?;
        let sigma0 = random_metric(&g, &mut rng);
        let size = rng.gen_range(2..=6).min(g.order());
        let mut elements: Vec<usize> = Vec::new();
        while elements.len() < size {
            let x = rng.gen_range(0..g.order());
            if !elements.contains(&x) {
                elements.push(x);
            }
        }
        let values = VValues::restrict(&g, &sigma0, elements.clone());
        let rho = max_bounded_metric(&g, &values).map_err(|e| format!("instance {inst}: {e}"))?;
        ensure(rho.from_identity == bounded_oracle(&g, &values), || format!("instance {inst}: differs from the path oracle"))?;
        rho.check(&g).map_err(|e| format!("instance {inst}: result is not a pseudometric: {e}"))?;
        for (i, &a) in elements.iter().enumerate() {
            for (j, &b) in elements.iter().enumerate() {
                ensure(rho.dist(&g, a, b) == values.dist[i][j], || format!("instance {inst}: ρ|V ≠ d|V at ({i}, {j})"))?;
            }
        }
        let fit = |s: &InvariantMetric| {
            let mut t = Rational::one();
            for (i, &a) in elements.iter().enumerate() {
                for (j, &b) in elements.iter().enumerate() {
                    let v = s.dist(&g, a, b);
                    if v.is_positive() {
                        t = t.min(values.dist[i][j] / v);
                    }
                }
            }
            let top = s.from_identity.iter().copied().max().unwrap_or_default();
            if top > Rational::one() {
                t = t.min(top.recip());
            }
            s.scaled(t)
        };
        let s1 = fit(&random_metric(&g, &mut rng));
        let s2 = fit(&random_metric(&g, &mut rng));
        let third = sigma0.scaled(r(1, 3));
        let joined = InvariantMetric {
            from_identity: s2.from_identity.iter().zip(&third.from_identity).map(|(a, b)| *a.max(b)).collect(),
        };
        let zero = InvariantMetric { from_identity: vec![Rational::zero(); g.order()] };
        for (k, sigma) in [sigma0.clone(), sigma0.scaled(r(1, 2)), s1, joined, zero].iter().enumerate() {
            sigma.check(&g).map_err(|e| format!("instance {inst}: test metric {k} invalid: {e}"))?;
            ensure(sigma.from_identity.iter().all(|v| *v <= Rational::one()), || format!("instance {inst}: test metric {k} exceeds 1"))?;
            for (i, &a) in elements.iter().enumerate() {
                for (j, &b) in elements.iter().enumerate() {
                    ensure(sigma.dist(&g, a, b) <= values.dist[i][j], || format!("instance {inst}: test metric {k} exceeds d on V"))?;
                }
            }
            ensure(pointwise_le(sigma, &rho), || format!("instance {inst}: test metric {k} is not below ρ"))?;
            tested += 1;
        }
    }
    Ok(format!("{instances} instances, {tested} test pseudometrics below ρ, ρ|V = d|V exactly"))
}

fn catalogue() -> Vec<(String, PermutationGroup)> {
    let c = PermutationGroup::cyclic;
    let d = PermutationGroup::dihedral;
    let mut out: Vec<(String, PermutationGroup)> = (1..=24).map(|n| (format!("Z{n}"), c(n))).collect();
    out.extend((3..=12).map(|n| (format!("D{n}"), d(n))));
    out.extend([
        ("S4".to_string(), PermutationGroup::symmetric(4)),
        ("A4".to_string(), alternating4()),
        ("Q8".to_string(), quaternion()),
        ("Z2xZ2".to_string(), c(2).product(&c(2))),
        ("Z2^3".to_string(), c(2).product(&c(2)).product(&c(2))),
        ("Z2xZ4".to_string(), c(2).product(&c(4))),
        ("Z3xZ3".to_string(), c(3).product(&c(3))),
        ("Z2xZ6".to_string(), c(2).product(&c(6))),
        ("Z4xZ4".to_string(), c(4).product(&c(4))),
        ("Z2xZ8".to_string(), c(2).product(&c(8))),
        ("Z2xS3".to_string(), c(2).product(&d(3))),
        ("Z3xS3".to_string(), c(3).product(&d(3))),
        ("Z2xD4".to_string(), c(2).product(&d(4))),
        ("Z2xQ8".to_string(), c(2).product(&quaternion())),
        ("Z2xA4".to_string(), c(2).product(&alternating4())),
        ("Z4xS3".to_string(), c(4).product(&d(3))),
        ("Z3xD4".to_string(), c(3).product(&d(4))),
        ("Z2xZ2xS3".to_string(), c(2).product(&c(2)).product(&d(3))),
        ("Z2^2xZ6".to_string(), c(2).product(&c(2)).product(&c(6))),
        ("Z3xQ8".to_string(), c(3).product(&quaternion())),
    ]);
    out
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut groups, mut subgroups, mut sampled) = (0usize, 0usize, 0usize);
    for (name, group) in catalogue() {
        let g = enumerate(&group);
        ensure(g.order() <= 24, || format!("{name} has order {}", g.order()))?;
        groups += 1;
        for _ in 0..2 {
            let rho = random_metric(&g, &mut rng);
            for h in g.normal_subgroups() {
                subgroups += 1;
                let q = quotient_pseudometric(&g, &rho, &h).map_err(|e| format!("{name}: {e}"))?;
                for x in 0..g.order() {
                    for y in 0..g.order() {
                        ensure(q.dist_of_elements(&g, x, y) <= rho.dist(&g, x, y), || {
                            format!("{name}, |H| = {}: quotient exceeds ρ at ({x}, {y})", h.len())
                        })?;
                    }
                }
                let k = q.len();
                for _ in 0..3 {
                    let ids = (0..k).map(|i| format!("c{i}")).collect();
                    let mut graph = WeightedGraph::new(ids);
                    for a in 0..k {
                        for b in (a + 1)..k {
                            graph.add_edge(a, b, r(rng.gen_range(1..=10), rng.gen_range(1..=4)));
                        }
                    }
                    let s = path_metric(&graph).map_err(|e| e.to_string())?;
                    let mut t: Option<Rational> = None;
                    for x in 0..g.order() {
                        for y in 0..g.order() {
                            let v = s.dist(q.label[x], q.label[y]);
                            if v.is_positive() {
                                let ratio = rho.dist(&g, x, y) / v;
                                t = Some(t.map_or(ratio, |cur| cur.min(ratio)));
                            }
                        }
                    }
                    let t = t.unwrap_or(Rational::one());
                    for a in 0..k {
                        for b in 0..k {
                            ensure(s.dist(a, b) * t <= q.dist(&g, a, b), || {
                                format!("{name}, |H| = {}: 1-Lipschitz test metric exceeds the quotient metric", h.len())
                            })?;
                        }
                    }
                    sampled += 1;
                }
            }
        }
    }
    Ok(format!("{groups} groups, {subgroups} (metric, normal subgroup) pairs, {sampled} sampled quotient metrics"))
}

struct Instance {
    name: String,
    action: IsometricAction,
    target: TargetSpec,
    eps: Rational,
}

fn natural(group: PermutationGroup, space: FiniteMetricSpace) -> IsometricAction {
    let g = Arc::new(enumerate(&group));
    IsometricAction::new(g, Arc::new(space), PointAction::Natural).expect("natural action")
}

fn extension_instances() -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let epsilons = [r(1, 2), r(1, 4)];
    let mut out = Vec::new();
    let point = || natural(PermutationGroup::trivial(), FiniteMetricSpace::singleton("x"));
    for c in [r(1, 2), r(1, 1), r(3, 2), r(2, 1)] {
        for eps in epsilons {
            out.push(Instance { name: format!("point, target at {c}, eps {eps}"), action: point(), target: TargetSpec::Equilateral { c }, eps });
        }
    }
    for eps in epsilons {
        out.push(Instance { name: format!("point, identity, eps {eps}"), action: point(), target: TargetSpec::Permutation { images: vec![0] }, eps });
        let pair = FiniteMetricSpace::equilateral(2, eps);
        for images in [vec![1, 0], vec![0, 1]] {
            out.push(Instance {
                name: format!("Z2 swap, permutation {images:?}, eps {eps}"),
                action: natural(PermutationGroup::cyclic(2), pair.clone()),
                target: TargetSpec::Permutation { images },
                eps,
            });
        }
        out.push(Instance {
            name: format!("trivial on two points, swap, eps {eps}"),
            action: natural(PermutationGroup::new(2, vec![]).expect("trivial"), pair),
            target: TargetSpec::Permutation { images: vec![1, 0] },
            eps,
        });
    }
    let free_actions: Vec<(&str, PermutationGroup)> = vec![
        ("trivial on 2", PermutationGroup::new(2, vec![]).expect("trivial")),
        ("Z2 on 2", PermutationGroup::cyclic(2)),
        ("trivial on 3", PermutationGroup::new(3, vec![]).expect("trivial")),
        ("Z3 on 3", PermutationGroup::cyclic(3)),
        ("trivial on 4", PermutationGroup::new(4, vec![]).expect("trivial")),
        ("Z2 on 4", group_of(4, &[&[1, 0, 3, 2]])),
        ("Z4 on 4", PermutationGroup::cyclic(4)),
        ("Z2xZ2 on 4", group_of(4, &[&[1, 0, 3, 2], &[2, 3, 0, 1]])),
    ];
    let sides = [r(1, 2), r(1, 1), r(3, 2), r(2, 1)];
    for (name, group) in free_actions {
        let side = sides[rng.gen_range(0..sides.len())];
        let space = FiniteMetricSpace::equilateral(group.degree, side);
        let mut targets = vec![TargetSpec::Equilateral { c: side }];
        if group.degree == 2 {
            targets.push(TargetSpec::Offset { delta: side });
        }
        for target in targets {
            for eps in epsilons {
                out.push(Instance {
                    name: format!("{name}, side {side}, {target:?}, eps {eps}"),
                    action: natural(group.clone(), space.clone()),
                    target: target.clone(),
                    eps,
                });
            }
        }
    }
    out
}

fn run_instance(inst: &Instance) -> Result<Extension, String> {
    let x = FiniteMetricSpace::from_space(&*inst.action.space);
    let target = inst.target.build(&x).map_err(|e| format!("{}: {e}", inst.name))?;
    extend_action_approximating(&inst.action, &target, inst.eps, &ExtendParams::default()).map_err(|e| format!("{}: {e}", inst.name))
}

struct Solved {
    instance: Instance,
    extension: Extension,
    elapsed: Duration,
}

fn solved() -> Result<&'static [Solved], String> {
    static CACHE: OnceLock<Result<Vec<Solved>, String>> = OnceLock::new();
    CACHE
        .get_or_init(|| {
            extension_instances()
                .into_iter()
                .map(|instance| {
                    let start = Instant::now();
                    let extension = run_instance(&instance)?;
                    Ok(Solved { instance, extension, elapsed: start.elapsed() })
                })
                .collect()
        })
        .as_deref()
        .map_err(Clone::clone)
}

fn exhaustive(c: &Check) -> bool {
    matches!(c, Check::Exhaustive { .. })
}

fn criterion_4() -> Outcome {
    let instances = solved()?;
    let mut largest = 0;
    let mut slowest = Duration::ZERO;
    for Solved { instance: inst, extension: ext, elapsed } in instances {
        slowest = slowest.max(*elapsed);
        let rep = &ext.report;
        let out = &rep.output_action;
        let name = &inst.name;
        ensure(rep.g_injective, || format!("{name}: G does not embed"))?;
        ensure(
            exhaustive(&out.isometry) && out.freeness.as_ref().is_some_and(exhaustive),
            || format!("{name}: extended action certificate is not an exhaustive scan"),
        )?;
        let y_action = ext.action();
        for gq in 0..ext.group.order() {
            for p in 0..ext.group.order() {
                ensure(gq == 0 || y_action.act(gq, p) != p, || format!("{name}: element {gq} fixes {p}"))?;
            }
        }
        let g = &inst.action.group;
        for h in 0..g.order() {
            for p in 0..inst.action.points() {
                ensure(ext.group.mul(ext.g_embedding[h], ext.x_embedding[p]) == ext.x_embedding[inst.action.act(h, p)], || {
                    format!("{name}: extension disagrees at element {h}, point {p}")
                })?;
            }
        }
        let y = ext.space();
        let x = FiniteMetricSpace::from_space(&*inst.action.space);
        let target = inst.target.build(&x).map_err(|e| e.to_string())?;
        for p in 0..x.len() {
            ensure(rep.approximation[p] < inst.eps, || format!("{name}: d(f̃x, fx) = {} at point {p}", rep.approximation[p]))?;
            let moved = ext.group.mul(ext.f_tilde, ext.x_embedding[p]);
            for q in 0..x.len() {
                let gap = (y.dist(moved, ext.x_embedding[q]) - target.ambient.dist(target.image[p], q)).abs();
                ensure(gap < inst.eps, || format!("{name}: distance from f̃x_{p} to x_{q} is off by {gap}"))?;
            }
        }
        largest = largest.max(ext.group.order());
    }
    Ok(format!(
        "{} instances certified by exhaustive scans, largest extended group of order {largest}, slowest instance {:.1}s",
        instances.len(),
        slowest.as_secs_f64()
    ))
}

/// `Q` acting on the left cosets of `h`, and the image of every element.
fn coarsen(q: &EnumeratedGroup, h: &[usize]) -> (EnumeratedGroup, Vec<usize>) {
    let (cosets, label) = q.left_cosets(h);
    let on_cosets = |x: usize| perm(&cosets.iter().map(|c| label[q.mul(x, c[0])]).collect::<Vec<_>>());
    let gens = q.generator_indices().into_iter().map(on_cosets).collect();
    let coarse = enumerate(&PermutationGroup::new(cosets.len(), gens).expect("coset action"));
    let images = (0..q.order()).map(|x| coarse.index_of(&on_cosets(x)).expect("in the image")).collect();
    (coarse, images)
}

fn criterion_3() -> Outcome {
    let (mut certified, mut refuted) = (0usize, 0usize);
    let mut slowest = Duration::ZERO;
    for Solved { instance: inst, extension: ext, elapsed } in solved()? {
        let start = Instant::now();
        let name = &inst.name;
        ensure(ext.report.v_isometry.is_certified(), || format!("{name}: pipeline gate not certified"))?;
        let nx = inst.action.points();
        let fp = FreeProduct::new(inst.action.group.clone(), ext.report.orbits, true);
        let images: Vec<usize> = ext
            .report
            .v_words
            .iter()
            .map(|w| {
                let word = fp.parse(w).map_err(|e| e.to_string())?;
                ext.group.index_of(&ext.hom.evaluate(&word)).ok_or_else(|| format!("{name}: word {w} leaves Q"))
            })
            .collect::<Result<_, _>>()?;
        let x = FiniteMetricSpace::from_space(&*inst.action.space);
        let target = inst.target.build(&x).map_err(|e| e.to_string())?;
        let amb = &ext.ambient;
        let fprime: Vec<usize> = match ext.report.displacement {
            Some(_) => (amb.len() - nx..amb.len()).collect(),
            None => target.image.clone(),
        };
        let w: Vec<usize> = (0..nx).chain(fprime).collect();
        let d_xi: Vec<Vec<Rational>> = w
            .iter()
            .map(|&a| w.iter().map(|&b| (amb.dist(a, b) / ext.scale).min(Rational::one())).collect())
            .collect();
        let values = VValues::new(images.clone(), d_xi.clone()).map_err(|e| e.to_string())?;
        let rho = max_bounded_metric(&ext.group, &values).map_err(|e| e.to_string())?;
        ensure(certify_v_isometry(&ext.group, &rho, &images, &d_xi).is_certified(), || format!("{name}: recomputed gate fails"))?;
        certified += 1;

        let collapse = ext.group.mul(ext.group.inv(images[0]), images[nx]);
        let h = ext.group.normal_closure(&[collapse]);
        let (coarse, to_coarse) = coarsen(&ext.group, &h);
        let coarse_images: Vec<usize> = images.iter().map(|&v| to_coarse[v]).collect();
        let coarse_values = VValues::new(coarse_images.clone(), d_xi.clone()).map_err(|e| e.to_string())?;
        let coarse_rho = max_bounded_metric(&coarse, &coarse_values).map_err(|e| e.to_string())?;
        match certify_v_isometry(&coarse, &coarse_rho, &coarse_images, &d_xi) {
            VIsometry::Counterexample { upstairs, downstairs, .. } if upstairs != downstairs => refuted += 1,
            other => return Err(format!("{name}: coarsened quotient of order {} was not refuted: {other:?}", coarse.order())),
        }
        slowest = slowest.max(*elapsed + start.elapsed());
    }
    Ok(format!(
        "{certified} searches certified; {refuted} coarsened quotients refuted with a counterexample pair; slowest instance {:.1}s",
        slowest.as_secs_f64()
    ))
}

/// `α(ε)` by enumerating every subset of a small uniform space.
fn alpha_oracle(space: &FiniteMetricSpace, eps: Rational, kind: Neighborhood) -> Rational {
    let n = space.len();
    let near = |x: usize, y: usize| match kind {
        Neighborhood::Closed => space.dist(x, y) <= eps,
        Neighborhood::Open => space.dist(x, y) < eps,
    };
    let mut best = n;
    for mask in 1u32..(1 << n) {
        if 2 * mask.count_ones() as usize >= n {
            let grown = (0..n).filter(|&y| (0..n).any(|x| mask >> x & 1 == 1 && near(x, y))).count();
            best = best.min(grown);
        }
    }
    Rational::one() - r(best as i128, n as i128)
}

fn criterion_5() -> Outcome {
    let grid = [r(1, 8), r(1, 4), r(1, 2), r(3, 4), r(1, 1)];
    let mut worst_margin = f64::INFINITY;
    let mut closed_increases = Vec::new();
    for kind in [Neighborhood::Open, Neighborhood::Closed] {
        let mut previous: Option<Vec<Rational>> = None;
        for n in 1..=4usize {
            let space = HammingPower::new(discrete_pair(), n).expect("positive").materialize(64).expect("small");
            let mm = MMSpace::uniform(space.clone());
            let mut row = Vec::new();
            for &eps in &grid {
                let alpha = concentration_exact(&mm, eps, kind, 16).map_err(|e| e.to_string())?.alpha;
                ensure(alpha == alpha_oracle(&space, eps, kind), || format!("{kind:?}, n = {n}, ε = {eps}: α = {alpha} differs from the subset oracle"))?;
                let bound = hamming_bound(n, 1.0, eps.to_f64());
                ensure(alpha.to_f64() <= bound + FLOAT_TOLERANCE, || format!("{kind:?}, n = {n}, ε = {eps}: α = {alpha} above {bound}"))?;
                worst_margin = worst_margin.min(bound - alpha.to_f64());
                row.push(alpha);
            }
            if let Some(prev) = &previous {
                for (k, (a, b)) in prev.iter().zip(&row).enumerate() {
                    if b > a {
                        match kind {
                            Neighborhood::Open => return Err(format!("α increases from n = {} to {n} at ε = {}", n - 1, grid[k])),
                            Neighborhood::Closed => closed_increases.push(format!("n = {} to {n} at ε = {} ({a} to {b})", n - 1, grid[k])),
                        }
                    }
                }
            }
            previous = Some(row);
        }
    }
    Ok(format!(
        "exact α on {{0,1}}^n, n ≤ 4, below 2e^(-nε²/8) for open and closed neighbourhoods (least margin {worst_margin:.4}); \
         nonincreasing in n for open neighbourhoods; closed-neighbourhood increases: {}",
        if closed_increases.is_empty() { "none".to_string() } else { closed_increases.join(", ") }
    ))
}

fn criterion_6() -> Outcome {
    let g = Arc::new(enumerate(&PermutationGroup::cyclic(2)));
    let eps = r(1, 4);
    let params = MassParams { samples: 20_000, seed: 6, confidence_delta: 0.05 };
    let mut cylinder = Vec::new();
    let mut ball = Vec::new();
    for m in [16usize, 64, 256] {
        let power = DirectPower::new(g.clone(), m);
        let a = neighborhood_mass(&power, Rational::one(), eps, &WitnessSet::Cylinder { allowed: vec![0] }, &params, None)
            .map_err(|e| e.to_string())?;
        ensure(a.witness_mass == 0.5, || format!("m = {m}: witness mass {}", a.witness_mass))?;
        ensure(a.estimate >= a.lower_bound - 3.0 * a.radius, || {
            format!("m = {m}: estimate {} below {} − 3·{}", a.estimate, a.lower_bound, a.radius)
        })?;
        if let Some(prev) = cylinder.last() {
            ensure(a.estimate >= *prev, || format!("m = {m}: estimate {} decreased from {prev}", a.estimate))?;
        }
        cylinder.push(a.estimate);
        let b = neighborhood_mass(&power, Rational::one(), eps, &WitnessSet::Ball { radius: m / 2 }, &params, None)
            .map_err(|e| e.to_string())?;
        ball.push(b.estimate);
    }
    Ok(format!("cylinder witness estimates {cylinder:?} (nondecreasing, above bound − 3 radii); majority-ball witness {ball:?}"))
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_urysohn");
    let run = |args: &[&str]| -> Result<(), String> {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || format!("urysohn {args:?} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    };
    let path = |name: &str| dir.path().join(name).display().to_string();
    let (first, second, half, resumed) = (path("first.json"), path("second.json"), path("half.json"), path("resumed.json"));
    let start = Instant::now();
    run(&["levy-chain", "--stages", "2", "--seed", "7", "-o", &first, "--csv", &path("first.csv")])?;
    let elapsed = start.elapsed();
    run(&["levy-chain", "--stages", "2", "--seed", "7", "-o", &second])?;
    run(&["levy-chain", "--stages", "1", "--seed", "7", "-o", &half])?;
    run(&["levy-chain", "--resume", &half, "--stages", "2", "-o", &resumed])?;
    let bytes = std::fs::read(&first).map_err(|e| e.to_string())?;
    ensure(bytes == std::fs::read(&second).map_err(|e| e.to_string())?, || "rerun is not byte-identical".into())?;
    ensure(bytes == std::fs::read(&resumed).map_err(|e| e.to_string())?, || "resumed run differs from the fresh run".into())?;
    let bundle: ChainBundle = serde_json::from_slice(&bytes).map_err(|e| e.to_string())?;
    ensure(bundle.stages.len() == 2 && bundle.status == ChainStatus::Complete, || "chain incomplete".into())?;
    for s in &bundle.stages {
        let need = Rational::from(8) * s.a_n * s.a_n * Rational::from(s.n as i128);
        ensure(s.growth_rule && Rational::from(s.m_n as i128) >= need, || format!("stage {}: growth rule", s.n))?;
        ensure(s.epsilon == r(1, 1 << s.n), || format!("stage {}: ε schedule", s.n))?;
        ensure(s.extension.approximation.iter().all(|d| *d < s.epsilon), || format!("stage {}: density proxy", s.n))?;
    }
    let audit = audit_chain(&bundle).map_err(|e| e.to_string())?;
    let orders: Vec<usize> = bundle.stages.iter().map(|s| s.result.order).collect();
    Ok(format!(
        "orders {orders:?}, m_n {:?}, {} coherence and {} isometry checks, byte-identical rerun and resume, {:.1}s",
        bundle.stages.iter().map(|s| s.m_n).collect::<Vec<_>>(),
        audit.coherence,
        audit.isometric_embedding,
        elapsed.as_secs_f64()
    ))
}

/// Sup of `d(A, B)` over disjoint `A`, `B` with masses at least `need` (integer units).
fn separation_oracle(d: &[Vec<i64>], w: &[i64], need: i64) -> i64 {
    fn go(p: usize, d: &[Vec<i64>], w: &[i64], need: i64, side: &mut Vec<u8>, mass: [i64; 2], cur: i64, best: &mut i64) {
        if p == w.len() {
            if mass[0] >= need && mass[1] >= need {
                *best = (*best).max(cur);
            }
            return;
        }
        side.push(2);
        go(p + 1, d, w, need, side, mass, cur, best);
        side.pop();
        for s in 0..2u8 {
            let other = 1 - s;
            let gap = (0..p).filter(|&q| side[q] == other).map(|q| d[p][q]).min().unwrap_or(i64::MAX);
            let mut m = mass;
            m[s as usize] += w[p];
            side.push(s);
            go(p + 1, d, w, need, side, m, cur.min(gap), best);
            side.pop();
        }
    }
    let mut best = 0;
    go(0, d, w, need, &mut Vec::new(), [0, 0], i64::MAX, &mut best);
    best
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let kappas = [r(1, 5), r(1, 4), r(1, 3), r(2, 5), r(1, 2)];
    let count = 55;
    let mut nonzero = 0;
    for inst in 0..count {
        let n = 2 + inst % 11;
        let den = 6i64;
        let mut graph = WeightedGraph::new((0..n).map(|i| format!("p{i}")).collect());
        for a in 0..n {
            for b in (a + 1)..n {
                graph.add_edge(a, b, r(rng.gen_range(1..=12), den as i128));
            }
        }
        let space = path_metric(&graph).map_err(|e| e.to_string())?;
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
        let total: i64 = raw.iter().sum();
        let weights = raw.iter().map(|&x| r(x as i128, total as i128)).collect();
        let mm = MMSpace::new(space.clone(), weights).map_err(|e| e.to_string())?;
        let kappa = kappas[rng.gen_range(0..kappas.len())];
        let got = separation_distance(&mm, kappa, kappa, 16).map_err(|e| e.to_string())?;
        let need = (kappa * Rational::from(total as i128)).ceil() as i64;
        let d: Vec<Vec<i64>> = (0..n)
            .map(|a| (0..n).map(|b| (space.dist(a, b) * Rational::from(den as i128)).numer() as i64).collect())
            .collect();
        let expected = r(separation_oracle(&d, &raw, need) as i128, den as i128);
        ensure(got == expected, || format!("instance {inst} ({n} points, κ = {kappa}): Sep = {got}, oracle {expected}"))?;
        if got.is_positive() {
            nonzero += 1;
        }
    }
    Ok(format!("{count} random mm-spaces of 2 to 12 points agree with the two-subset oracle ({nonzero} with positive separation)"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 maximality of the bounded invariant metric", criterion_1),
        ("2 quotient metric is the largest 1-Lipschitz one", criterion_2),
        ("3 V-isometry gate and coarsened counterexample", criterion_3),
        ("4 action extension end to end", criterion_4),
        ("5 Hamming cube concentration bound", criterion_5),
        ("6 neighbourhood mass trend", criterion_6),
        ("7 two-stage chain, deterministic rerun", criterion_7),
        ("8 separation distance against the oracle", criterion_8),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} [{secs:.1}s]: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} [{secs:.1}s]: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
