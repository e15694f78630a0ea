//! Random instances and brute-force oracles shared by the property tests and
//! the acceptance run.

#![allow(dead_code)]

use geomorph_core::{
    apply_rotation, build_phi, competition, delta_step, max_rows, select_pair, CompositionInventory, ExponentMatrix,
    FeatureSystem, Labeled, PhiMatrix, PlaneRotation, RotationPlan, TotalParadigmMatrix, TrainConfig,
    UpdateSchedule,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Up to 4 features of up to 4 values, all cells, every morpheme used.
pub fn random_paradigm(rng: &mut ChaCha8Rng) -> (PhiMatrix, TotalParadigmMatrix) {
    let features = rng.random_range(1..=4);
    let decls: Vec<(String, Vec<String>)> = (0..features)
        .map(|f| (format!("f{f}"), (0..rng.random_range(2..=4)).map(|v| format!("v{f}_{v}")).collect()))
        .collect();
    let fs = FeatureSystem::new(decls).unwrap();
    let cells = fs.full_product();
    let phi = build_phi(&fs, &cells).unwrap();
    let m = rng.random_range(1..=4usize).min(cells.len());
    let mut winners: Vec<Option<usize>> = (0..cells.len()).map(|_| Some(rng.random_range(0..m))).collect();
    // make sure no morpheme is left without a cell
    for j in 0..m {
        let i = rng.random_range(0..cells.len());
        if !winners.contains(&Some(j)) {
            winners[i] = Some(j);
        }
    }
    let morphemes: Vec<String> = (0..m).map(|j| format!("m{j}")).collect();
    let used: Vec<usize> = (0..m).filter(|j| winners.contains(&Some(*j))).collect();
    let morphemes: Vec<String> = used.iter().map(|&j| morphemes[j].clone()).collect();
    let winners = winners.into_iter().map(|w| w.map(|w| used.iter().position(|&u| u == w).unwrap())).collect();
    let gold = TotalParadigmMatrix::new(phi.labels().to_vec(), morphemes, winners);
    (phi, gold)
}

/// Value-by-morpheme counts from the cells, each column scaled to unit length.
pub fn brute_force_init(phi: &PhiMatrix, gold: &TotalParadigmMatrix) -> Vec<Vec<f64>> {
    let mut cols = vec![vec![0.0; phi.cols()]; gold.morphemes().len()];
    for (cell, w) in phi.cells().iter().zip(gold.winners()) {
        for &v in cell.coords() {
            cols[w.unwrap()][v] += 1.0;
        }
    }
    for c in &mut cols {
        let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= n);
    }
    cols
}

fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn random_b(rng: &mut ChaCha8Rng, dim: usize, labels: &[String]) -> ExponentMatrix {
    let cols: Vec<f64> = labels.iter().flat_map(|_| unit_vector(rng, dim)).collect();
    ExponentMatrix::new(labels.to_vec(), DMatrix::from_column_slice(dim, labels.len(), &cols)).unwrap()
}

pub fn random_plan(rng: &mut ChaCha8Rng, dim: usize, steps: usize) -> RotationPlan {
    let rotations = (0..steps)
        .map(|_| {
            let i = rng.random_range(0..dim);
            let j = (i + rng.random_range(1..dim)) % dim;
            PlaneRotation { i, j, theta: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI) }
        })
        .collect();
    RotationPlan { class: "random".into(), rotations }
}

pub fn random_inventory(rng: &mut ChaCha8Rng) -> (CompositionInventory, Vec<f64>) {
    let dim = rng.random_range(2..=5);
    let labeled = |prefix: &str, n: usize, rng: &mut ChaCha8Rng| -> Vec<Labeled> {
        (0..n)
            .map(|k| Labeled {
                label: format!("{prefix}{k}"),
                vector: (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            })
            .collect()
    };
    let (ns, na) = (rng.random_range(1..=4), rng.random_range(1..=5));
    let stems = labeled("s", ns, rng);
    let affixes = labeled("a", na, rng);
    let corner = (0..dim).map(|_| f64::from(rng.random_range(0..=1u8))).collect();
    (CompositionInventory { stems, affixes, gold_forms: Vec::new() }, corner)
}

/// Index pair with the smallest squared distance; `None` on an exact tie.
pub fn exhaustive_pair(inv: &CompositionInventory, corner: &[f64]) -> Option<(String, String)> {
    let mut best = f64::INFINITY;
    let mut hits = Vec::new();
    for s in &inv.stems {
        for a in &inv.affixes {
            let d: f64 = corner.iter().zip(&s.vector).zip(&a.vector).map(|((m, x), y)| (m - x - y).powi(2)).sum();
            if d < best {
                best = d;
                hits = vec![(s.label.clone(), a.label.clone())];
            } else if d == best {
                hits.push((s.label.clone(), a.label.clone()));
            }
        }
    }
    if hits.len() == 1 { hits.pop() } else { None }
}

/// Largest deviation from unit length after each delta step and each rotation.
pub fn norm_drift(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (phi, gold) = random_paradigm(&mut r);
    let mut b = random_b(&mut r, phi.cols(), gold.morphemes());
    let mut worst: f64 = 0.0;
    for schedule in [UpdateSchedule::Online, UpdateSchedule::Batch] {
        let cfg = TrainConfig { eta: r.random_range(0.01..0.5), error_driven: false, schedule, ..TrainConfig::default() };
        for _ in 0..5 {
            b = delta_step(&b, &phi, &gold, &cfg).unwrap().0;
            worst = worst.max(b.max_norm_drift());
        }
    }
    if phi.cols() >= 2 {
        for _ in 0..5 {
            b = apply_rotation(&b, &random_plan(&mut r, phi.cols(), 3)).unwrap();
            worst = worst.max(b.max_norm_drift());
        }
    }
    worst
}

/// Largest change in the Gram matrix under a random rotation plan.
pub fn gram_drift(seed: u64) -> f64 {
    let mut r = rng(seed);
    let dim = r.random_range(2..=8);
    let m = r.random_range(1..=6);
    let labels: Vec<String> = (0..m).map(|j| format!("m{j}")).collect();
    let b = random_b(&mut r, dim, &labels);
    let steps = r.random_range(1..=40);
    let rotated = apply_rotation(&b, &random_plan(&mut r, dim, steps)).unwrap();
    (rotated.gram() - b.gram()).abs().max()
}

/// True when positive row scaling of Φ leaves every clear winner in place.
pub fn argmax_scale_invariant(seed: u64) -> bool {
    let mut r = rng(seed);
    let (phi, gold) = random_paradigm(&mut r);
    let b = random_b(&mut r, phi.cols(), gold.morphemes());
    let before = competition(&phi, &b).unwrap();
    let sel = max_rows(&before);
    let mut scaled = phi.clone();
    for i in 0..phi.rows() {
        scaled.scale_row(i, r.random_range(0.01..100.0));
    }
    let after = max_rows(&competition(&scaled, &b).unwrap());
    (0..phi.rows()).all(|i| {
        let mut row = before.row(i);
        row.sort_by(|x, y| y.total_cmp(x));
        let clear = row.len() < 2 || row[0] - row[1] > 1e-9;
        !clear || sel.tpm.winners()[i] == after.tpm.winners()[i]
    })
}

/// Largest difference between smart_init and the counting oracle.
pub fn init_vs_oracle(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (phi, gold) = random_paradigm(&mut r);
    let b = geomorph_core::smart_init(&phi, &gold, None).unwrap();
    let oracle = brute_force_init(&phi, &gold);
    let mut worst: f64 = 0.0;
    for (j, col) in oracle.iter().enumerate() {
        for (v, x) in col.iter().enumerate() {
            worst = worst.max((b.get(v, j) - x).abs());
        }
    }
    worst
}

pub fn pair_matches_oracle(seed: u64) -> bool {
    let mut r = rng(seed);
    let (inv, corner) = random_inventory(&mut r);
    select_pair(&inv, &corner).unwrap().best == exhaustive_pair(&inv, &corner)
}

/// Largest gap between the delta step's direction on a one-cell paradigm and
/// the negative finite-difference gradient of ½ Σ_j (t_j − a_j)², both taken
/// in the tangent space of the unit sphere.
pub fn delta_vs_gradient(seed: u64) -> f64 {
    let mut r = rng(seed);
    let (full_phi, gold) = random_paradigm(&mut r);
    let i = r.random_range(0..full_phi.rows());
    let fs = full_phi.feature_system().clone();
    let phi = build_phi(&fs, &full_phi.cells()[i..=i]).unwrap();
    let m = gold.morphemes().len();
    let one = TotalParadigmMatrix::new(phi.labels().to_vec(), gold.morphemes().to_vec(), vec![gold.winners()[i]]);
    let b = random_b(&mut r, phi.cols(), gold.morphemes());
    let eta = 1e-6;
    let step = |eta: f64| {
        let cfg = TrainConfig { eta, error_driven: false, ..TrainConfig::default() };
        delta_step(&b, &phi, &one, &cfg).unwrap().0
    };
    // a step forward and one back cancel the second-order term
    let (ahead, behind) = (step(eta), step(-eta));
    let corner = phi.row(0);
    let loss = |cols: &DMatrix<f64>| -> f64 {
        (0..m)
            .map(|j| {
                let a: f64 = corner.iter().zip(cols.column(j).iter()).map(|(x, y)| x * y).sum();
                0.5 * (one.target(0, j) - a).powi(2)
            })
            .sum()
    };
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for j in 0..m {
        let mu = b.column(j);
        let mut grad = vec![0.0; phi.cols()];
        for (v, g) in grad.iter_mut().enumerate() {
            let mut plus = b.columns().clone();
            let mut minus = b.columns().clone();
            plus[(v, j)] += h;
            minus[(v, j)] -= h;
            *g = -(loss(&plus) - loss(&minus)) / (2.0 * h);
        }
        let along: f64 = grad.iter().zip(&mu).map(|(g, x)| g * x).sum();
        for v in 0..phi.cols() {
            let tangent = grad[v] - along * mu[v];
            let moved = (ahead.get(v, j) - behind.get(v, j)) / (2.0 * eta);
            worst = worst.max((moved - tangent).abs());
        }
    }
    worst
}
