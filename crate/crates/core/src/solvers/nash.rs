//! Support enumeration for two-player games.
//!
//! For each pair of equal-size supports the indifference conditions form a
//! square linear system per player. Solutions that are nonnegative and admit
//! no profitable pure deviation are equilibria. Strictly dominated
//! strategies are removed first, which leaves the equilibrium set unchanged.
//! Large games where enumeration runs past its budget are handed to
//! Lemke-Howson.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::{MixedProfile, RestrictedNormalForm, SolverError};

struct Bimatrix {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl Bimatrix {
    fn from_rnf(g: &RestrictedNormalForm) -> Result<Self, SolverError> {
        if g.num_players() != 2 {
            return Err(SolverError::TooManyPlayers(g.num_players()));
        }
        for (j, &s) in g.sizes().iter().enumerate() {
            if s == 0 {
                return Err(SolverError::EmptySet(j + 1));
            }
        }
        let (m, n) = (g.sizes()[0], g.sizes()[1]);
        let mut a = vec![vec![0.0; n]; m];
        let mut b = vec![vec![0.0; n]; m];
        for i in 0..m {
            for j in 0..n {
                let u = g.payoff(&[i, j]);
                a[i][j] = u[0];
                b[i][j] = u[1];
            }
        }
        Ok(Bimatrix { a, b })
    }

    fn scale(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .flatten()
            .fold(0.0f64, |s, x| s.max(x.abs()))
    }

    fn sub(&self, rows: &[usize], cols: &[usize]) -> Bimatrix {
        let pick = |m: &Vec<Vec<f64>>| {
            rows.iter()
                .map(|&i| cols.iter().map(|&j| m[i][j]).collect())
                .collect()
        };
        Bimatrix {
            a: pick(&self.a),
            b: pick(&self.b),
        }
    }
}

/// Indices surviving iterated elimination of strictly dominated pure strategies.
fn undominated(g: &Bimatrix) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..g.a.len()).collect();
    let mut cols: Vec<usize> = (0..g.a[0].len()).collect();
    loop {
        let before = rows.len() + cols.len();
        let r0 = rows.clone();
        rows.retain(|&i| {
            !r0.iter()
                .any(|&k| k != i && cols.iter().all(|&j| g.a[k][j] > g.a[i][j]))
        });
        let c0 = cols.clone();
        cols.retain(|&j| {
            !c0.iter()
                .any(|&k| k != j && rows.iter().all(|&i| g.b[i][k] > g.b[i][j]))
        });
        if rows.len() + cols.len() == before {
            return (rows, cols);
        }
    }
}

/// Solves `sum_j m[i][j] z_j = v` for `i` in `eq`, `sum z = 1`, over `vars`.
fn indifference(m: &[Vec<f64>], eq: &[usize], vars: &[usize], transpose: bool) -> Option<Vec<f64>> {
    let k = vars.len();
    let mut mat = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut rhs = DVector::<f64>::zeros(k + 1);
    for (r, &i) in eq.iter().enumerate() {
        for (c, &j) in vars.iter().enumerate() {
            mat[(r, c)] = if transpose { m[j][i] } else { m[i][j] };
        }
        mat[(r, k)] = -1.0;
    }
    for c in 0..k {
        mat[(k, c)] = 1.0;
    }
    rhs[k] = 1.0;
    let z = mat.lu().solve(&rhs)?;
    if z.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some(z.iter().take(k).copied().collect())
}

fn spread(weights: &[f64], support: &[usize], n: usize) -> Option<Vec<f64>> {
    let tol = 1e-12;
    if weights.iter().any(|&w| w < -tol) {
        return None;
    }
    let mut out = vec![0.0; n];
    for (&i, &w) in support.iter().zip(weights) {
        out[i] = w.max(0.0);
    }
    let s: f64 = out.iter().sum();
    if s <= 0.0 {
        return None;
    }
    out.iter_mut().for_each(|w| *w /= s);
    Some(out)
}

fn is_equilibrium(g: &Bimatrix, x: &[f64], y: &[f64], tol: f64) -> bool {
    let ay: Vec<f64> = g.a.iter().map(|r| r.iter().zip(y).map(|(a, b)| a * b).sum()).collect();
    let u: f64 = ay.iter().zip(x).map(|(a, b)| a * b).sum();
    let n = y.len();
    let xb: Vec<f64> = (0..n).map(|j| g.b.iter().zip(x).map(|(r, w)| r[j] * w).sum()).collect();
    let v: f64 = xb.iter().zip(y).map(|(a, b)| a * b).sum();
    ay.iter().all(|&d| d <= u + tol) && xb.iter().all(|&d| d <= v + tol)
}

/// Enumerates equilibria support pair by support pair: smaller supports
/// first, then lexicographic row support, then lexicographic column support.
/// `visit` returns false to stop. At most `budget` row and column supports
/// are examined; returns false when the budget ran out.
fn enumerate<F: FnMut(MixedProfile) -> bool>(g: &Bimatrix, budget: u64, mut visit: F) -> bool {
    let mut spent = 0u64;
    let (m, n) = (g.a.len(), g.a[0].len());
    let tol = 1e-10 * (1.0 + g.scale());
    // a support never holds an action strictly dominated against the
    // opponent's support
    let col_ok = |j: usize, rows: &[usize]| !(0..n).any(|k| rows.iter().all(|&i| g.b[i][k] > g.b[i][j]));
    let row_ok = |i: usize, cols: &[usize]| !(0..m).any(|k| cols.iter().all(|&j| g.a[k][j] > g.a[i][j]));
    for k in 1..=m.min(n) {
        for rows in (0..m).combinations(k) {
            spent += 1;
            if spent > budget {
                return false;
            }
            let cand: Vec<usize> = (0..n).filter(|&j| col_ok(j, &rows)).collect();
            if cand.len() < k {
                continue;
            }
            for cols in cand.into_iter().combinations(k) {
                spent += 1;
                if spent > budget {
                    return false;
                }
                if !rows.iter().all(|&i| row_ok(i, &cols)) {
                    continue;
                }
                // column weights make the row player indifferent over rows
                let Some(y) = indifference(&g.a, &rows, &cols, false) else { continue };
                let Some(y) = spread(&y, &cols, n) else { continue };
                let Some(x) = indifference(&g.b, &cols, &rows, true) else { continue };
                let Some(x) = spread(&x, &rows, m) else { continue };
                if is_equilibrium(g, &x, &y, tol) && !visit(vec![x, y]) {
                    return true;
                }
            }
        }
    }
    true
}

fn embed(mix: MixedProfile, rows: &[usize], cols: &[usize], m: usize, n: usize) -> MixedProfile {
    let mut x = vec![0.0; m];
    let mut y = vec![0.0; n];
    for (&i, w) in rows.iter().zip(&mix[0]) {
        x[i] = *w;
    }
    for (&j, w) in cols.iter().zip(&mix[1]) {
        y[j] = *w;
    }
    vec![x, y]
}

/// Every equilibrium reachable by equal-size support enumeration, in
/// enumeration order. Exhaustive, so exponential in the set sizes.
pub fn all_equilibria(g: &RestrictedNormalForm) -> Result<Vec<MixedProfile>, SolverError> {
    let full = Bimatrix::from_rnf(g)?;
    let (rows, cols) = undominated(&full);
    let reduced = full.sub(&rows, &cols);
    let (m, n) = (full.a.len(), full.a[0].len());
    let mut out = Vec::new();
    enumerate(&reduced, u64::MAX, |mix| {
        out.push(embed(mix, &rows, &cols, m, n));
        true
    });
    Ok(out)
}

/// Same as [`all_equilibria`].
pub fn nash_support_enumeration(g: &RestrictedNormalForm) -> Result<Vec<MixedProfile>, SolverError> {
    all_equilibria(g)
}

/// Support candidates examined before [`select_equilibrium`] switches to
/// complementary pivoting.
pub const ENUMERATION_BUDGET: u64 = 200_000;

/// First equilibrium in enumeration order. When the enumeration budget runs
/// out, or the game is degenerate so that no equal-size support pair yields
/// an equilibrium, the first equilibrium found by Lemke-Howson (trying
/// dropped labels in order) is returned instead. As a last resort the
/// payoffs get a tiny deterministic perturbation and the result is an
/// approximate equilibrium.
pub fn select_equilibrium(g: &RestrictedNormalForm) -> Result<MixedProfile, SolverError> {
    let full = Bimatrix::from_rnf(g)?;
    let (rows, cols) = undominated(&full);
    let (m, n) = (full.a.len(), full.a[0].len());
    let reduced = full.sub(&rows, &cols);
    let mut found = None;
    enumerate(&reduced, ENUMERATION_BUDGET, |mix| {
        found = Some(mix);
        false
    });
    if let Some(mix) = found {
        return Ok(embed(mix, &rows, &cols, m, n));
    }
    let tol = 1e-9 * (1.0 + reduced.scale());
    let pivoting = |game: &Bimatrix| {
        let labels = game.a.len() + game.a[0].len();
        (0..labels).find_map(|k| {
            lemke_howson(&game.a, &game.b, k).filter(|mix| is_equilibrium(game, &mix[0], &mix[1], tol))
        })
    };
    if let Some(mix) = pivoting(&reduced) {
        return Ok(embed(mix, &rows, &cols, m, n));
    }
    let delta = 1e-9 * (1.0 + reduced.scale());
    let mut perturbed = reduced;
    for (i, row) in perturbed.a.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x += delta * bump(i, j, 0);
        }
    }
    for (i, row) in perturbed.b.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x += delta * bump(i, j, 1);
        }
    }
    pivoting(&perturbed)
        .map(|mix| embed(mix, &rows, &cols, m, n))
        .ok_or(SolverError::NoEquilibrium)
}

/// One tableau of the Lemke-Howson method. Columns are indexed by label:
/// rows' labels `0..m`, columns' labels `m..m+n`; the last column is the
/// right-hand side.
struct Tableau {
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Labels of the initial slack basis, used for lexicographic ties.
    slack: Vec<usize>,
}

impl Tableau {
    /// Enters `label`, returns the label that leaves.
    fn pivot(&mut self, label: usize) -> Option<usize> {
        let rhs = self.t[0].len() - 1;
        let mut best: Option<usize> = None;
        for r in 0..self.t.len() {
            let p = self.t[r][label];
            if p <= 1e-12 {
                continue;
            }
            best = match best {
                None => Some(r),
                Some(b) => {
                    let q = self.t[b][label];
                    let key = |row: usize, piv: f64, c: usize| self.t[row][c] / piv;
                    let cols = std::iter::once(rhs).chain(self.slack.iter().copied());
                    let mut pick = b;
                    for c in cols {
                        let (x, y) = (key(r, p, c), key(b, q, c));
                        if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                            if x < y {
                                pick = r;
                            }
                            break;
                        }
                    }
                    Some(pick)
                }
            };
        }
        let r = best?;
        let p = self.t[r][label];
        self.t[r].iter_mut().for_each(|x| *x /= p);
        let row = self.t[r].clone();
        for (k, other) in self.t.iter_mut().enumerate() {
            if k != r {
                let f = other[label];
                if f != 0.0 {
                    other.iter_mut().zip(&row).for_each(|(x, y)| *x -= f * y);
                }
            }
        }
        Some(std::mem::replace(&mut self.basis[r], label))
    }

    fn values(&self, labels: std::ops::Range<usize>) -> Vec<f64> {
        let rhs = self.t[0].len() - 1;
        let mut out: Vec<f64> = labels
            .clone()
            .map(|l| match self.basis.iter().position(|&b| b == l) {
                Some(r) => self.t[r][rhs].max(0.0),
                None => 0.0,
            })
            .collect();
        let s: f64 = out.iter().sum();
        if s > 0.0 {
            out.iter_mut().for_each(|x| *x /= s);
        }
        out
    }
}

/// Lemke-Howson from dropped label `k` with lexicographic ratio tests.
fn lemke_howson(a: &[Vec<f64>], b: &[Vec<f64>], k: usize) -> Option<MixedProfile> {
    let (m, n) = (a.len(), a[0].len());
    let shift = |mat: &[Vec<f64>]| {
        let lo = mat.iter().flatten().fold(f64::INFINITY, |s, &x| s.min(x));
        1.0 - lo.min(0.0)
    };
    let (sa, sb) = (shift(a), shift(b));
    // rows: constraints A y <= 1, variables r_i (label i) and y_j (label m+j)
    let mut ty = Tableau {
        t: (0..m)
            .map(|i| {
                let mut row = vec![0.0; m + n + 1];
                row[i] = 1.0;
                for j in 0..n {
                    row[m + j] = a[i][j] + sa;
                }
                row[m + n] = 1.0;
                row
            })
            .collect(),
        basis: (0..m).collect(),
        slack: (0..m).collect(),
    };
    // columns: constraints B^T x <= 1, variables x_i (label i) and s_j (label m+j)
    let mut tx = Tableau {
        t: (0..n)
            .map(|j| {
                let mut row = vec![0.0; m + n + 1];
                row[m + j] = 1.0;
                for i in 0..m {
                    row[i] = b[i][j] + sb;
                }
                row[m + n] = 1.0;
                row
            })
            .collect(),
        basis: (m..m + n).collect(),
        slack: (m..m + n).collect(),
    };
    let mut on_x = k < m;
    let mut entering = k;
    for _ in 0..10_000 {
        let leaving = if on_x { tx.pivot(entering)? } else { ty.pivot(entering)? };
        if leaving == k {
            return Some(vec![tx.values(0..m), ty.values(m..m + n)]);
        }
        entering = leaving;
        on_x = !on_x;
    }
    None
}

fn bump(i: usize, j: usize, p: usize) -> f64 {
    let h = crate::rng::derive_seed(0x5eed, &[i as u64, j as u64, p as u64]);
    (h >> 11) as f64 / (1u64 << 53) as f64
}
