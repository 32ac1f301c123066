//! Pointwise exterior algebra: wedge, interior product, background Hodge star,
//! self-dual/anti-self-dual split and integration.
//!
//! All sign bookkeeping is table driven. Tables are generated once from the
//! lexicographic multi-index enumeration, never written by hand.

use super::{Grid4, KForm, VectorField};
use crate::error::{Error, Result};
use crate::par;
use once_cell::sync::Lazy;

/// Components per degree: C(4,k).
pub const COMP_COUNT: [usize; 5] = [1, 4, 6, 4, 1];

/// Sorted multi-indices (0-based axes) of degree k, lexicographic.
fn multi_indices(k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(prefix.clone());
            return;
        }
        for a in start..=(4 - k) {
            prefix.push(a);
            rec(a + 1, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, &mut Vec::new(), &mut out);
    out
}

fn position(k: usize, idx: &[usize]) -> usize {
    multi_indices(k).iter().position(|m| m == idx).unwrap()
}

/// Sign of merging sorted disjoint I and J; None if they overlap.
fn merge_sign(i: &[usize], j: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut inversions = 0;
    for &a in i {
        for &b in j {
            if a == b {
                return None;
            }
            if b < a {
                inversions += 1;
            }
        }
    }
    let mut merged: Vec<usize> = i.iter().chain(j.iter()).copied().collect();
    merged.sort_unstable();
    Some((merged, if inversions % 2 == 0 { 1.0 } else { -1.0 }))
}

struct WedgeEntry {
    out: usize,
    a: usize,
    b: usize,
    sign: f64,
}

struct AxisEntry {
    out: usize,
    axis: usize,
    input: usize,
    sign: f64,
}

struct StarEntry {
    out: usize,
    sign: f64,
}

struct Tables {
    /// wedge[p][q] for p + q <= 4
    wedge: Vec<Vec<Vec<WedgeEntry>>>,
    /// interior[k] for k >= 1: contraction entries
    interior: Vec<Vec<AxisEntry>>,
    /// d[k] for k <= 3: derivative entries
    d: Vec<Vec<AxisEntry>>,
    /// star[k][comp] -> (complement comp, sign)
    star: Vec<Vec<StarEntry>>,
}

static TABLES: Lazy<Tables> = Lazy::new(|| {
    let mut wedge = Vec::new();
    for p in 0..=4usize {
        let mut row = Vec::new();
        for q in 0..=4usize {
            let mut entries = Vec::new();
            if p + q <= 4 {
                for (ia, mi) in multi_indices(p).iter().enumerate() {
                    for (ib, mj) in multi_indices(q).iter().enumerate() {
                        if let Some((merged, sign)) = merge_sign(mi, mj) {
                            entries.push(WedgeEntry {
                                out: position(p + q, &merged),
                                a: ia,
                                b: ib,
                                sign,
                            });
                        }
                    }
                }
            }
            row.push(entries);
        }
        wedge.push(row);
    }

    let mut interior = Vec::new();
    for k in 0..=4usize {
        let mut entries = Vec::new();
        if k >= 1 {
            for (ii, mi) in multi_indices(k).iter().enumerate() {
                for (r, &axis) in mi.iter().enumerate() {
                    let mut rest = mi.clone();
                    rest.remove(r);
                    entries.push(AxisEntry {
                        out: position(k - 1, &rest),
                        axis,
                        input: ii,
                        sign: if r % 2 == 0 { 1.0 } else { -1.0 },
                    });
                }
            }
        }
        interior.push(entries);
    }

    let mut d = Vec::new();
    for k in 0..=4usize {
        let mut entries = Vec::new();
        if k <= 3 {
            for (ii, mi) in multi_indices(k).iter().enumerate() {
                for axis in 0..4 {
                    if let Some((merged, sign)) = merge_sign(&[axis], mi) {
                        entries.push(AxisEntry {
                            out: position(k + 1, &merged),
                            axis,
                            input: ii,
                            sign,
                        });
                    }
                }
            }
        }
        d.push(entries);
    }

    let mut star = Vec::new();
    for k in 0..=4usize {
        let mut entries = Vec::new();
        for mi in multi_indices(k).iter() {
            let comp: Vec<usize> = (0..4).filter(|a| !mi.contains(a)).collect();
            let (_, sign) = merge_sign(mi, &comp).expect("complement is disjoint");
            entries.push(StarEntry {
                out: position(4 - k, &comp),
                sign,
            });
        }
        star.push(entries);
    }

    Tables {
        wedge,
        interior,
        d,
        star,
    }
});

pub(crate) fn d_entries(k: usize) -> impl Iterator<Item = (usize, usize, usize, f64)> {
    TABLES.d[k]
        .iter()
        .map(|e| (e.out, e.axis, e.input, e.sign))
}

/// Wedge of two coefficient vectors at a single point.
pub(crate) fn wedge_point(p: usize, q: usize, a: &[f64], b: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for e in &TABLES.wedge[p][q] {
        out[e.out] += e.sign * a[e.a] * b[e.b];
    }
}

/// Background star of a coefficient vector at a single point.
pub(crate) fn star_point(k: usize, a: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (c, e) in TABLES.star[k].iter().enumerate() {
        out[e.out] = e.sign * a[c];
    }
}

/// Contraction iota(x) at a single point.
pub(crate) fn interior_point(k: usize, x: &[f64; 4], a: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for e in &TABLES.interior[k] {
        out[e.out] += e.sign * x[e.axis] * a[e.input];
    }
}

/// Exterior product a ^ b, pointwise with lexicographic sign bookkeeping.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    if a.degree() + b.degree() > 4 {
        return Err(Error::DegreeOverflow);
    }
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(a.grid().n(), b.grid().n()));
    }
    let mut out = KForm::zeros(a.grid(), a.degree() + b.degree());
    let np = a.grid().points();
    for e in &TABLES.wedge[a.degree()][b.degree()] {
        let dst = &mut out.data_mut()[e.out * np..(e.out + 1) * np];
        par::fma_pointwise(dst, e.sign, a.comp(e.a), b.comp(e.b));
    }
    Ok(out)
}

/// Interior product iota(X) a (contraction in the first slot).
pub fn interior(x: &VectorField, a: &KForm) -> Result<KForm> {
    if a.degree() == 0 {
        return Err(Error::InvalidDegree {
            op: "interior",
            degree: 0,
        });
    }
    if a.grid() != x.grid() {
        return Err(Error::GridMismatch(a.grid().n(), x.grid().n()));
    }
    let mut out = KForm::zeros(a.grid(), a.degree() - 1);
    let np = a.grid().points();
    for e in &TABLES.interior[a.degree()] {
        let dst = &mut out.data_mut()[e.out * np..(e.out + 1) * np];
        par::fma_pointwise(dst, e.sign, x.comp(e.axis), a.comp(e.input));
    }
    Ok(out)
}

/// Hodge star of the Euclidean background metric and standard orientation.
pub fn star_background(a: &KForm) -> KForm {
    let mut out = KForm::zeros(a.grid(), 4 - a.degree());
    let np = a.grid().points();
    for (c, e) in TABLES.star[a.degree()].iter().enumerate() {
        let src = a.comp(c);
        let dst = &mut out.data_mut()[e.out * np..(e.out + 1) * np];
        par::fill_chunks(dst, |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = e.sign * src[off + j];
            }
        });
    }
    out
}

/// Split a 2-form into self-dual and anti-self-dual parts (w +- *w)/2.
pub fn sd_split(w: &KForm) -> (KForm, KForm) {
    assert_eq!(w.degree(), 2, "sd_split expects a 2-form");
    let sw = star_background(w);
    let mut plus = w.clone();
    plus.axpy(1.0, &sw);
    let mut minus = w.clone();
    minus.axpy(-1.0, &sw);
    (plus.scaled(0.5), minus.scaled(0.5))
}

/// Pointwise squared norm |a|^2 under the background metric (degree-0 field).
pub fn norm_sq_pointwise(a: &KForm) -> KForm {
    let np = a.grid().points();
    let mut out = KForm::zeros(a.grid(), 0);
    for c in 0..a.n_comps() {
        let dst = &mut out.data_mut()[0..np];
        par::fma_pointwise(dst, 1.0, a.comp(c), a.comp(c));
    }
    out
}

/// Integral of a 4-form over the unit-volume torus (spectral/trapezoid rule).
pub fn integrate(a: &KForm) -> f64 {
    assert_eq!(a.degree(), 4, "integrate expects a 4-form");
    par::sum(a.comp(0)) / a.grid().points() as f64
}

/// Mean of each component: the harmonic projection on the flat torus.
pub fn component_means(a: &KForm) -> Vec<f64> {
    let np = a.grid().points() as f64;
    (0..a.n_comps()).map(|c| par::sum(a.comp(c)) / np).collect()
}

/// Basis 1-form dx^axis (0-based axis).
pub fn basis_one_form(grid: Grid4, axis: usize) -> KForm {
    let mut comps = [0.0; 4];
    comps[axis] = 1.0;
    KForm::constant(grid, 1, &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields4::{dvol, omega_std};
    use approx::assert_abs_diff_eq;

    fn grid() -> Grid4 {
        Grid4::new(4).unwrap()
    }

    #[test]
    fn wedge_of_basis_one_forms() {
        let dx1 = basis_one_form(grid(), 0);
        let dx2 = basis_one_form(grid(), 1);
        let w = wedge(&dx1, &dx2).unwrap();
        assert_eq!(w.degree(), 2);
        assert_abs_diff_eq!(w.at(0)[0], 1.0); // component 12
        for c in 1..6 {
            assert_abs_diff_eq!(w.at(0)[c], 0.0);
        }
        // antisymmetry
        let wr = wedge(&dx2, &dx1).unwrap();
        assert_abs_diff_eq!(wr.at(0)[0], -1.0);
    }

    #[test]
    fn omega_std_squares_to_twice_dvol() {
        let w = omega_std(grid());
        let ww = wedge(&w, &w).unwrap();
        assert_abs_diff_eq!(ww.at(0)[0], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(integrate(&ww), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn orthogonal_hyperkahler_pair_wedges_to_zero() {
        // omega_1 ^ omega_2 with omega_2 = dx1^dx3 + dx4^dx2, expanded by brute
        // force over all 6x6 component pairs at a point.
        let w1 = omega_std(grid());
        let w2 = KForm::constant(grid(), 2, &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0]);
        let w = wedge(&w1, &w2).unwrap();
        assert_abs_diff_eq!(w.linf(), 0.0, epsilon = 1e-15);

        // brute-force oracle at one point: sum over pairs with sign of the
        // permutation joining the two multi-indices
        let pairs = [(0usize, 1usize), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        let a = w1.at(0);
        let b = w2.at(0);
        let mut total = 0.0;
        for (ia, (i0, i1)) in pairs.iter().enumerate() {
            for (ib, (j0, j1)) in pairs.iter().enumerate() {
                let set = [*i0, *i1, *j0, *j1];
                let mut sorted = set;
                sorted.sort_unstable();
                if sorted != [0, 1, 2, 3] {
                    continue;
                }
                // count inversions of the concatenation
                let mut inv = 0;
                for p in 0..4 {
                    for q in (p + 1)..4 {
                        if set[p] > set[q] {
                            inv += 1;
                        }
                    }
                }
                let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * a[ia] * b[ib];
            }
        }
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn wedge_rejects_degree_overflow() {
        let v = dvol(grid());
        let f = basis_one_form(grid(), 0);
        assert!(matches!(wedge(&v, &f), Err(Error::DegreeOverflow)));
    }

    #[test]
    fn interior_basis_cases() {
        let mut x = VectorField::zeros(grid());
        x.comp_mut(0).fill(1.0); // d/dx1
        let dx12 = wedge(&basis_one_form(grid(), 0), &basis_one_form(grid(), 1)).unwrap();
        let r = interior(&x, &dx12).unwrap();
        assert_abs_diff_eq!(r.at(0)[1], 1.0); // dx2
        assert_abs_diff_eq!(r.at(0)[0], 0.0);

        let r2 = interior(&x, &omega_std(grid())).unwrap();
        // iota(d/dx1)(dx1^dx2 + dx3^dx4) = dx2
        assert_abs_diff_eq!(r2.at(0)[1], 1.0);
        assert_abs_diff_eq!(r2.at(0)[0], 0.0);
        assert_abs_diff_eq!(r2.at(0)[2], 0.0);
        assert_abs_diff_eq!(r2.at(0)[3], 0.0);
    }

    #[test]
    fn interior_rejects_degree_zero() {
        let x = VectorField::zeros(grid());
        let f = KForm::zeros(grid(), 0);
        assert!(interior(&x, &f).is_err());
    }

    #[test]
    fn interior_squares_to_zero() {
        let g = Grid4::new(4).unwrap();
        let x = VectorField::from_fn(g, |p, c| ((c + 1) as f64) * (p[0] - 0.3) + p[c]);
        let a = KForm::from_fn(g, 3, |p, c| p[(c + 1) % 4] + 0.5 * (c as f64));
        let once = interior(&x, &a).unwrap();
        let twice = interior(&x, &once).unwrap();
        assert_abs_diff_eq!(twice.linf(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn star_identities() {
        let g = grid();
        assert_abs_diff_eq!(star_background(&dvol(g)).at(0)[0], 1.0);
        // omega_std is self-dual
        let w = omega_std(g);
        let sw = star_background(&w);
        assert_abs_diff_eq!((&sw - &w).linf(), 0.0, epsilon = 1e-15);

        // ** = (-1)^{k(4-k)}: +id on even degrees, -id on odd degrees
        for k in 0..=4usize {
            let a = KForm::from_fn(g, k, |p, c| (p[c % 4] - 0.2) * (1.0 + c as f64));
            let ssa = star_background(&star_background(&a));
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!((&ssa - &a.scaled(sign)).linf(), 0.0, epsilon = 1e-14);
        }

        // a ^ *a = |a|^2 dvol pointwise on every degree
        for k in 0..=4usize {
            let a = KForm::from_fn(g, k, |p, c| p[(c + 1) % 4] + 0.3 * c as f64 - 0.1);
            let asa = wedge(&a, &star_background(&a)).unwrap();
            let nsq = norm_sq_pointwise(&a);
            for idx in [0usize, 5, 123] {
                assert_abs_diff_eq!(asa.at(idx)[0], nsq.at(idx)[0], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn sd_split_examples() {
        let g = grid();
        let w = omega_std(g);
        let (p, m) = sd_split(&w);
        assert_abs_diff_eq!((&p - &w).linf(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.linf(), 0.0, epsilon = 1e-15);

        let anti = KForm::constant(g, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        let (p2, m2) = sd_split(&anti);
        assert_abs_diff_eq!(p2.linf(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((&m2 - &anti).linf(), 0.0, epsilon = 1e-15);

        // reconstruction and norm split for a generic 2-form
        let w3 = KForm::from_fn(g, 2, |p, c| p[c % 4] - 0.1 * c as f64);
        let (wp, wm) = sd_split(&w3);
        let sum = &wp + &wm;
        assert_abs_diff_eq!((&sum - &w3).linf(), 0.0, epsilon = 1e-14);
        let total = norm_sq_pointwise(&w3);
        let mut split = norm_sq_pointwise(&wp);
        split.axpy(1.0, &norm_sq_pointwise(&wm));
        assert_abs_diff_eq!((&split - &total).linf(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn integrate_examples() {
        let g = Grid4::new(8).unwrap();
        assert_abs_diff_eq!(integrate(&dvol(g)), 1.0, epsilon = 1e-15);
        let mut f = KForm::zeros(g, 4);
        f.add_mode(0, [1, 0, 0, 0], 1.0, 0.0);
        assert_abs_diff_eq!(integrate(&f), 0.0, epsilon = 1e-15);
    }
}
