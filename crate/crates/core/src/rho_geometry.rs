//! Pointwise geometry induced by a nondegenerate 2-form rho with rho^rho > 0:
//! the volume ratio u, the reflection R, the twisted Hodge stars on degrees
//! 1/2/3, the inverse of rho as a bilinear form, and the metric g^rho.
//!
//! Conventions: 2 u dvol = rho ^ rho, dvol_rho = u dvol (the normalization
//! under which R sends rho to -rho), and the twisted star on 1-forms is
//! rho ^ *(rho ^ lambda) / u.

use crate::error::{Error, Result};
use crate::fields4::{
    exterior_d, omega_std, star_background, wedge, Grid4, KForm, VectorField,
};
use crate::mat4::{self, Mat4};
use crate::par;
use std::sync::atomic::{AtomicU64, Ordering};

static NEXT_TOKEN: AtomicU64 = AtomicU64::new(1);

/// Validation thresholds for [`SymplecticState`] construction.
#[derive(Clone, Copy, Debug)]
pub struct StateOptions {
    /// Strict lower bound demanded of min u; the form is rejected below it.
    pub u_floor: f64,
    /// Infinity-norm tolerance on d rho.
    pub closed_tol: f64,
}

impl Default for StateOptions {
    fn default() -> Self {
        Self {
            u_floor: 1e-6,
            closed_tol: 1e-10,
        }
    }
}

/// The pointwise volume ratio defined by 2 u dvol = rho ^ rho.
///
/// Errors when min u <= 0: the form is degenerate or wrongly oriented.
pub fn u_of(rho: &KForm) -> Result<KForm> {
    assert_eq!(rho.degree(), 2, "u_of expects a 2-form");
    let sq = wedge(rho, rho)?;
    let u = sq.scaled(0.5);
    let min_u = par::min(u.comp(0));
    if min_u <= 0.0 {
        return Err(Error::Degenerate { min_u });
    }
    let mut out = KForm::zeros(rho.grid(), 0);
    out.comp_mut(0).copy_from_slice(u.comp(0));
    Ok(out)
}

/// A closed nondegenerate 2-form together with the cached pointwise linear
/// maps derived from it (u, rho^{-1}, the twisted stars on 1- and 3-forms).
///
/// Immutable after construction; all operations are pure.
pub struct SymplecticState {
    rho: KForm,
    u: KForm,
    min_u: f64,
    star1: Vec<Mat4>,
    star3: Vec<Mat4>,
    /// (P^T)^{-1} where P[i][j] = rho(e_i, e_j); solves iota(X) rho = lambda.
    rho_inv_t: Vec<Mat4>,
    token: u64,
}

impl SymplecticState {
    pub fn new(rho: KForm) -> Result<Self> {
        Self::with_options(rho, StateOptions::default())
    }

    pub fn with_options(rho: KForm, opts: StateOptions) -> Result<Self> {
        assert_eq!(rho.degree(), 2, "state expects a 2-form");
        let d_residual = exterior_d(&rho)?.linf();
        if d_residual > opts.closed_tol {
            return Err(Error::NotClosed {
                residual: d_residual,
            });
        }
        let u = u_of(&rho)?;
        let min_u = par::min(u.comp(0));
        if min_u <= opts.u_floor {
            return Err(Error::Degenerate { min_u });
        }

        let np = rho.grid().points();
        let per_point: Vec<(Mat4, Mat4, Mat4)> = par::map_indexed(np, |p| {
            let r = rho.at(p);
            let up = u.comp(0)[p];
            let s1 = star1_matrix(&r, up);
            let s3 = mat4::invert(&s1).expect("u > 0 guarantees invertibility");
            let pmat = two_form_matrix(&r);
            let inv_t = mat4::invert(&mat4::transpose(&pmat))
                .expect("nondegenerate rho is invertible");
            (s1, s3, inv_t)
        });
        let mut star1 = Vec::with_capacity(np);
        let mut star3 = Vec::with_capacity(np);
        let mut rho_inv_t = Vec::with_capacity(np);
        for (s1, s3, it) in per_point {
            star1.push(s1);
            star3.push(s3);
            rho_inv_t.push(it);
        }

        Ok(Self {
            rho,
            u,
            min_u,
            star1,
            star3,
            rho_inv_t,
            token: NEXT_TOKEN.fetch_add(1, Ordering::Relaxed),
        })
    }

    pub fn grid(&self) -> Grid4 {
        self.rho.grid()
    }

    pub fn rho(&self) -> &KForm {
        &self.rho
    }

    /// The volume ratio u; dvol_rho = u dvol.
    pub fn u(&self) -> &KForm {
        &self.u
    }

    pub fn min_u(&self) -> f64 {
        self.min_u
    }

    pub fn token(&self) -> u64 {
        self.token
    }

    /// Cached (P^T)^{-1} per point, P the matrix of rho; -P^{-1} by antisymmetry.
    pub(crate) fn rho_inv_t(&self) -> &[Mat4] {
        &self.rho_inv_t
    }

    /// Residual of the class constraint: |harmonic part of rho - omega_std|.
    pub fn class_residual(&self) -> f64 {
        let harm = crate::spectral_hodge::harmonic_part(&self.rho);
        (&harm - &omega_std(self.grid())).linf()
    }

    /// Reflection R w = w - (w^rho / dvol_rho) rho across the wedge-orthogonal
    /// complement of rho. Involution, preserves the exterior product.
    pub fn r_rho(&self, w: &KForm) -> KForm {
        assert_eq!(w.degree(), 2, "r_rho expects a 2-form");
        let q = wedge(w, &self.rho).expect("2 + 2 = 4");
        let mut factor = KForm::zeros(self.grid(), 0);
        let qd = q.comp(0);
        let ud = self.u.comp(0);
        par::fill_chunks(factor.comp_mut(0), |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                *v = qd[off + j] / ud[off + j];
            }
        });
        let mut out = w.clone();
        out.axpy(-1.0, &self.rho.scale_pointwise(&factor));
        out
    }

    /// Twisted star on 2-forms: R * R.
    pub fn star_rho_2(&self, w: &KForm) -> KForm {
        self.r_rho(&star_background(&self.r_rho(w)))
    }

    /// Twisted star on 1-forms: rho ^ *(rho ^ lambda) / u.
    pub fn star_rho_1(&self, lam: &KForm) -> KForm {
        assert_eq!(lam.degree(), 1, "star_rho_1 expects a 1-form");
        apply_mat_field(self.grid(), &self.star1, lam.data(), 3)
    }

    /// Pointwise inverse of [`Self::star_rho_1`].
    ///
    /// The Hodge star of g^rho on 3-forms is *minus* this map, since the star
    /// of any Riemannian metric squares to -id on odd degrees in dimension
    /// four. Callers realizing textbook formulas should flip the sign.
    pub fn star_rho_3(&self, t: &KForm) -> KForm {
        assert_eq!(t.degree(), 3, "star_rho_3 expects a 3-form");
        apply_mat_field(self.grid(), &self.star3, t.data(), 1)
    }

    /// Solve iota(X) rho = lambda pointwise.
    pub fn rho_contract(&self, lam: &KForm) -> VectorField {
        assert_eq!(lam.degree(), 1, "rho_contract expects a 1-form");
        let out = apply_mat_field(self.grid(), &self.rho_inv_t, lam.data(), 1);
        let mut vf = VectorField::zeros(self.grid());
        vf.data_mut().copy_from_slice(out.data());
        vf
    }

    /// The 2-form omega^rho = R omega_std.
    pub fn omega_rho(&self) -> KForm {
        self.r_rho(&omega_std(self.grid()))
    }

    /// The metric with the same volume form as the background whose Hodge star
    /// realizes the twisted stars: g = omega^rho(., J^rho .), built from the
    /// standard pair (omega_std, J_std) and J^rho = rho^{-1} J_std^T rho.
    ///
    /// Fails with a consistency error when the result is not symmetric
    /// positive definite, which would indicate an index-convention bug.
    pub fn metric_g_rho(&self) -> Result<Vec<Mat4>> {
        let np = self.grid().points();
        let omega = omega_std(self.grid());
        let j_std = j_standard();
        let j_std_t = mat4::transpose(&j_std);
        let mats: Vec<Mat4> = par::map_indexed(np, |p| {
            let r = self.rho.at(p);
            let up = self.u.comp(0)[p];
            // omega^rho = omega_std - (omega_std ^ rho / u dvol) rho
            let mut q = [0.0; 1];
            crate::fields4::wedge_point(2, 2, &omega.at(p), &r, &mut q);
            let factor = q[0] / up;
            let mut wr = [0.0; 6];
            for (c, w) in wr.iter_mut().enumerate() {
                *w = omega.at(p)[c] - factor * r[c];
            }
            let wmat = two_form_matrix(&wr);
            let pmat = two_form_matrix(&r);
            let pinv = mat4::invert(&pmat).expect("nondegenerate");
            let j_rho = mat4::matmul(&mat4::matmul(&pinv, &j_std_t), &pmat);
            mat4::matmul(&wmat, &j_rho)
        });
        for g in &mats {
            if !mat4::is_spd(g, 1e-8) {
                return Err(Error::MetricConsistency);
            }
        }
        Ok(mats)
    }

    /// Hodge star on 1-forms of an explicit pointwise metric with unit volume
    /// form: *_g lambda = iota(g^{-1} lambda) dvol. Cross-check oracle for
    /// [`Self::star_rho_1`].
    pub fn star_one_form_of_metric(&self, mats: &[Mat4], lam: &KForm) -> KForm {
        assert_eq!(lam.degree(), 1, "expects a 1-form");
        let grid = self.grid();
        let np = grid.points();
        let mut out = KForm::zeros(grid, 3);
        let dvol_comps = [1.0];
        for c in 0..4 {
            let dst = out.comp_mut(c);
            par::fill_chunks(dst, |off, chunk| {
                let mut tmp = [0.0; 4];
                for (j, v) in chunk.iter_mut().enumerate() {
                    let p = off + j;
                    let l = [
                        lam.data()[p],
                        lam.data()[np + p],
                        lam.data()[2 * np + p],
                        lam.data()[3 * np + p],
                    ];
                    let ginv = mat4::invert(&mats[p]).expect("SPD");
                    let sharp = mat4::matvec(&ginv, &l);
                    crate::fields4::interior_point(4, &sharp, &dvol_comps, &mut tmp);
                    *v = tmp[c];
                }
            });
        }
        out
    }
}

/// Matrix P[i][j] = w(e_i, e_j) of a 2-form from its six components.
pub(crate) fn two_form_matrix(c: &[f64]) -> Mat4 {
    // component order 12, 13, 14, 23, 24, 34
    [
        [0.0, c[0], c[1], c[2]],
        [-c[0], 0.0, c[3], c[4]],
        [-c[1], -c[3], 0.0, c[5]],
        [-c[2], -c[4], -c[5], 0.0],
    ]
}

/// Standard complex structure with g = omega_std(., J .).
fn j_standard() -> Mat4 {
    // J e1 = e2, J e2 = -e1, J e3 = e4, J e4 = -e3 (column action)
    [
        [0.0, -1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
}

/// Column c of the 1-form -> 3-form star matrix at a point with 2-form
/// coefficients `r` and volume ratio `u`.
fn star1_matrix(r: &[f64], u: f64) -> Mat4 {
    let mut m = [[0.0; 4]; 4];
    let mut lam = [0.0; 4];
    let mut w3 = [0.0; 4];
    let mut s1 = [0.0; 4];
    let mut t3 = [0.0; 4];
    for c in 0..4 {
        lam.fill(0.0);
        lam[c] = 1.0;
        crate::fields4::wedge_point(2, 1, r, &lam, &mut w3);
        crate::fields4::star_point(3, &w3, &mut s1);
        crate::fields4::wedge_point(2, 1, r, &s1, &mut t3);
        for row in 0..4 {
            m[row][c] = t3[row] / u;
        }
    }
    m
}

/// Apply a cached pointwise 4x4 map to a 4-component coefficient array.
fn apply_mat_field(grid: Grid4, mats: &[Mat4], data: &[f64], out_degree: usize) -> KForm {
    let np = grid.points();
    debug_assert_eq!(data.len(), 4 * np);
    let mut out = KForm::zeros(grid, out_degree);
    for c in 0..4 {
        let dst = out.comp_mut(c);
        par::fill_chunks(dst, |off, chunk| {
            for (j, v) in chunk.iter_mut().enumerate() {
                let p = off + j;
                let row = &mats[p][c];
                *v = row[0] * data[p]
                    + row[1] * data[np + p]
                    + row[2] * data[2 * np + p]
                    + row[3] * data[3 * np + p];
            }
        });
    }
    out
}
